//! Deterministic simulator and analysis toolkit for distributed estimation
//! in clustered sensor networks.
//!
//! Sensors are grouped into equal-size clusters. Each cluster refines a
//! shared estimate with an incremental projected-subgradient pass along a
//! path through its members; a ring exchange between neighboring cluster
//! heads then mixes the clusters' results — no fusion center required. The
//! crate ships that algorithm alongside two baselines (fusion-center
//! averaging and centralized projected gradient descent), per-iteration
//! verification of the descent inequalities the algorithms are built on, and
//! a bit-meter transport-cost model for comparing communication burdens.
//!
//! Everything is a pure function of the seeds in the configuration: runs,
//! trajectory files, and summaries reproduce byte for byte.
//!
//! The examples are the front door, one per capability:
//!
//! ```text
//! cargo run --example generate_network     # placement, clustering, heads, paths
//! cargo run --example single_run           # one spiral run end to end
//! cargo run --example compare_algorithms   # spiral vs baselines, same instance
//! cargo run --example verify_bounds        # inequality checks on a live run
//! cargo run --example error_floor          # fixed-step floor vs observed liminf
//! cargo run --example transport_cost       # bit-meter scaling across cluster counts
//! ```
//!
//! The `spiralnet` binary wraps the same entry points as `run`, `sweep`, and
//! `check` subcommands for scripted use.

pub mod analysis;
pub mod config;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod optimizer;
pub mod problem;
pub mod topology;

pub use analysis::{
    analyze_trajectory, check_bound_domination, check_cluster_descent, check_descent_inequality,
    check_drift_bound, compute_bounds, descent_terms, empirical_liminf, error_floor,
    AnalysisReport, BoundSet, CheckSummary, DescentTerm, VIOLATION_TOLERANCE,
};
pub use config::ExperimentConfig;
pub use cost::{log_log_slope, scaling_study, CostLedger, ScalingTable, TransportMeter};
pub use error::{Error, Result};
pub use experiment::{
    check_trajectory, run_experiment, sweep_experiment, ExperimentOutcome, RunSummary,
};
pub use optimizer::{
    cluster_pass, fusion_combine, run, spiral_combine, Algorithm, IterationRecord, StepKind,
    StepSizeSchedule, TrajectoryRecord,
};
pub use problem::{
    generate_observations, local_cost, subgradient, Estimate, FeasibleSet, NodeData,
    ProblemInstance,
};
pub use topology::{distance, NetworkInstance, NodePosition};
