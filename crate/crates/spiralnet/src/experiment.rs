//! End-to-end experiment drivers: build a problem from a config, run an
//! algorithm, verify its trajectory, and write every artifact to disk.
//!
//! A run writes four files into the output directory:
//!
//! * `{algorithm}_trajectory.csv` — the full trajectory in long format;
//! * `{algorithm}_summary.json` — scalar results (optimum, final objective,
//!   convergence milestones, transport-cost ledger);
//! * `{algorithm}_analysis.json` — the inequality-check report;
//! * `config.json` — the resolved configuration the run actually used.
//!
//! Re-running the same config overwrites the files with byte-identical
//! content.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze_trajectory, compute_bounds, empirical_liminf, error_floor, AnalysisReport,
};
use crate::config::ExperimentConfig;
use crate::cost::{scaling_study, CostLedger, ScalingTable};
use crate::error::{Error, Result};
use crate::optimizer::{run, Algorithm, StepKind, TrajectoryRecord};
use crate::problem::ProblemInstance;

/// Scalar results of one run, written as `{algorithm}_summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub n: usize,
    pub n_clusters: usize,
    pub cluster_size: usize,
    pub m: usize,
    pub step_kind: StepKind,
    pub alpha0: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Minimizer of the total objective over the feasible box (scalar, d = 1).
    pub theta_star: f64,
    pub f_star: f64,
    pub initial_total_objective: f64,
    pub final_total_objective: f64,
    /// Mean over clusters of the distance from the final estimate to the
    /// optimum.
    pub final_mean_distance_to_optimum: f64,
    /// First iteration whose total objective closed 99% of the initial gap
    /// to `f_star`; `None` if the run never got there.
    pub iterations_to_tolerance: Option<usize>,
    /// `f_star + alpha/2 * sum_j C_j^2`; only meaningful for fixed steps.
    pub fixed_step_floor: Option<f64>,
    /// Minimum total objective over the last half of the run.
    pub empirical_liminf_tail_half: f64,
    pub ledger: CostLedger,
    pub all_checks_passed: bool,
}

/// Everything a run produced, both in memory and on disk.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub problem: ProblemInstance,
    pub trajectory: TrajectoryRecord,
    pub report: AnalysisReport,
    pub summary: RunSummary,
    pub trajectory_path: PathBuf,
    pub summary_path: PathBuf,
    pub analysis_path: PathBuf,
}

fn require_scalar_model(config: &ExperimentConfig) -> Result<()> {
    if config.d != 1 {
        return Err(Error::Config(
            "experiment artifacts use the scalar trajectory format; set d = 1".into(),
        ));
    }
    Ok(())
}

/// Runs the configured algorithm once, verifies the trajectory, and writes
/// all artifacts under `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    require_scalar_model(config)?;

    let problem = config.build_problem()?;
    let bounds = compute_bounds(&problem)?;
    let schedule = config.schedule()?;
    let meter = config.meter();
    let initial = config.initial_estimate()?;
    let trajectory = run(
        &problem,
        config.algorithm,
        &schedule,
        config.iterations,
        &initial,
        &meter,
    )?;
    let report = analyze_trajectory(&problem, &trajectory, &bounds)?;

    let (theta_star, f_star) = problem.reference_optimum();
    let initial_total = trajectory.iterations[0].total_objective;
    let target = f_star + 0.01 * (initial_total - f_star);
    let iterations_to_tolerance = trajectory
        .iterations
        .iter()
        .find(|r| r.total_objective <= target)
        .map(|r| r.k)
        .or_else(|| {
            (trajectory.final_total_objective <= target).then_some(config.iterations + 1)
        });
    let final_mean_distance = trajectory
        .final_thetas
        .iter()
        .map(|t| t.distance_to(&theta_star))
        .sum::<f64>()
        / trajectory.final_thetas.len() as f64;
    let fixed_step_floor = (config.step_kind == StepKind::Fixed)
        .then(|| error_floor(&problem, config.alpha0, &bounds));

    let summary = RunSummary {
        algorithm: config.algorithm,
        n: config.n,
        n_clusters: config.n_clusters,
        cluster_size: config.n / config.n_clusters,
        m: config.m,
        step_kind: config.step_kind,
        alpha0: config.alpha0,
        iterations: config.iterations,
        seed: config.seed,
        theta_star: theta_star.value[0],
        f_star,
        initial_total_objective: initial_total,
        final_total_objective: trajectory.final_total_objective,
        final_mean_distance_to_optimum: final_mean_distance,
        iterations_to_tolerance,
        fixed_step_floor,
        empirical_liminf_tail_half: empirical_liminf(&trajectory, 0.5)?,
        ledger: meter.run_ledger(&problem.network, config.algorithm, config.iterations),
        all_checks_passed: report.all_passed(),
    };

    fs::create_dir_all(&config.out_dir)?;
    let stem = config.algorithm.to_string();
    let trajectory_path = config.out_dir.join(format!("{stem}_trajectory.csv"));
    let summary_path = config.out_dir.join(format!("{stem}_summary.json"));
    let analysis_path = config.out_dir.join(format!("{stem}_analysis.json"));
    let file = fs::File::create(&trajectory_path)?;
    trajectory.write_csv(file)?;
    fs::write(&summary_path, pretty_json(&summary)?)?;
    fs::write(&analysis_path, pretty_json(&report)?)?;
    fs::write(config.out_dir.join("config.json"), config.to_json_string())?;

    Ok(ExperimentOutcome {
        config: config.clone(),
        problem,
        trajectory,
        report,
        summary,
        trajectory_path,
        summary_path,
        analysis_path,
    })
}

/// Meters transport cost across cluster counts at the config's cluster size,
/// using `seed_count` consecutive seeds starting from the config's seed.
/// Writes `scaling.json` under `config.out_dir`.
pub fn sweep_experiment(
    config: &ExperimentConfig,
    nc_list: &[usize],
    seed_count: u64,
) -> Result<ScalingTable> {
    config.validate()?;
    if seed_count == 0 {
        return Err(Error::Config("sweep needs at least 1 seed".into()));
    }
    if nc_list.is_empty() {
        return Err(Error::Config("sweep needs at least one cluster count".into()));
    }
    let cluster_size = config.n / config.n_clusters;
    let seeds: Vec<u64> = (0..seed_count).map(|i| config.seed.wrapping_add(i)).collect();
    let table = scaling_study(
        &config.meter(),
        cluster_size,
        nc_list,
        &seeds,
        config.iterations,
    )?;
    fs::create_dir_all(&config.out_dir)?;
    fs::write(config.out_dir.join("scaling.json"), pretty_json(&table)?)?;
    Ok(table)
}

/// Re-verifies a trajectory file against the problem the config describes:
/// parses the CSV, rebuilds the instance and bounds, and reruns every
/// inequality check that applies to the config's algorithm.
pub fn check_trajectory(config: &ExperimentConfig, csv_path: &Path) -> Result<AnalysisReport> {
    config.validate()?;
    require_scalar_model(config)?;
    let file = fs::File::open(csv_path)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", csv_path.display())))?;
    let schedule = config.schedule()?;
    let trajectory = TrajectoryRecord::read_csv(file, config.algorithm, &schedule)?;
    let problem = config.build_problem()?;
    let bounds = compute_bounds(&problem)?;
    analyze_trajectory(&problem, &trajectory, &bounds)
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}
