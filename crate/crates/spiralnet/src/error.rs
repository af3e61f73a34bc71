//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A count parameter is zero, negative, or incompatible (e.g. `n` not
    /// divisible by the cluster count).
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// A network or problem instance violates a structural invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An algorithm was configured in a way it cannot run (e.g. the ring
    /// combine with fewer than two clusters).
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A caller-supplied argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Subgradient bounds require a bounded (finite box) feasible set.
    #[error("unbounded feasible set: {0}")]
    UnboundedFeasibleSet(String),

    /// An iterate left the representable range mid-run. Indices identify the
    /// iteration, the cluster, and the in-cluster sub-step that produced it.
    #[error("numerical divergence at iteration {iteration}, cluster {cluster}, sub-step {sub_step}")]
    NumericalDivergence {
        iteration: usize,
        cluster: usize,
        sub_step: usize,
    },

    /// Experiment configuration could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// A trajectory or fixture file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for anything that prevented the run
    /// (config, parse, IO, divergence). Check failures are not errors; the
    /// harness reports them and the CLI exits 1.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
