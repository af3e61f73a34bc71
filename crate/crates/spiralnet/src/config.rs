//! Experiment configuration: a flat JSON object in which every field has a
//! default, unknown keys are rejected, and everything downstream (network,
//! observations, schedule, transport meter) is derived deterministically.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost::TransportMeter;
use crate::error::{Error, Result};
use crate::optimizer::{Algorithm, StepKind, StepSizeSchedule};
use crate::problem::{generate_observations, Estimate, FeasibleSet, ProblemInstance};
use crate::topology::{NetworkInstance, NodePosition};

/// Mixed into the experiment seed to give observation noise its own stream,
/// so the same seed never feeds both node placement and noise.
const OBSERVATION_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Total number of nodes; must be divisible by `n_clusters`.
    pub n: usize,
    pub n_clusters: usize,
    /// Observations per node.
    pub m: usize,
    /// Estimate dimension. The trajectory file format is scalar, so
    /// experiments require `d = 1`; the in-memory engine is generic.
    pub d: usize,
    pub algorithm: Algorithm,
    pub step_kind: StepKind,
    pub alpha0: f64,
    pub iterations: usize,
    /// Master seed: node placement uses it directly, observation noise uses
    /// a salted variant.
    pub seed: u64,
    pub true_theta: f64,
    pub noise_std: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub bits_per_scalar: u32,
    pub fusion_x: f64,
    pub fusion_y: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 64,
            n_clusters: 8,
            m: 10,
            d: 1,
            algorithm: Algorithm::Spiral,
            step_kind: StepKind::Diminishing,
            alpha0: 0.007,
            iterations: 500,
            seed: 1,
            true_theta: 10.0,
            noise_std: 1.0,
            theta_min: -100.0,
            theta_max: 100.0,
            bits_per_scalar: 32,
            fusion_x: 0.5,
            fusion_y: 0.5,
            out_dir: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a config. Missing fields take their defaults;
    /// unknown fields are an error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if self.n_clusters == 0 {
            return fail("n_clusters must be at least 1".into());
        }
        if !self.n.is_multiple_of(self.n_clusters) {
            return fail(format!(
                "n = {} is not divisible by n_clusters = {}",
                self.n, self.n_clusters
            ));
        }
        if self.algorithm == Algorithm::Spiral && self.n_clusters < 2 {
            return fail("the spiral algorithm needs n_clusters >= 2".into());
        }
        if self.m == 0 {
            return fail("m must be at least 1".into());
        }
        if self.d == 0 {
            return fail("d must be at least 1".into());
        }
        if self.iterations == 0 {
            return fail("iterations must be at least 1".into());
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return fail(format!("alpha0 must be finite and positive, got {}", self.alpha0));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return fail(format!(
                "noise_std must be finite and non-negative, got {}",
                self.noise_std
            ));
        }
        if !(self.theta_min.is_finite() && self.theta_max.is_finite()) {
            return fail("theta_min and theta_max must be finite".into());
        }
        if self.theta_min >= self.theta_max {
            return fail(format!(
                "need theta_min < theta_max, got [{}, {}]",
                self.theta_min, self.theta_max
            ));
        }
        if !self.true_theta.is_finite() {
            return fail("true_theta must be finite".into());
        }
        if self.bits_per_scalar == 0 {
            return fail("bits_per_scalar must be at least 1".into());
        }
        if !(self.fusion_x.is_finite() && self.fusion_y.is_finite()) {
            return fail("fusion center coordinates must be finite".into());
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<StepSizeSchedule> {
        StepSizeSchedule::new(self.step_kind, self.alpha0)
    }

    pub fn feasible_set(&self) -> Result<FeasibleSet> {
        FeasibleSet::new(vec![self.theta_min; self.d], vec![self.theta_max; self.d])
    }

    pub fn meter(&self) -> TransportMeter {
        TransportMeter::new(
            self.bits_per_scalar,
            self.d,
            NodePosition::new(self.fusion_x, self.fusion_y),
            self.m,
        )
    }

    /// Runs start from the center of the feasible box.
    pub fn initial_estimate(&self) -> Result<Estimate> {
        Ok(self.feasible_set()?.center())
    }

    pub fn observation_seed(&self) -> u64 {
        self.seed ^ OBSERVATION_SEED_SALT
    }

    /// Builds the full problem instance: network from the master seed,
    /// observations from the salted seed.
    pub fn build_problem(&self) -> Result<ProblemInstance> {
        let network = NetworkInstance::generate(self.n, self.n_clusters, self.seed)?;
        let data = generate_observations(
            &network,
            self.m,
            self.true_theta,
            self.noise_std,
            self.observation_seed(),
        )?;
        ProblemInstance::new(network, data, self.feasible_set()?)
    }
}
