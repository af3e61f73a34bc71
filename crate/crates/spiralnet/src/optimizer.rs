//! The three optimization algorithms and their recorded trajectories.
//!
//! All three share the same projected-subgradient core. Per iteration `k`,
//! the two distributed algorithms run an incremental pass in every cluster:
//! the head seeds the running estimate with the cluster's current value, and
//! each node along the path applies one projected descent step with its own
//! subgradient. They differ only in how the clusters' final sub-iterates are
//! combined:
//!
//! * **spiral** — each cluster averages its own final with the next cluster's
//!   final around the ring, a synchronous exchange with no fusion center;
//! * **incluster** — a fusion center averages all finals and broadcasts the
//!   result back to every cluster;
//! * **centralized** — the reference: projected full-gradient descent on the
//!   summed objective.
//!
//! The descent update is `phi <- project(phi - alpha_k * g)`. Iterations are
//! indexed from 1 so the diminishing schedule `alpha_0 / k` is defined
//! everywhere. Cluster passes within an iteration are mutually independent;
//! they are executed in cluster-index order and all combines read a snapshot
//! taken after every pass finished, so results are bit-reproducible.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::TransportMeter;
use crate::error::{Error, Result};
use crate::problem::{subgradient, Estimate, FeasibleSet, ProblemInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Spiral,
    InCluster,
    Centralized,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Spiral => "spiral",
            Algorithm::InCluster => "incluster",
            Algorithm::Centralized => "centralized",
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiral" => Ok(Algorithm::Spiral),
            "incluster" => Ok(Algorithm::InCluster),
            "centralized" => Ok(Algorithm::Centralized),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm '{other}' (expected spiral, incluster, or centralized)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Fixed,
    Diminishing,
}

/// Step-size rule: `alpha0` at every iteration, or `alpha0 / k`.
///
/// `alpha0 = 0` is accepted and yields the stationary schedule; the
/// verification tests rely on it, while experiment configs require a strictly
/// positive value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeSchedule {
    pub kind: StepKind,
    pub alpha0: f64,
}

impl StepSizeSchedule {
    pub fn new(kind: StepKind, alpha0: f64) -> Result<Self> {
        if !(alpha0 >= 0.0 && alpha0.is_finite()) {
            return Err(Error::InvalidConfiguration(format!(
                "alpha0 must be finite and non-negative, got {alpha0}"
            )));
        }
        Ok(Self { kind, alpha0 })
    }

    pub fn fixed(alpha0: f64) -> Result<Self> {
        Self::new(StepKind::Fixed, alpha0)
    }

    pub fn diminishing(alpha0: f64) -> Result<Self> {
        Self::new(StepKind::Diminishing, alpha0)
    }

    /// Step size at iteration `k >= 1`.
    pub fn alpha(&self, k: usize) -> f64 {
        debug_assert!(k >= 1, "iterations are indexed from 1");
        match self.kind {
            StepKind::Fixed => self.alpha0,
            StepKind::Diminishing => self.alpha0 / k as f64,
        }
    }
}

/// Per-cluster state across one iteration: the head's value at the start and
/// the last sub-iterate produced by the pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    pub theta: Estimate,
    pub final_phi: Estimate,
}

/// Everything recorded about iteration `k`, before its combine step.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha: f64,
    /// Cluster estimates at the start of the iteration.
    pub thetas: Vec<Estimate>,
    /// `sub_iterates[j][i]` is the i-th sub-iterate of cluster j; index 0 is
    /// the head's initialization, so passes record `cluster_size + 1` values.
    /// The centralized reference records the single entry `[theta]`.
    pub sub_iterates: Vec<Vec<Estimate>>,
    pub cluster_objectives: Vec<f64>,
    pub total_objective: f64,
    /// Transport cost accumulated through the end of this iteration.
    pub cum_bit_meters: f64,
}

/// A complete run: one record per iteration plus the post-run estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub algorithm: Algorithm,
    pub schedule: StepSizeSchedule,
    pub iterations: Vec<IterationRecord>,
    /// Estimates after the final combine, i.e. the state the next iteration
    /// would have started from.
    pub final_thetas: Vec<Estimate>,
    pub final_cluster_objectives: Vec<f64>,
    pub final_total_objective: f64,
}

impl TrajectoryRecord {
    pub fn num_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// Number of recorded groups per iteration: the cluster count for the
    /// distributed algorithms, 1 for the centralized reference.
    pub fn n_groups(&self) -> usize {
        self.final_thetas.len()
    }

    /// The estimates produced by iteration `k`'s combine (`1 <= k <= K`).
    pub fn thetas_after(&self, k: usize) -> &[Estimate] {
        let last = self.num_iterations();
        assert!(k >= 1 && k <= last, "iteration {k} out of range 1..={last}");
        if k < last {
            &self.iterations[k].thetas
        } else {
            &self.final_thetas
        }
    }
}

/// One incremental pass through cluster `cluster`, starting from
/// `theta_init`. Returns the final sub-iterate and the whole list (length
/// `cluster_size + 1`, initialization first). `iteration` only labels
/// divergence errors.
pub fn cluster_pass(
    problem: &ProblemInstance,
    cluster: usize,
    theta_init: &Estimate,
    alpha: f64,
    iteration: usize,
) -> Result<(Estimate, Vec<Estimate>)> {
    let path = &problem.network.paths[cluster];
    let mut phi = theta_init.clone();
    let mut sub_iterates = Vec::with_capacity(path.len() + 1);
    sub_iterates.push(phi.clone());
    for (step, &node) in path.iter().enumerate() {
        let g = subgradient(&problem.data[node], &phi);
        let raw = phi.sub(&g.scale(alpha));
        if !raw.is_finite() {
            return Err(Error::NumericalDivergence {
                iteration,
                cluster,
                sub_step: step + 1,
            });
        }
        phi = problem.feasible.project(&raw);
        sub_iterates.push(phi.clone());
    }
    Ok((phi, sub_iterates))
}

/// The ring exchange: cluster j's next estimate is the average of its own
/// final sub-iterate and cluster j+1's (mod n_clusters), projected onto the
/// feasible set. All outputs are computed from the same snapshot.
pub fn spiral_combine(finals: &[Estimate], feasible: &FeasibleSet) -> Result<Vec<Estimate>> {
    let n_c = finals.len();
    if n_c < 2 {
        return Err(Error::InvalidConfiguration(
            "the ring exchange needs at least 2 clusters".into(),
        ));
    }
    Ok((0..n_c)
        .map(|j| feasible.project(&finals[j].add(&finals[(j + 1) % n_c]).scale(0.5)))
        .collect())
}

/// The fusion-center combine: the arithmetic mean of all finals, projected.
/// The baseline broadcasts this single value back to every cluster.
pub fn fusion_combine(finals: &[Estimate], feasible: &FeasibleSet) -> Result<Estimate> {
    if finals.is_empty() {
        return Err(Error::InvalidConfiguration(
            "the fusion combine needs at least 1 cluster".into(),
        ));
    }
    let mut sum = Estimate::zeros(finals[0].dim());
    for phi in finals {
        sum = sum.add(phi);
    }
    Ok(feasible.project(&sum.scale(1.0 / finals.len() as f64)))
}

/// Runs `iterations` iterations of the chosen algorithm and records the full
/// trajectory. Identical inputs produce bit-identical trajectories.
pub fn run(
    problem: &ProblemInstance,
    algorithm: Algorithm,
    schedule: &StepSizeSchedule,
    iterations: usize,
    initial_theta: &Estimate,
    meter: &TransportMeter,
) -> Result<TrajectoryRecord> {
    if iterations == 0 {
        return Err(Error::InvalidConfiguration(
            "need at least 1 iteration".into(),
        ));
    }
    if initial_theta.dim() != problem.d {
        return Err(Error::InvalidArgument(format!(
            "initial estimate has dimension {}, problem has {}",
            initial_theta.dim(),
            problem.d
        )));
    }
    if !problem.feasible.contains(initial_theta) {
        return Err(Error::InvalidArgument(
            "initial estimate lies outside the feasible set".into(),
        ));
    }
    if algorithm == Algorithm::Spiral && problem.network.n_clusters < 2 {
        return Err(Error::InvalidConfiguration(
            "the spiral algorithm needs at least 2 clusters".into(),
        ));
    }

    match algorithm {
        Algorithm::Spiral | Algorithm::InCluster => {
            run_distributed(problem, algorithm, schedule, iterations, initial_theta, meter)
        }
        Algorithm::Centralized => {
            run_centralized(problem, schedule, iterations, initial_theta, meter)
        }
    }
}

fn run_distributed(
    problem: &ProblemInstance,
    algorithm: Algorithm,
    schedule: &StepSizeSchedule,
    iterations: usize,
    initial_theta: &Estimate,
    meter: &TransportMeter,
) -> Result<TrajectoryRecord> {
    let n_c = problem.network.n_clusters;
    let delta = meter.iteration_ledger(&problem.network, algorithm);
    let mut states: Vec<ClusterState> = (0..n_c)
        .map(|_| ClusterState {
            theta: initial_theta.clone(),
            final_phi: initial_theta.clone(),
        })
        .collect();
    let mut records = Vec::with_capacity(iterations);
    let mut cum_bit_meters = 0.0;

    for k in 1..=iterations {
        let alpha = schedule.alpha(k);
        let mut sub_iterates = Vec::with_capacity(n_c);
        for (j, state) in states.iter_mut().enumerate() {
            let (final_phi, subs) = cluster_pass(problem, j, &state.theta, alpha, k)?;
            state.final_phi = final_phi;
            sub_iterates.push(subs);
        }
        let cluster_objectives: Vec<f64> = states
            .iter()
            .enumerate()
            .map(|(j, s)| problem.cluster_cost(j, &s.theta))
            .collect();
        let total_objective = cluster_objectives.iter().sum();
        cum_bit_meters += delta.total_bm;
        records.push(IterationRecord {
            k,
            alpha,
            thetas: states.iter().map(|s| s.theta.clone()).collect(),
            sub_iterates,
            cluster_objectives,
            total_objective,
            cum_bit_meters,
        });

        let finals: Vec<Estimate> = states.iter().map(|s| s.final_phi.clone()).collect();
        match algorithm {
            Algorithm::Spiral => {
                let next = spiral_combine(&finals, &problem.feasible)?;
                for (state, theta) in states.iter_mut().zip(next) {
                    state.theta = theta;
                }
            }
            Algorithm::InCluster => {
                let next = fusion_combine(&finals, &problem.feasible)?;
                for state in states.iter_mut() {
                    state.theta = next.clone();
                }
            }
            Algorithm::Centralized => unreachable!(),
        }
    }

    let final_thetas: Vec<Estimate> = states.iter().map(|s| s.theta.clone()).collect();
    let final_cluster_objectives: Vec<f64> = final_thetas
        .iter()
        .enumerate()
        .map(|(j, theta)| problem.cluster_cost(j, theta))
        .collect();
    Ok(TrajectoryRecord {
        algorithm,
        schedule: *schedule,
        iterations: records,
        final_total_objective: final_cluster_objectives.iter().sum(),
        final_cluster_objectives,
        final_thetas,
    })
}

fn run_centralized(
    problem: &ProblemInstance,
    schedule: &StepSizeSchedule,
    iterations: usize,
    initial_theta: &Estimate,
    meter: &TransportMeter,
) -> Result<TrajectoryRecord> {
    // The observation upload happens once; the cumulative cost is flat.
    let ledger = meter.iteration_ledger(&problem.network, Algorithm::Centralized);
    let mut theta = initial_theta.clone();
    let mut records = Vec::with_capacity(iterations);

    for k in 1..=iterations {
        let alpha = schedule.alpha(k);
        let objective = problem.total_cost(&theta);
        records.push(IterationRecord {
            k,
            alpha,
            thetas: vec![theta.clone()],
            sub_iterates: vec![vec![theta.clone()]],
            cluster_objectives: vec![objective],
            total_objective: objective,
            cum_bit_meters: ledger.total_bm,
        });
        let g = problem.total_gradient(&theta);
        let raw = theta.sub(&g.scale(alpha));
        if !raw.is_finite() {
            return Err(Error::NumericalDivergence {
                iteration: k,
                cluster: 0,
                sub_step: 0,
            });
        }
        theta = problem.feasible.project(&raw);
    }

    let final_objective = problem.total_cost(&theta);
    Ok(TrajectoryRecord {
        algorithm: Algorithm::Centralized,
        schedule: *schedule,
        iterations: records,
        final_thetas: vec![theta],
        final_cluster_objectives: vec![final_objective],
        final_total_objective: final_objective,
    })
}

// --- CSV serialization ----------------------------------------------------
//
// Long format, one row per sub-iterate: (k, j, i, phi_value, theta_value,
// cluster_objective, total_objective, cum_bit_meters). A terminal block at
// k = K+1 with i = 0 carries the post-run estimates so a parsed file
// reproduces the in-memory record exactly. Scalar columns restrict the file
// format to d = 1, the default model.

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow {
    k: usize,
    j: usize,
    i: usize,
    phi_value: f64,
    theta_value: f64,
    cluster_objective: f64,
    total_objective: f64,
    cum_bit_meters: f64,
}

impl TrajectoryRecord {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let scalar = |e: &Estimate| -> Result<f64> {
            if e.dim() != 1 {
                return Err(Error::InvalidArgument(
                    "trajectory CSV supports d = 1 only".into(),
                ));
            }
            Ok(e.value[0])
        };
        let mut csv_writer = csv::Writer::from_writer(writer);
        for record in &self.iterations {
            for (j, subs) in record.sub_iterates.iter().enumerate() {
                for (i, phi) in subs.iter().enumerate() {
                    csv_writer
                        .serialize(TrajectoryRow {
                            k: record.k,
                            j,
                            i,
                            phi_value: scalar(phi)?,
                            theta_value: scalar(&record.thetas[j])?,
                            cluster_objective: record.cluster_objectives[j],
                            total_objective: record.total_objective,
                            cum_bit_meters: record.cum_bit_meters,
                        })
                        .map_err(|e| Error::Parse(e.to_string()))?;
                }
            }
        }
        let last_cum = self
            .iterations
            .last()
            .map(|r| r.cum_bit_meters)
            .unwrap_or(0.0);
        let final_k = self.num_iterations() + 1;
        for (j, theta) in self.final_thetas.iter().enumerate() {
            csv_writer
                .serialize(TrajectoryRow {
                    k: final_k,
                    j,
                    i: 0,
                    phi_value: scalar(theta)?,
                    theta_value: scalar(theta)?,
                    cluster_objective: self.final_cluster_objectives[j],
                    total_objective: self.final_total_objective,
                    cum_bit_meters: last_cum,
                })
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        csv_writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses a trajectory written by [`Self::write_csv`]. The algorithm and
    /// schedule are not stored in the file; they come from the experiment
    /// config (step sizes are recomputed from the schedule).
    pub fn read_csv<R: Read>(
        reader: R,
        algorithm: Algorithm,
        schedule: &StepSizeSchedule,
    ) -> Result<Self> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let mut rows: Vec<TrajectoryRow> = Vec::new();
        for row in csv_reader.deserialize() {
            rows.push(row.map_err(|e| Error::Parse(e.to_string()))?);
        }
        if rows.is_empty() {
            return Err(Error::Parse("trajectory CSV has no rows".into()));
        }
        let max_k = rows.iter().map(|r| r.k).max().expect("non-empty");
        if max_k < 2 {
            return Err(Error::Parse(
                "trajectory CSV needs at least one iteration block and the terminal block".into(),
            ));
        }
        let total_iterations = max_k - 1;
        let n_groups = rows
            .iter()
            .filter(|r| r.k == max_k)
            .map(|r| r.j + 1)
            .max()
            .expect("terminal block present");

        let mut iterations = Vec::with_capacity(total_iterations);
        for k in 1..=total_iterations {
            let block: Vec<&TrajectoryRow> = rows.iter().filter(|r| r.k == k).collect();
            if block.is_empty() {
                return Err(Error::Parse(format!("missing iteration block k = {k}")));
            }
            let mut thetas = Vec::with_capacity(n_groups);
            let mut sub_iterates = Vec::with_capacity(n_groups);
            let mut cluster_objectives = Vec::with_capacity(n_groups);
            for j in 0..n_groups {
                let mut group: Vec<&TrajectoryRow> =
                    block.iter().filter(|r| r.j == j).copied().collect();
                group.sort_by_key(|r| r.i);
                if group.is_empty() {
                    return Err(Error::Parse(format!("missing rows for k = {k}, j = {j}")));
                }
                for (expected, row) in group.iter().enumerate() {
                    if row.i != expected {
                        return Err(Error::Parse(format!(
                            "non-contiguous sub-step indices at k = {k}, j = {j}"
                        )));
                    }
                }
                thetas.push(Estimate::scalar(group[0].theta_value));
                cluster_objectives.push(group[0].cluster_objective);
                sub_iterates.push(
                    group
                        .iter()
                        .map(|r| Estimate::scalar(r.phi_value))
                        .collect(),
                );
            }
            let first = block.first().expect("non-empty block");
            iterations.push(IterationRecord {
                k,
                alpha: schedule.alpha(k),
                thetas,
                sub_iterates,
                cluster_objectives,
                total_objective: first.total_objective,
                cum_bit_meters: first.cum_bit_meters,
            });
        }

        let mut terminal: Vec<&TrajectoryRow> = rows.iter().filter(|r| r.k == max_k).collect();
        terminal.sort_by_key(|r| r.j);
        if terminal.len() != n_groups {
            return Err(Error::Parse("incomplete terminal block".into()));
        }
        let final_thetas: Vec<Estimate> = terminal
            .iter()
            .map(|r| Estimate::scalar(r.theta_value))
            .collect();
        let final_cluster_objectives: Vec<f64> =
            terminal.iter().map(|r| r.cluster_objective).collect();
        let final_total_objective = terminal[0].total_objective;

        Ok(TrajectoryRecord {
            algorithm,
            schedule: *schedule,
            iterations,
            final_thetas,
            final_cluster_objectives,
            final_total_objective,
        })
    }
}
