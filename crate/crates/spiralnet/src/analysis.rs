//! Convergence verification: worst-case subgradient bounds, the descent
//! inequalities the algorithms are supposed to satisfy at every iteration,
//! and the fixed-step error floor.
//!
//! The inequalities are evaluated numerically against a recorded trajectory.
//! A check never mutates anything; it reports how many (iteration, cluster,
//! sub-step) sites it evaluated, how many violated the inequality beyond
//! [`VIOLATION_TOLERANCE`], and the worst margin seen (positive margin =
//! slack, negative = violation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{Algorithm, TrajectoryRecord};
use crate::problem::{subgradient, Estimate, ProblemInstance};

/// Absolute slack allowed before a numerical comparison counts as a
/// violation; covers float rounding in the summations.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

/// Worst-case subgradient norms over the feasible box.
///
/// `per_step[j][i]` bounds the subgradient norm of the node at position `i`
/// of cluster `j`'s path, uniformly over the box: each observation term's
/// gradient norm is maximized coordinate-wise at a box corner, and the terms
/// are summed. `per_cluster[j]` sums a cluster's path, `total` sums all
/// clusters, and `sum_squares` is the sum of squared per-cluster bounds that
/// the descent inequalities use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub per_step: Vec<Vec<f64>>,
    pub per_cluster: Vec<f64>,
    pub total: f64,
    pub sum_squares: f64,
}

pub fn compute_bounds(problem: &ProblemInstance) -> Result<BoundSet> {
    let feasible = &problem.feasible;
    if !feasible.is_bounded() {
        return Err(Error::UnboundedFeasibleSet(
            "subgradient bounds need a bounded feasible box".into(),
        ));
    }
    let mut per_step = Vec::with_capacity(problem.network.n_clusters);
    let mut per_cluster = Vec::with_capacity(problem.network.n_clusters);
    for path in &problem.network.paths {
        let steps: Vec<f64> = path
            .iter()
            .map(|&node| {
                problem.data[node]
                    .observations
                    .iter()
                    .map(|&x| {
                        let corner_sq: f64 = feasible
                            .lower
                            .iter()
                            .zip(&feasible.upper)
                            .map(|(lo, hi)| (x - lo).abs().max((x - hi).abs()).powi(2))
                            .sum();
                        2.0 * corner_sq.sqrt()
                    })
                    .sum()
            })
            .collect();
        per_cluster.push(steps.iter().sum());
        per_step.push(steps);
    }
    Ok(BoundSet {
        total: per_cluster.iter().sum(),
        sum_squares: per_cluster.iter().map(|c| c * c).sum(),
        per_step,
        per_cluster,
    })
}

/// Outcome of one inequality check over a whole trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    /// Number of (iteration, cluster, sub-step) sites evaluated.
    pub evaluated: usize,
    pub violations: usize,
    /// Smallest slack seen; `None` when nothing was evaluated.
    pub worst_margin: Option<f64>,
    pub pass: bool,
}

impl CheckSummary {
    fn from_margins(name: &str, margins: impl IntoIterator<Item = f64>) -> Self {
        let mut evaluated = 0;
        let mut violations = 0;
        let mut worst: Option<f64> = None;
        for margin in margins {
            evaluated += 1;
            if margin < -VIOLATION_TOLERANCE {
                violations += 1;
            }
            worst = Some(match worst {
                Some(w) if w <= margin => w,
                _ => margin,
            });
        }
        CheckSummary {
            name: name.to_string(),
            evaluated,
            violations,
            worst_margin: worst,
            pass: violations == 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub algorithm: Algorithm,
    pub checks: Vec<CheckSummary>,
}

impl AnalysisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn require_clusters(problem: &ProblemInstance, trajectory: &TrajectoryRecord) -> Result<()> {
    if trajectory.algorithm == Algorithm::Centralized {
        return Err(Error::InvalidArgument(
            "per-cluster checks apply to the distributed algorithms only".into(),
        ));
    }
    if trajectory.n_groups() != problem.network.n_clusters {
        return Err(Error::InvalidArgument(format!(
            "trajectory records {} groups, network has {} clusters",
            trajectory.n_groups(),
            problem.network.n_clusters
        )));
    }
    for record in &trajectory.iterations {
        for (j, subs) in record.sub_iterates.iter().enumerate() {
            if subs.len() != problem.network.paths[j].len() + 1 {
                return Err(Error::InvalidArgument(format!(
                    "iteration {} cluster {j} records {} sub-iterates, path needs {}",
                    record.k,
                    subs.len(),
                    problem.network.paths[j].len() + 1
                )));
            }
        }
    }
    Ok(())
}

fn require_feasible_target(problem: &ProblemInstance, y: &Estimate) -> Result<()> {
    if !problem.feasible.contains(y) {
        return Err(Error::InvalidArgument(
            "comparison point lies outside the feasible set".into(),
        ));
    }
    Ok(())
}

/// Both sides of the network-wide descent inequality at one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentTerm {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl DescentTerm {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + VIOLATION_TOLERANCE
    }
}

/// Evaluates the network-wide descent inequality of the spiral algorithm at
/// every iteration: for any feasible `y`,
///
/// ```text
/// sum_j ||theta_{j,k+1} - y||^2  <=  sum_j ||theta_{j,k} - y||^2
///                                    - 2 alpha_k sum_j (f_j(theta_{j,k}) - f_j(y))
///                                    + alpha_k^2 sum_j C_j^2
/// ```
///
/// The ring exchange preserves the summed squared distance to any fixed
/// point, which is why the per-cluster pass inequalities survive the combine.
pub fn descent_terms(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
    y: &Estimate,
) -> Result<Vec<DescentTerm>> {
    if trajectory.algorithm != Algorithm::Spiral {
        return Err(Error::InvalidArgument(
            "the network-wide descent inequality applies to the spiral algorithm".into(),
        ));
    }
    require_clusters(problem, trajectory)?;
    require_feasible_target(problem, y)?;
    let n_c = problem.network.n_clusters;
    let f_at_y: Vec<f64> = (0..n_c).map(|j| problem.cluster_cost(j, y)).collect();

    Ok(trajectory
        .iterations
        .iter()
        .map(|record| {
            let next = trajectory.thetas_after(record.k);
            let lhs: f64 = next.iter().map(|t| t.distance_to(y).powi(2)).sum();
            let dist_sq: f64 =
                record.thetas.iter().map(|t| t.distance_to(y).powi(2)).sum();
            let cost_gap: f64 = record
                .cluster_objectives
                .iter()
                .zip(&f_at_y)
                .map(|(f_k, f_y)| f_k - f_y)
                .sum();
            let rhs = dist_sq - 2.0 * record.alpha * cost_gap
                + record.alpha * record.alpha * bounds.sum_squares;
            DescentTerm { k: record.k, lhs, rhs }
        })
        .collect())
}

/// [`descent_terms`] folded into a pass/fail summary.
pub fn check_descent_inequality(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
    y: &Estimate,
) -> Result<CheckSummary> {
    let terms = descent_terms(problem, trajectory, bounds, y)?;
    Ok(CheckSummary::from_margins(
        "network_descent",
        terms.iter().map(DescentTerm::margin),
    ))
}

/// Per-cluster pass inequality: one incremental pass through cluster `j`
/// satisfies, for any feasible `y`,
///
/// ```text
/// ||phi_last - y||^2 <= ||phi_0 - y||^2 - 2 alpha_k (f_j(phi_0) - f_j(y)) + alpha_k^2 C_j^2
/// ```
pub fn check_cluster_descent(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
    y: &Estimate,
) -> Result<CheckSummary> {
    require_clusters(problem, trajectory)?;
    require_feasible_target(problem, y)?;
    let n_c = problem.network.n_clusters;
    let f_at_y: Vec<f64> = (0..n_c).map(|j| problem.cluster_cost(j, y)).collect();

    let f_at_y = &f_at_y;
    let margins = trajectory.iterations.iter().flat_map(|record| {
        let alpha = record.alpha;
        record.sub_iterates.iter().enumerate().map(move |(j, subs)| {
            let first = subs.first().expect("pass records its initialization");
            let last = subs.last().expect("pass records its initialization");
            let lhs = last.distance_to(y).powi(2);
            let rhs = first.distance_to(y).powi(2)
                - 2.0 * alpha * (record.cluster_objectives[j] - f_at_y[j])
                + alpha * alpha * bounds.per_cluster[j] * bounds.per_cluster[j];
            rhs - lhs
        })
    });
    Ok(CheckSummary::from_margins("cluster_descent", margins))
}

/// Drift bound: within one pass, the i-th sub-iterate stays within
/// `alpha_k * (C_{1,j} + ... + C_{i,j})` of the pass's starting point.
pub fn check_drift_bound(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
) -> Result<CheckSummary> {
    require_clusters(problem, trajectory)?;
    let margins = trajectory.iterations.iter().flat_map(|record| {
        let alpha = record.alpha;
        record
            .sub_iterates
            .iter()
            .enumerate()
            .flat_map(move |(j, subs)| {
                let first = subs[0].clone();
                let steps = &bounds.per_step[j];
                let mut budget = 0.0;
                subs.iter()
                    .skip(1)
                    .zip(steps)
                    .map(move |(phi, c)| {
                        budget += c;
                        alpha * budget - phi.distance_to(&first)
                    })
                    .collect::<Vec<f64>>()
            })
    });
    Ok(CheckSummary::from_margins("sub_iterate_drift", margins))
}

/// Confirms the worst-case bounds dominate the subgradients the run actually
/// used: the subgradient evaluated at `phi_{i-1}` must have norm at most
/// `C_{i,j}`.
pub fn check_bound_domination(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
) -> Result<CheckSummary> {
    require_clusters(problem, trajectory)?;
    let margins = trajectory.iterations.iter().flat_map(|record| {
        record
            .sub_iterates
            .iter()
            .enumerate()
            .flat_map(move |(j, subs)| {
                let path = &problem.network.paths[j];
                let steps = &bounds.per_step[j];
                path.iter()
                    .enumerate()
                    .map(move |(i, &node)| {
                        let g = subgradient(&problem.data[node], &subs[i]);
                        steps[i] - g.norm()
                    })
                    .collect::<Vec<f64>>()
            })
    });
    Ok(CheckSummary::from_margins("subgradient_bound", margins))
}

/// The fixed-step asymptotic objective level: `f(theta*) + alpha/2 * sum_j C_j^2`.
/// With step size `alpha` held constant, the total objective along the run
/// dips below this level infinitely often.
pub fn error_floor(problem: &ProblemInstance, alpha: f64, bounds: &BoundSet) -> f64 {
    let (_, f_star) = problem.reference_optimum();
    f_star + 0.5 * alpha * bounds.sum_squares
}

/// Empirical stand-in for the liminf of the total objective: the minimum
/// over the trailing `tail_fraction` of recorded iterations.
pub fn empirical_liminf(trajectory: &TrajectoryRecord, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let total = trajectory.num_iterations();
    if total == 0 {
        return Err(Error::InvalidArgument("trajectory has no iterations".into()));
    }
    let tail = ((tail_fraction * total as f64).ceil() as usize).clamp(1, total);
    Ok(trajectory.iterations[total - tail..]
        .iter()
        .map(|r| r.total_objective)
        .fold(f64::INFINITY, f64::min))
}

/// Runs every check that applies to the trajectory's algorithm, using the
/// reference optimum as the comparison point. The centralized reference has
/// no per-cluster structure, so its report is empty (and passes).
pub fn analyze_trajectory(
    problem: &ProblemInstance,
    trajectory: &TrajectoryRecord,
    bounds: &BoundSet,
) -> Result<AnalysisReport> {
    let (theta_star, _) = problem.reference_optimum();
    let mut checks = Vec::new();
    match trajectory.algorithm {
        Algorithm::Spiral => {
            checks.push(check_descent_inequality(problem, trajectory, bounds, &theta_star)?);
            checks.push(check_cluster_descent(problem, trajectory, bounds, &theta_star)?);
            checks.push(check_drift_bound(problem, trajectory, bounds)?);
            checks.push(check_bound_domination(problem, trajectory, bounds)?);
        }
        Algorithm::InCluster => {
            checks.push(check_cluster_descent(problem, trajectory, bounds, &theta_star)?);
            checks.push(check_drift_bound(problem, trajectory, bounds)?);
            checks.push(check_bound_domination(problem, trajectory, bounds)?);
        }
        Algorithm::Centralized => {}
    }
    Ok(AnalysisReport {
        algorithm: trajectory.algorithm,
        checks,
    })
}
