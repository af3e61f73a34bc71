//! The convex estimation problem solved by the network.
//!
//! Every node holds private scalar observations and a local least-squares
//! cost; the network minimizes the summed cost over a box feasible set. The
//! concrete model is scalar mean estimation: observations are
//! `true_theta + Gaussian noise`, the local cost is the sum of squared
//! residuals, and the global optimum has a closed form (the clamped mean of
//! all observations), which gives every solver an exact reference.
//!
//! The estimate type is a `d`-dimensional vector so a richer model can slot
//! in later; the default experiments use `d = 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NetworkInstance;

/// The decision variable: a point in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Vec<f64>,
}

impl Estimate {
    pub fn new(value: Vec<f64>) -> Self {
        Self { value }
    }

    /// One-dimensional estimate, the default model.
    pub fn scalar(v: f64) -> Self {
        Self { value: vec![v] }
    }

    pub fn zeros(d: usize) -> Self {
        Self { value: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn norm(&self) -> f64 {
        self.value.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &Estimate) -> Estimate {
        debug_assert_eq!(self.dim(), other.dim());
        Estimate {
            value: self
                .value
                .iter()
                .zip(&other.value)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Estimate) -> Estimate {
        debug_assert_eq!(self.dim(), other.dim());
        Estimate {
            value: self
                .value
                .iter()
                .zip(&other.value)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Estimate {
        Estimate {
            value: self.value.iter().map(|v| v * s).collect(),
        }
    }

    /// Distance to another estimate.
    pub fn distance_to(&self, other: &Estimate) -> f64 {
        self.sub(other).norm()
    }
}

/// Axis-aligned box feasible set with a non-empty interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FeasibleSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(
                "feasible set bounds must be non-empty and of equal dimension".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !matches!(lo.partial_cmp(hi), Some(std::cmp::Ordering::Less)) {
                return Err(Error::InvalidArgument(format!(
                    "feasible set needs lower < upper in every coordinate, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[-half_width, half_width]^d`.
    pub fn symmetric(d: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; d], vec![half_width; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, theta: &Estimate) -> bool {
        theta.dim() == self.dim()
            && theta
                .value
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn center(&self) -> Estimate {
        Estimate {
            value: self
                .lower
                .iter()
                .zip(&self.upper)
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        }
    }

    /// Componentwise clamp onto the box. Idempotent; feasible points come
    /// back unchanged (bit for bit).
    pub fn project(&self, theta: &Estimate) -> Estimate {
        debug_assert_eq!(theta.dim(), self.dim());
        Estimate {
            value: theta
                .value
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                .collect(),
        }
    }
}

/// A node's private observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    pub observations: Vec<f64>,
}

impl NodeData {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidInstance(
                "a node needs at least one observation".into(),
            ));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(
                "observations must be finite".into(),
            ));
        }
        Ok(Self { observations })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.observations.len() as f64
    }
}

/// Draws `m` observations per node: `true_theta` plus Gaussian noise of the
/// given standard deviation. One seeded stream, nodes in index order.
pub fn generate_observations(
    network: &NetworkInstance,
    m: usize,
    true_theta: f64,
    noise_std: f64,
    seed: u64,
) -> Result<Vec<NodeData>> {
    if m == 0 {
        return Err(Error::InvalidSize(
            "need at least one observation per node".into(),
        ));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise_std must be finite and >= 0, got {noise_std}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(network.n);
    if noise_std == 0.0 {
        for _ in 0..network.n {
            data.push(NodeData {
                observations: vec![true_theta; m],
            });
        }
        return Ok(data);
    }
    let normal = Normal::new(0.0, noise_std)
        .map_err(|e| Error::InvalidArgument(format!("bad noise model: {e}")))?;
    for _ in 0..network.n {
        let observations = (0..m)
            .map(|_| true_theta + normal.sample(&mut rng))
            .collect();
        data.push(NodeData { observations });
    }
    Ok(data)
}

/// Local least-squares cost: sum over observations of the squared distance
/// between the estimate and the observation (replicated across coordinates
/// for d > 1).
pub fn local_cost(node: &NodeData, theta: &Estimate) -> f64 {
    node.observations
        .iter()
        .map(|x| theta.value.iter().map(|t| (t - x) * (t - x)).sum::<f64>())
        .sum()
}

/// Gradient of [`local_cost`]: `2 * sum_r (theta - x_r)`. The cost is
/// differentiable, so this is also its only subgradient.
pub fn subgradient(node: &NodeData, theta: &Estimate) -> Estimate {
    let m = node.observations.len() as f64;
    let sum: f64 = node.observations.iter().sum();
    Estimate {
        value: theta.value.iter().map(|t| 2.0 * (m * t - sum)).collect(),
    }
}

/// The full problem: a deployment plus per-node data and the feasible box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub network: NetworkInstance,
    pub data: Vec<NodeData>,
    pub feasible: FeasibleSet,
    pub d: usize,
}

impl ProblemInstance {
    pub fn new(
        network: NetworkInstance,
        data: Vec<NodeData>,
        feasible: FeasibleSet,
    ) -> Result<Self> {
        network.validate()?;
        if data.len() != network.n {
            return Err(Error::InvalidInstance(format!(
                "{} nodes but {} data records",
                network.n,
                data.len()
            )));
        }
        for (i, node) in data.iter().enumerate() {
            if node.observations.is_empty() {
                return Err(Error::InvalidInstance(format!("node {i} has no observations")));
            }
            if node.observations.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "node {i} has non-finite observations"
                )));
            }
        }
        let d = feasible.dim();
        Ok(Self {
            network,
            data,
            feasible,
            d,
        })
    }

    /// Cluster cost `f_j`: sum of the member nodes' local costs.
    pub fn cluster_cost(&self, cluster: usize, theta: &Estimate) -> f64 {
        self.network.paths[cluster]
            .iter()
            .map(|&i| local_cost(&self.data[i], theta))
            .sum()
    }

    /// Network-wide cost `f`: sum over all nodes.
    pub fn total_cost(&self, theta: &Estimate) -> f64 {
        self.data.iter().map(|node| local_cost(node, theta)).sum()
    }

    /// Gradient of the network-wide cost.
    pub fn total_gradient(&self, theta: &Estimate) -> Estimate {
        let mut g = Estimate::zeros(theta.dim());
        for node in &self.data {
            g = g.add(&subgradient(node, theta));
        }
        g
    }

    /// Closed-form constrained optimum: the mean of all observations clamped
    /// onto the box, and the total cost there.
    pub fn reference_optimum(&self) -> (Estimate, f64) {
        let mut sum = 0.0;
        let mut count = 0usize;
        for node in &self.data {
            sum += node.observations.iter().sum::<f64>();
            count += node.observations.len();
        }
        let mean = sum / count as f64;
        let theta_star = self
            .feasible
            .project(&Estimate::new(vec![mean; self.d]));
        let f_star = self.total_cost(&theta_star);
        (theta_star, f_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn node(observations: &[f64]) -> NodeData {
        NodeData::new(observations.to_vec()).unwrap()
    }

    #[test]
    fn observations_count_and_determinism() {
        let network = NetworkInstance::generate(4, 2, 11).unwrap();
        let a = generate_observations(&network, 10, 10.0, 1.0, 77).unwrap();
        let b = generate_observations(&network, 10, 10.0, 1.0, 77).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|n| n.len() == 10));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_noise_reproduces_true_theta_exactly() {
        let network = NetworkInstance::generate(3, 1, 0).unwrap();
        let data = generate_observations(&network, 5, 5.0, 0.0, 1).unwrap();
        for node in &data {
            assert!(node.observations.iter().all(|&x| x == 5.0));
        }
    }

    #[test]
    fn pooled_sample_mean_is_near_true_theta() {
        // 10 nodes x 1000 observations pooled; CLT keeps the mean within 0.05.
        let network = NetworkInstance::generate(10, 1, 2).unwrap();
        let data = generate_observations(&network, 1000, 0.0, 1.0, 5).unwrap();
        let sum: f64 = data.iter().flat_map(|n| &n.observations).sum();
        let mean = sum / 10_000.0;
        assert!(mean.abs() < 0.05, "pooled mean = {mean}");
    }

    #[test]
    fn local_cost_examples() {
        let theta = Estimate::scalar(2.0);
        assert_eq!(local_cost(&node(&[2.0, 2.0, 2.0]), &theta), 0.0);
        assert_eq!(local_cost(&node(&[1.0, 3.0]), &Estimate::scalar(0.0)), 10.0);
        assert_eq!(local_cost(&node(&[2.0]), &Estimate::scalar(5.0)), 9.0);
    }

    #[test]
    fn subgradient_examples() {
        // Stationary at the node mean.
        let n = node(&[1.0, 3.0]);
        let at_mean = subgradient(&n, &Estimate::scalar(2.0));
        assert_eq!(at_mean.value, vec![0.0]);
        assert_eq!(subgradient(&n, &Estimate::scalar(0.0)).value, vec![-8.0]);
        assert_eq!(subgradient(&node(&[0.0]), &Estimate::scalar(1.0)).value, vec![2.0]);
    }

    /// Central finite differences of [`local_cost`], the independent gradient
    /// oracle used throughout the tests.
    fn fd_gradient(n: &NodeData, theta: f64) -> f64 {
        let h = 1e-5 * theta.abs().max(1.0);
        (local_cost(n, &Estimate::scalar(theta + h)) - local_cost(n, &Estimate::scalar(theta - h)))
            / (2.0 * h)
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let obs: Vec<f64> = (0..10).map(|_| rng.random_range(-20.0..20.0)).collect();
            let n = node(&obs);
            let theta = rng.random_range(-100.0..100.0);
            let g = subgradient(&n, &Estimate::scalar(theta)).value[0];
            let fd = fd_gradient(&n, theta);
            let rel = (g - fd).abs() / g.abs().max(1.0);
            assert!(rel < 1e-6, "theta = {theta}: grad {g} vs fd {fd}");
        }
    }

    #[test]
    fn projection_identity_and_clamp() {
        let feasible = FeasibleSet::symmetric(1, 1.0).unwrap();
        let interior = Estimate::scalar(0.25);
        assert_eq!(feasible.project(&interior), interior);
        assert_eq!(feasible.project(&Estimate::scalar(10.0)).value, vec![1.0]);
        // Idempotent.
        let p = feasible.project(&Estimate::scalar(-7.0));
        assert_eq!(feasible.project(&p), p);
    }

    #[test]
    fn projection_is_non_expansive_toward_feasible_points() {
        let feasible = FeasibleSet::new(vec![-1.0, 0.0], vec![2.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let theta = Estimate::new(vec![
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            ]);
            let y = Estimate::new(vec![
                rng.random_range(-1.0..2.0),
                rng.random_range(0.0..3.0),
            ]);
            let projected = feasible.project(&theta);
            assert!(projected.distance_to(&y) <= theta.distance_to(&y) + 1e-12);
        }
    }

    #[test]
    fn feasible_set_rejects_empty_interior() {
        assert!(FeasibleSet::new(vec![1.0], vec![1.0]).is_err());
        assert!(FeasibleSet::new(vec![2.0], vec![1.0]).is_err());
    }

    fn tiny_problem(observations: Vec<Vec<f64>>, half_width: f64) -> ProblemInstance {
        let n = observations.len();
        let network = NetworkInstance::generate(n, 1, 13).unwrap();
        let data = observations
            .into_iter()
            .map(|o| NodeData::new(o).unwrap())
            .collect();
        ProblemInstance::new(network, data, FeasibleSet::symmetric(1, half_width).unwrap())
            .unwrap()
    }

    #[test]
    fn reference_optimum_perfect_consensus() {
        let problem = tiny_problem(vec![vec![3.0; 4], vec![3.0; 4]], 10.0);
        let (theta_star, f_star) = problem.reference_optimum();
        assert_eq!(theta_star.value, vec![3.0]);
        assert_eq!(f_star, 0.0);
    }

    #[test]
    fn reference_optimum_single_node() {
        let problem = tiny_problem(vec![vec![0.0, 2.0]], 10.0);
        let (theta_star, f_star) = problem.reference_optimum();
        assert_relative_eq!(theta_star.value[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(f_star, 2.0, max_relative = 1e-15);
    }

    /// Grid search over the box at the given resolution; the brute-force
    /// optimum oracle.
    fn grid_search_optimum(problem: &ProblemInstance, resolution: f64) -> (f64, f64) {
        let lo = problem.feasible.lower[0];
        let hi = problem.feasible.upper[0];
        let steps = ((hi - lo) / resolution).round() as usize;
        let mut best = (lo, f64::INFINITY);
        for s in 0..=steps {
            let theta = lo + s as f64 * resolution;
            let f = problem.total_cost(&Estimate::scalar(theta));
            if f < best.1 {
                best = (theta, f);
            }
        }
        best
    }

    #[test]
    fn reference_optimum_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let obs: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let problem = tiny_problem(obs, 2.0);
            let (theta_star, f_star) = problem.reference_optimum();
            let (grid_theta, grid_f) = grid_search_optimum(&problem, 1e-4);
            assert!((theta_star.value[0] - grid_theta).abs() < 1e-3);
            assert!((f_star - grid_f).abs() < 1e-3);
        }
    }

    #[test]
    fn reference_optimum_clamps_to_boundary() {
        // All observations above the box: the optimum sits on the upper face.
        let problem = tiny_problem(vec![vec![8.0, 9.0, 10.0]], 2.0);
        let (theta_star, _) = problem.reference_optimum();
        assert_eq!(theta_star.value, vec![2.0]);
        let (grid_theta, _) = grid_search_optimum(&problem, 1e-4);
        assert!((theta_star.value[0] - grid_theta).abs() < 1e-3);
    }

    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;

    proptest! {
        #[test]
        fn total_cost_is_convex(
            seed in 0u64..500,
            t1 in -50.0f64..50.0,
            t2 in -50.0f64..50.0,
            lambda in 0.0f64..1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obs: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let problem = tiny_problem(obs, 100.0);
            let a = Estimate::scalar(t1);
            let b = Estimate::scalar(t2);
            let mix = Estimate::scalar(lambda * t1 + (1.0 - lambda) * t2);
            let lhs = problem.total_cost(&mix);
            let rhs = lambda * problem.total_cost(&a) + (1.0 - lambda) * problem.total_cost(&b);
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }
}
