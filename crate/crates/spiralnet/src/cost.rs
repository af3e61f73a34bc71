//! Bit-meter transport-cost accounting.
//!
//! One bit carried over one meter costs one bit-meter. Estimates are
//! `bits_per_scalar * d` bits; raw observations are `bits_per_scalar` bits
//! each. Per iteration, both distributed algorithms pay the same in-cluster
//! price (the estimate forwarded hop to hop along the path, plus one return
//! message from the path's last node back to the head); they differ only in
//! what leaves the cluster. The ring exchange sends each head's estimate to
//! the previous cluster's head, while the fusion baseline sends it to the
//! fusion center and back. The centralized scheme pays once: every node ships
//! its `m` observations straight to the fusion center.

use serde::{Deserialize, Serialize};

use crate::optimizer::Algorithm;
use crate::topology::{distance, NetworkInstance, NodePosition};

/// Transport cost split by category, in bit-meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub intra_cluster_bm: f64,
    pub inter_cluster_bm: f64,
    pub to_fusion_bm: f64,
    pub total_bm: f64,
    pub message_count: u64,
}

impl CostLedger {
    pub fn accumulate(&mut self, delta: &CostLedger) {
        self.intra_cluster_bm += delta.intra_cluster_bm;
        self.inter_cluster_bm += delta.inter_cluster_bm;
        self.to_fusion_bm += delta.to_fusion_bm;
        self.total_bm += delta.total_bm;
        self.message_count += delta.message_count;
    }
}

/// Meters one algorithm's traffic over a fixed deployment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportMeter {
    pub bits_per_scalar: u32,
    /// Estimate dimension.
    pub d: usize,
    pub fusion_position: NodePosition,
    /// Observations per node, used by the centralized one-shot upload.
    pub observations_per_node: usize,
}

impl TransportMeter {
    pub fn new(
        bits_per_scalar: u32,
        d: usize,
        fusion_position: NodePosition,
        observations_per_node: usize,
    ) -> Self {
        Self {
            bits_per_scalar,
            d,
            fusion_position,
            observations_per_node,
        }
    }

    fn estimate_bits(&self) -> f64 {
        (self.bits_per_scalar as usize * self.d) as f64
    }

    /// Cost of one iteration of the given algorithm. For the centralized
    /// scheme this is the one-shot observation upload, paid a single time no
    /// matter how many descent iterations follow.
    pub fn iteration_ledger(&self, network: &NetworkInstance, algorithm: Algorithm) -> CostLedger {
        let mut ledger = CostLedger::default();
        let bits = self.estimate_bits();
        match algorithm {
            Algorithm::Spiral | Algorithm::InCluster => {
                for path in &network.paths {
                    for pair in path.windows(2) {
                        ledger.intra_cluster_bm +=
                            bits * distance(network.positions[pair[0]], network.positions[pair[1]]);
                        ledger.message_count += 1;
                    }
                    if path.len() > 1 {
                        // Final sub-iterate travels back to the head.
                        let last = *path.last().expect("non-empty path");
                        ledger.intra_cluster_bm +=
                            bits * distance(network.positions[last], network.positions[path[0]]);
                        ledger.message_count += 1;
                    }
                }
                match algorithm {
                    Algorithm::Spiral => {
                        // Head j+1 hands its final estimate to head j.
                        let n_c = network.n_clusters;
                        for j in 0..n_c {
                            let from = network.heads[(j + 1) % n_c];
                            let to = network.heads[j];
                            ledger.inter_cluster_bm +=
                                bits * distance(network.positions[from], network.positions[to]);
                            ledger.message_count += 1;
                        }
                    }
                    Algorithm::InCluster => {
                        // Up to the fusion center and back down.
                        for &head in &network.heads {
                            ledger.to_fusion_bm += 2.0
                                * bits
                                * distance(network.positions[head], self.fusion_position);
                            ledger.message_count += 2;
                        }
                    }
                    Algorithm::Centralized => unreachable!(),
                }
            }
            Algorithm::Centralized => {
                let obs_bits = (self.bits_per_scalar as usize * self.observations_per_node) as f64;
                for position in &network.positions {
                    ledger.to_fusion_bm += obs_bits * distance(*position, self.fusion_position);
                    ledger.message_count += 1;
                }
            }
        }
        ledger.total_bm =
            ledger.intra_cluster_bm + ledger.inter_cluster_bm + ledger.to_fusion_bm;
        ledger
    }

    /// Total ledger for a whole run: `iterations` repeats for the distributed
    /// algorithms, the single upload for the centralized one.
    pub fn run_ledger(
        &self,
        network: &NetworkInstance,
        algorithm: Algorithm,
        iterations: usize,
    ) -> CostLedger {
        let delta = self.iteration_ledger(network, algorithm);
        match algorithm {
            Algorithm::Centralized => delta,
            _ => {
                let mut total = CostLedger::default();
                for _ in 0..iterations {
                    total.accumulate(&delta);
                }
                total
            }
        }
    }
}

/// One averaged row of a scaling sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub n_clusters: usize,
    pub algorithm: Algorithm,
    pub mean_intra_bm: f64,
    pub mean_inter_bm: f64,
    pub mean_to_fusion_bm: f64,
    pub mean_total_bm: f64,
}

/// Transport cost versus cluster count at fixed cluster size, averaged over
/// seeds, with fitted log-log growth exponents for the two components that
/// distinguish the algorithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub cluster_size: usize,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    pub rows: Vec<ScalingRow>,
    /// Growth exponent of the ring-exchange component vs n_clusters.
    pub spiral_inter_slope: Option<f64>,
    /// Growth exponent of the head-to-fusion component vs n_clusters.
    pub incluster_to_fusion_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`. `None` when fewer than two
/// distinct positive x values survive.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Meters all three algorithms over `n_clusters in nc_list` deployments with
/// `cluster_size` nodes per cluster, averaging each component over the seeds.
/// Costs are geometry only, so no optimization runs are needed.
pub fn scaling_study(
    meter: &TransportMeter,
    cluster_size: usize,
    nc_list: &[usize],
    seeds: &[u64],
    iterations: usize,
) -> crate::error::Result<ScalingTable> {
    use crate::error::Error;
    if nc_list.is_empty() || seeds.is_empty() || cluster_size == 0 || iterations == 0 {
        return Err(Error::InvalidArgument(
            "scaling study needs cluster sizes, seeds, and a positive iteration count".into(),
        ));
    }
    let algorithms = [Algorithm::Spiral, Algorithm::InCluster, Algorithm::Centralized];
    let mut rows = Vec::new();
    for &n_clusters in nc_list {
        let n = n_clusters * cluster_size;
        let mut sums = [CostLedger::default(); 3];
        for &seed in seeds {
            let network = NetworkInstance::generate(n, n_clusters, seed)?;
            for (slot, &algorithm) in algorithms.iter().enumerate() {
                sums[slot].accumulate(&meter.run_ledger(&network, algorithm, iterations));
            }
        }
        let count = seeds.len() as f64;
        for (slot, &algorithm) in algorithms.iter().enumerate() {
            rows.push(ScalingRow {
                n,
                n_clusters,
                algorithm,
                mean_intra_bm: sums[slot].intra_cluster_bm / count,
                mean_inter_bm: sums[slot].inter_cluster_bm / count,
                mean_to_fusion_bm: sums[slot].to_fusion_bm / count,
                mean_total_bm: sums[slot].total_bm / count,
            });
        }
    }

    let component = |algorithm: Algorithm, pick: fn(&ScalingRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.algorithm == algorithm)
            .map(|r| (r.n_clusters as f64, pick(r)))
            .collect()
    };
    let spiral_inter_slope = log_log_slope(&component(Algorithm::Spiral, |r| r.mean_inter_bm));
    let incluster_to_fusion_slope =
        log_log_slope(&component(Algorithm::InCluster, |r| r.mean_to_fusion_bm));

    Ok(ScalingTable {
        cluster_size,
        iterations,
        seeds: seeds.to_vec(),
        rows,
        spiral_inter_slope,
        incluster_to_fusion_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::topology::NodePosition;

    fn meter() -> TransportMeter {
        TransportMeter::new(32, 1, NodePosition::new(0.5, 0.5), 10)
    }

    /// Two singleton clusters with heads 0.5 m apart.
    fn two_head_network() -> NetworkInstance {
        NetworkInstance {
            n: 2,
            n_clusters: 2,
            cluster_size: 1,
            positions: vec![NodePosition::new(0.2, 0.5), NodePosition::new(0.7, 0.5)],
            cluster_of: vec![0, 1],
            heads: vec![0, 1],
            paths: vec![vec![0], vec![1]],
        }
    }

    #[test]
    fn ring_leg_is_bits_times_distance() {
        // 32 bits over 0.5 m = 16 bit-meters per leg, two legs in the ring.
        let ledger = meter().iteration_ledger(&two_head_network(), Algorithm::Spiral);
        assert_relative_eq!(ledger.inter_cluster_bm, 32.0, max_relative = 1e-12);
        assert_eq!(ledger.intra_cluster_bm, 0.0);
        assert_eq!(ledger.to_fusion_bm, 0.0);
        assert_eq!(ledger.message_count, 2);
    }

    #[test]
    fn colocated_nodes_cost_nothing() {
        let mut network = two_head_network();
        let p = NodePosition::new(0.5, 0.5);
        network.positions = vec![p, p];
        for algorithm in [Algorithm::Spiral, Algorithm::InCluster, Algorithm::Centralized] {
            let ledger = meter().iteration_ledger(&network, algorithm);
            assert_eq!(ledger.total_bm, 0.0);
        }
    }

    #[test]
    fn spiral_has_no_fusion_traffic_and_incluster_no_ring_traffic() {
        let network = NetworkInstance::generate(64, 8, 1).unwrap();
        let spiral = meter().iteration_ledger(&network, Algorithm::Spiral);
        let incluster = meter().iteration_ledger(&network, Algorithm::InCluster);
        assert_eq!(spiral.to_fusion_bm, 0.0);
        assert_eq!(incluster.inter_cluster_bm, 0.0);
        // Identical passes mean identical in-cluster traffic, bit for bit.
        assert_eq!(spiral.intra_cluster_bm, incluster.intra_cluster_bm);
    }

    #[test]
    fn default_instance_spiral_beats_incluster() {
        let network = NetworkInstance::generate(64, 8, 1).unwrap();
        let spiral = meter().iteration_ledger(&network, Algorithm::Spiral);
        let incluster = meter().iteration_ledger(&network, Algorithm::InCluster);
        assert!(spiral.total_bm < incluster.total_bm);
    }

    #[test]
    fn run_ledger_adds_up() {
        let network = NetworkInstance::generate(16, 4, 3).unwrap();
        let delta = meter().iteration_ledger(&network, Algorithm::Spiral);
        let total = meter().run_ledger(&network, Algorithm::Spiral, 10);
        let mut acc = CostLedger::default();
        for _ in 0..10 {
            acc.accumulate(&delta);
        }
        assert_eq!(total, acc);
        assert_relative_eq!(
            total.total_bm,
            total.intra_cluster_bm + total.inter_cluster_bm + total.to_fusion_bm,
            max_relative = 1e-12
        );
    }

    #[test]
    fn centralized_pays_once() {
        let network = NetworkInstance::generate(16, 4, 3).unwrap();
        let once = meter().run_ledger(&network, Algorithm::Centralized, 1);
        let many = meter().run_ledger(&network, Algorithm::Centralized, 500);
        assert_eq!(once, many);
    }

    #[test]
    fn degenerate_sweep_has_one_row_per_algorithm() {
        let table = scaling_study(&meter(), 4, &[4], &[1, 2], 10).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.spiral_inter_slope.is_none());
    }

    #[test]
    fn log_log_slope_recovers_power_law() {
        let points: Vec<(f64, f64)> = [4.0, 16.0, 64.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powf(0.5)))
            .collect();
        let slope = log_log_slope(&points).unwrap();
        assert_relative_eq!(slope, 0.5, max_relative = 1e-12);
    }
}
