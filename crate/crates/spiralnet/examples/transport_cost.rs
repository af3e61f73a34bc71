//! How communication cost scales as the network grows. Cluster size stays
//! fixed at 8 nodes while the number of clusters quadruples twice; deployment
//! area is the same unit square throughout, so everything gets denser.
//!
//! The component to watch is the per-iteration long-range traffic: ring
//! exchange legs shrink as clusters pack closer (total grows ~ sqrt of the
//! cluster count), while fusion-center uplinks stay long (total grows ~
//! linearly in the cluster count). That gap is the case for eliminating the
//! fusion center.

use spiralnet::{scaling_study, Algorithm, ExperimentConfig};

fn main() -> spiralnet::Result<()> {
    let config = ExperimentConfig::default();
    let seeds: Vec<u64> = (1..=10).collect();
    let table = scaling_study(&config.meter(), 8, &[4, 16, 64], &seeds, config.iterations)?;

    println!(
        "cluster size {} fixed, {} iterations, mean over {} seeds\n",
        table.cluster_size,
        table.iterations,
        table.seeds.len()
    );
    println!(
        "{:>6} {:>6}  {:<12} {:>14} {:>14} {:>14} {:>14}",
        "n_C", "n", "algorithm", "intra", "inter (ring)", "to fusion", "total"
    );
    for row in &table.rows {
        println!(
            "{:>6} {:>6}  {:<12} {:>14.1} {:>14.1} {:>14.1} {:>14.1}",
            row.n_clusters,
            row.n,
            row.algorithm.to_string(),
            row.mean_intra_bm,
            row.mean_inter_bm,
            row.mean_to_fusion_bm,
            row.mean_total_bm
        );
    }

    println!("\nfitted growth exponents vs n_C (log-log least squares):");
    if let Some(slope) = table.spiral_inter_slope {
        println!("  ring exchange:   {slope:.3}   (sub-linear: legs shrink as density rises)");
    }
    if let Some(slope) = table.incluster_to_fusion_slope {
        println!("  fusion uplinks:  {slope:.3}   (linear: every new cluster pays full distance)");
    }

    let total_at = |n_clusters: usize, algorithm: Algorithm| -> f64 {
        table
            .rows
            .iter()
            .find(|r| r.n_clusters == n_clusters && r.algorithm == algorithm)
            .map(|r| r.mean_total_bm)
            .unwrap_or(f64::NAN)
    };
    println!(
        "\nat n_C = 64 the ring saves {:.1}% of the fusion baseline's total traffic",
        100.0 * (1.0 - total_at(64, Algorithm::Spiral) / total_at(64, Algorithm::InCluster))
    );
    Ok(())
}
