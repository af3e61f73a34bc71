//! One complete spiral run on the default instance: 64 nodes in 8 clusters,
//! each holding 10 noisy observations of the true parameter 10.0. Prints the
//! objective every 50 iterations and the final accuracy per cluster.

use spiralnet::{run, ExperimentConfig};

fn main() -> spiralnet::Result<()> {
    let config = ExperimentConfig::default();
    let problem = config.build_problem()?;
    let (theta_star, f_star) = problem.reference_optimum();
    println!(
        "estimating true_theta = {} from {} nodes x {} observations (noise sd {})",
        config.true_theta, config.n, config.m, config.noise_std
    );
    println!(
        "box-constrained optimum theta* = {:.6}, f(theta*) = {:.4}\n",
        theta_star.value[0],
        f_star
    );

    let trajectory = run(
        &problem,
        config.algorithm,
        &config.schedule()?,
        config.iterations,
        &config.initial_estimate()?,
        &config.meter(),
    )?;

    println!("{:>5} {:>16} {:>14}", "k", "total objective", "excess over f*");
    for record in &trajectory.iterations {
        if record.k == 1 || record.k % 50 == 0 {
            println!(
                "{:5} {:16.4} {:14.6}",
                record.k,
                record.total_objective,
                record.total_objective - f_star
            );
        }
    }
    println!(
        "{:>5} {:16.4} {:14.6}  (after the final exchange)\n",
        "end",
        trajectory.final_total_objective,
        trajectory.final_total_objective - f_star
    );

    println!("final cluster estimates:");
    for (j, theta) in trajectory.final_thetas.iter().enumerate() {
        println!(
            "  cluster {j}: {:.6}  (|error| = {:.2e})",
            theta.value[0],
            (theta.value[0] - theta_star.value[0]).abs()
        );
    }
    Ok(())
}
