//! Verifies a live run against the inequalities that guarantee convergence:
//! worst-case subgradient bounds, the per-cluster pass inequality, the
//! network-wide descent inequality, and the sub-iterate drift budget.

use spiralnet::{analyze_trajectory, compute_bounds, descent_terms, run, ExperimentConfig};

fn main() -> spiralnet::Result<()> {
    let config = ExperimentConfig {
        n: 32,
        n_clusters: 4,
        iterations: 200,
        ..ExperimentConfig::default()
    };
    let problem = config.build_problem()?;
    let bounds = compute_bounds(&problem)?;

    println!("worst-case subgradient norms over the box [{}, {}]:", config.theta_min, config.theta_max);
    for (j, c) in bounds.per_cluster.iter().enumerate() {
        let steps: Vec<String> = bounds.per_step[j].iter().map(|s| format!("{s:.0}")).collect();
        println!("  cluster {j}: C_j = {c:.1}  (per node: {})", steps.join(", "));
    }
    println!("  sum of squares (the descent inequality's slack term): {:.3e}\n", bounds.sum_squares);

    let trajectory = run(
        &problem,
        config.algorithm,
        &config.schedule()?,
        config.iterations,
        &config.initial_estimate()?,
        &config.meter(),
    )?;
    let report = analyze_trajectory(&problem, &trajectory, &bounds)?;

    println!(
        "{:<18} {:>10} {:>10} {:>14}  verdict",
        "check", "sites", "violations", "worst margin"
    );
    for check in &report.checks {
        println!(
            "{:<18} {:>10} {:>10} {:>14.3e}  {}",
            check.name,
            check.evaluated,
            check.violations,
            check.worst_margin.unwrap_or(f64::NAN),
            if check.pass { "ok" } else { "VIOLATED" }
        );
    }
    println!(
        "\nall inequalities hold on this run: {}",
        report.all_passed()
    );
    println!(
        "(margins are slack: how far each inequality was from binding at its\n\
         tightest site; the bounds are worst-case, so margins stay wide)\n"
    );

    // The network-wide inequality iteration by iteration: both sides shrink
    // as the estimates settle, and the left side never overtakes the right.
    let (theta_star, _) = problem.reference_optimum();
    let terms = descent_terms(&problem, &trajectory, &bounds, &theta_star)?;
    println!("network descent inequality at y = theta*, selected iterations:");
    println!("{:>5} {:>14} {:>14} {:>12}", "k", "lhs", "rhs", "margin");
    for term in terms.iter().filter(|t| t.k == 1 || t.k % 40 == 0) {
        println!(
            "{:5} {:14.6e} {:14.6e} {:12.3e}",
            term.k,
            term.lhs,
            term.rhs,
            term.margin()
        );
    }
    Ok(())
}
