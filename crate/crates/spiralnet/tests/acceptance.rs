//! End-to-end acceptance gate. Each test covers one promised property at its
//! stated tolerance and prints a single `[PASS]`/`[FAIL]` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spiralnet::{
    check_cluster_descent, check_descent_inequality, check_drift_bound, compute_bounds,
    empirical_liminf, error_floor, run, run_experiment, scaling_study, Algorithm,
    ExperimentConfig, Estimate, ProblemInstance, StepKind, TrajectoryRecord,
};

const ACCURACY_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;

fn report(name: &str, pass: bool, details: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{verdict}] {name}: {details}");
    assert!(pass, "{name}: {details}");
}

fn default_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    }
}

fn fixed_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        step_kind: StepKind::Fixed,
        iterations: 2000,
        ..ExperimentConfig::default()
    }
}

/// Builds the problem and runs the algorithm in memory, without artifacts.
fn run_in_memory(config: &ExperimentConfig) -> (ProblemInstance, TrajectoryRecord) {
    let problem = config.build_problem().expect("problem builds");
    let trajectory = run(
        &problem,
        config.algorithm,
        &config.schedule().expect("valid schedule"),
        config.iterations,
        &config.initial_estimate().expect("valid box"),
        &config.meter(),
    )
    .expect("run succeeds");
    (problem, trajectory)
}

#[test]
fn spiral_matches_fusion_baseline_accuracy() {
    let mut worst_gap: f64 = 0.0;
    for seed in ACCURACY_SEEDS {
        let (_, spiral) = run_in_memory(&default_config(seed));
        let mut incluster_config = default_config(seed);
        incluster_config.algorithm = Algorithm::InCluster;
        let (_, incluster) = run_in_memory(&incluster_config);
        let gap = (spiral.final_total_objective - incluster.final_total_objective).abs()
            / incluster.final_total_objective;
        worst_gap = worst_gap.max(gap);
    }
    report(
        "accuracy parity with the fusion baseline",
        worst_gap <= 0.10,
        &format!("max relative final-objective gap {worst_gap:.3e} over 20 seeds (limit 0.1)"),
    );
}

#[test]
fn estimates_contract_toward_the_optimum() {
    let mut worst_ratio: f64 = 0.0;
    for seed in ACCURACY_SEEDS {
        let (problem, trajectory) = run_in_memory(&default_config(seed));
        let (theta_star, _) = problem.reference_optimum();
        let mean_distance = |thetas: &[Estimate]| -> f64 {
            thetas.iter().map(|t| t.distance_to(&theta_star)).sum::<f64>() / thetas.len() as f64
        };
        let initial = mean_distance(&trajectory.iterations[0].thetas);
        let final_ = mean_distance(&trajectory.final_thetas);
        worst_ratio = worst_ratio.max(final_ / initial);
    }
    report(
        "diminishing-step contraction",
        worst_ratio <= 0.1,
        &format!(
            "max (final / initial) mean distance to optimum {worst_ratio:.3e} over 20 seeds (limit 0.1)"
        ),
    );
}

#[test]
fn fixed_step_objective_dips_below_the_floor() {
    let mut worst_margin = f64::INFINITY;
    let mut pass = true;
    for seed in ACCURACY_SEEDS {
        let config = fixed_config(seed);
        let (problem, trajectory) = run_in_memory(&config);
        let bounds = compute_bounds(&problem).expect("bounded box");
        let floor = error_floor(&problem, config.alpha0, &bounds);
        let liminf = empirical_liminf(&trajectory, 0.5).expect("valid tail");
        let margin = floor - liminf;
        worst_margin = worst_margin.min(margin);
        pass &= liminf <= floor;
    }
    report(
        "fixed-step error floor",
        pass,
        &format!(
            "tail-min objective stayed below the floor on all 20 seeds; smallest margin {worst_margin:.3e}"
        ),
    );
}

#[test]
fn network_descent_inequality_holds_everywhere() {
    let mut evaluated = 0usize;
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    for seed in ACCURACY_SEEDS {
        for config in [default_config(seed), fixed_config(seed)] {
            let (problem, trajectory) = run_in_memory(&config);
            let bounds = compute_bounds(&problem).expect("bounded box");
            let (theta_star, _) = problem.reference_optimum();
            let mut targets = vec![theta_star];
            let mut rng = ChaCha8Rng::seed_from_u64(0xD15C0 + seed);
            for _ in 0..10 {
                targets.push(Estimate::scalar(rng.random_range(-100.0..=100.0)));
            }
            for y in &targets {
                let summary = check_descent_inequality(&problem, &trajectory, &bounds, y)
                    .expect("check applies");
                evaluated += summary.evaluated;
                violations += summary.violations;
                worst_margin = worst_margin.min(summary.worst_margin.expect("non-empty run"));
            }
        }
    }
    report(
        "network descent inequality",
        violations == 0,
        &format!(
            "{violations} violations over {evaluated} iteration checks (11 comparison points, 40 runs); worst margin {worst_margin:.3e}"
        ),
    );
}

#[test]
fn sub_iterate_drift_stays_within_budget() {
    let mut evaluated = 0usize;
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut configs = Vec::new();
    for seed in ACCURACY_SEEDS {
        configs.push(default_config(seed));
        let mut incluster = default_config(seed);
        incluster.algorithm = Algorithm::InCluster;
        configs.push(incluster);
        configs.push(fixed_config(seed));
    }
    for config in configs {
        let (problem, trajectory) = run_in_memory(&config);
        let bounds = compute_bounds(&problem).expect("bounded box");
        let summary = check_drift_bound(&problem, &trajectory, &bounds).expect("check applies");
        evaluated += summary.evaluated;
        violations += summary.violations;
        worst_margin = worst_margin.min(summary.worst_margin.expect("non-empty run"));
    }
    report(
        "sub-iterate drift bound",
        violations == 0,
        &format!(
            "{violations} violations over {evaluated} recorded sub-iterates (60 runs); worst margin {worst_margin:.3e}"
        ),
    );
}

#[test]
fn per_cluster_descent_inequality_holds_everywhere() {
    let mut evaluated = 0usize;
    let mut violations = 0usize;
    for seed in ACCURACY_SEEDS {
        for config in [default_config(seed), fixed_config(seed)] {
            let (problem, trajectory) = run_in_memory(&config);
            let bounds = compute_bounds(&problem).expect("bounded box");
            let (theta_star, _) = problem.reference_optimum();
            let summary = check_cluster_descent(&problem, &trajectory, &bounds, &theta_star)
                .expect("check applies");
            evaluated += summary.evaluated;
            violations += summary.violations;
        }
    }
    report(
        "per-cluster descent inequality",
        violations == 0,
        &format!("{violations} violations over {evaluated} cluster passes (40 runs)"),
    );
}

#[test]
fn ring_exchange_is_cheaper_than_fusion_on_the_default_instance() {
    let config = default_config(1);
    let problem = config.build_problem().expect("problem builds");
    let meter = config.meter();
    let spiral = meter.run_ledger(&problem.network, Algorithm::Spiral, config.iterations);
    let incluster = meter.run_ledger(&problem.network, Algorithm::InCluster, config.iterations);
    let ordered = spiral.total_bm < incluster.total_bm;
    let intra_equal = spiral.intra_cluster_bm == incluster.intra_cluster_bm;
    report(
        "transport-cost ordering",
        ordered && intra_equal,
        &format!(
            "spiral {:.1} < fusion {:.1} bit-meters, intra components bit-equal: {intra_equal}",
            spiral.total_bm, incluster.total_bm
        ),
    );
}

#[test]
fn transport_scaling_exponents_match_the_topology() {
    let config = default_config(1);
    let seeds: Vec<u64> = (1..=10).collect();
    let table = scaling_study(&config.meter(), 8, &[4, 16, 64], &seeds, config.iterations)
        .expect("study runs");

    // Fit the exponents here as an independent oracle on the table's rows.
    let fit = |algorithm: Algorithm, pick: fn(f64, f64, f64) -> f64| -> f64 {
        let logs: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .map(|r| {
                let y = pick(r.mean_intra_bm, r.mean_inter_bm, r.mean_to_fusion_bm);
                ((r.n_clusters as f64).ln(), y.ln())
            })
            .collect();
        let n = logs.len() as f64;
        let mx: f64 = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my: f64 = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        sxy / sxx
    };
    let ring_slope = fit(Algorithm::Spiral, |_, inter, _| inter);
    let fusion_slope = fit(Algorithm::InCluster, |_, _, to_fusion| to_fusion);

    // The oracle fit and the library fit must agree exactly in method.
    let lib_ring = table.spiral_inter_slope.expect("three points");
    let lib_fusion = table.incluster_to_fusion_slope.expect("three points");
    let fits_agree = (ring_slope - lib_ring).abs() < 1e-9 && (fusion_slope - lib_fusion).abs() < 1e-9;

    let ring_ok = (ring_slope - 0.5).abs() <= 0.15;
    let fusion_ok = (fusion_slope - 1.0).abs() <= 0.15;
    report(
        "transport-cost scaling exponents",
        ring_ok && fusion_ok && fits_agree,
        &format!(
            "ring-exchange slope {ring_slope:.3} (want 0.5 +/- 0.15), to-fusion slope {fusion_slope:.3} (want 1.0 +/- 0.15)"
        ),
    );
}

#[test]
fn engine_matches_a_straight_line_replay() {
    // Small instance, modest horizon; the replay below re-implements the
    // whole iteration (pass, clamp, ring exchange) with bare loops and no
    // calls into the optimizer.
    let config = ExperimentConfig {
        n: 4,
        n_clusters: 2,
        iterations: 50,
        ..ExperimentConfig::default()
    };
    let (problem, trajectory) = run_in_memory(&config);

    let lo = problem.feasible.lower[0];
    let hi = problem.feasible.upper[0];
    let clamp = |v: f64| if v < lo { lo } else if v > hi { hi } else { v };
    let mut theta = [0.0f64; 2];
    let mut worst_gap: f64 = 0.0;
    for k in 1..=config.iterations {
        // Engine state at the start of iteration k.
        for (j, recorded) in trajectory.iterations[k - 1].thetas.iter().enumerate() {
            worst_gap = worst_gap.max((recorded.value[0] - theta[j]).abs());
        }
        let alpha = 0.007 / k as f64;
        let mut finals = [0.0f64; 2];
        for j in 0..2 {
            let mut phi = theta[j];
            for &node in &problem.network.paths[j] {
                let mut g = 0.0;
                for &x in &problem.data[node].observations {
                    g += 2.0 * (phi - x);
                }
                phi = clamp(phi - alpha * g);
            }
            finals[j] = phi;
        }
        for j in 0..2 {
            theta[j] = clamp((finals[j] + finals[(j + 1) % 2]) / 2.0);
        }
    }
    for (j, recorded) in trajectory.final_thetas.iter().enumerate() {
        worst_gap = worst_gap.max((recorded.value[0] - theta[j]).abs());
    }
    report(
        "independent replay equivalence",
        worst_gap <= 1e-12,
        &format!("max |engine - replay| {worst_gap:.3e} over 50 iterations (limit 1e-12)"),
    );
}

#[test]
fn subgradients_match_finite_differences() {
    let config = default_config(1);
    let problem = config.build_problem().expect("problem builds");
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1D);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let node = rng.random_range(0..problem.network.n);
        let theta = rng.random_range(-100.0..=100.0);
        let g = spiralnet::subgradient(&problem.data[node], &Estimate::scalar(theta)).value[0];
        let h = 1e-5 * theta.abs().max(1.0);
        let plus = spiralnet::local_cost(&problem.data[node], &Estimate::scalar(theta + h));
        let minus = spiralnet::local_cost(&problem.data[node], &Estimate::scalar(theta - h));
        let fd = (plus - minus) / (2.0 * h);
        worst_rel = worst_rel.max((g - fd).abs() / g.abs().max(1.0));
    }
    report(
        "subgradient versus finite differences",
        worst_rel < 1e-6,
        &format!("max relative error {worst_rel:.3e} over 100 random points (limit 1e-6)"),
    );
}

#[test]
fn identical_configs_reproduce_byte_identical_artifacts() {
    let dir = tempfile::TempDir::new().expect("temp dir");
    let config = ExperimentConfig {
        n: 32,
        n_clusters: 4,
        iterations: 120,
        out_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let first = run_experiment(&config).expect("first run");
    let first_bytes = std::fs::read(&first.trajectory_path).expect("csv written");
    let second = run_experiment(&config).expect("second run");
    let second_bytes = std::fs::read(&second.trajectory_path).expect("csv written");
    report(
        "byte-identical reproduction",
        first_bytes == second_bytes,
        &format!(
            "two runs of one config wrote identical {}-byte trajectory files",
            first_bytes.len()
        ),
    );
}
