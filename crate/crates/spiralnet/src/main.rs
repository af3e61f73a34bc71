//! Thin command-line wrapper around the library's experiment drivers.
//!
//! Exit codes: 0 on success, 1 when a trajectory check finds violations,
//! 2 on configuration or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spiralnet::{
    check_trajectory, run_experiment, sweep_experiment, Algorithm, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "spiralnet", version, about = "Clustered-network distributed estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory, summary, and analysis files.
    Run {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's algorithm (spiral, incluster, centralized).
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's iteration count.
        #[arg(long)]
        iters: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Meter transport cost across cluster counts at fixed cluster size.
    Sweep {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Cluster counts to sweep, comma separated (e.g. 4,16,64).
        #[arg(long, value_delimiter = ',', required = true)]
        nc: Vec<usize>,
        /// Number of consecutive seeds, starting at the config's seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a written trajectory against its configuration.
    Check {
        /// Trajectory CSV produced by `run`.
        #[arg(long)]
        trajectory: PathBuf,
        /// JSON experiment configuration the trajectory came from.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> spiralnet::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            algorithm,
            seed,
            iters,
            out,
        } => {
            let mut config = ExperimentConfig::from_json_file(&config)?;
            if let Some(algorithm) = algorithm {
                config.algorithm = algorithm;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(iters) = iters {
                config.iterations = iters;
            }
            if let Some(out) = out {
                config.out_dir = out;
            }
            let outcome = run_experiment(&config)?;
            let s = &outcome.summary;
            println!(
                "{} n={} n_clusters={} seed={} iterations={}",
                s.algorithm, s.n, s.n_clusters, s.seed, s.iterations
            );
            println!("theta* = {:.6}, f* = {:.6}", s.theta_star, s.f_star);
            println!(
                "objective {:.6} -> {:.6} (mean distance to optimum {:.6})",
                s.initial_total_objective, s.final_total_objective,
                s.final_mean_distance_to_optimum
            );
            println!(
                "transport: {:.3} bit-meters over {} messages",
                s.ledger.total_bm, s.ledger.message_count
            );
            println!(
                "checks: {}",
                if s.all_checks_passed { "all passed" } else { "VIOLATIONS FOUND" }
            );
            println!("wrote {}", outcome.trajectory_path.display());
            if s.all_checks_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Sweep { config, nc, seeds, out } => {
            let mut config = ExperimentConfig::from_json_file(&config)?;
            if let Some(out) = out {
                config.out_dir = out;
            }
            let table = sweep_experiment(&config, &nc, seeds)?;
            println!(
                "cluster size {} held fixed, {} seeds per point",
                table.cluster_size,
                table.seeds.len()
            );
            for row in &table.rows {
                println!(
                    "n_clusters={:4} n={:5} {:<11} intra={:14.3} inter={:12.3} to_fusion={:12.3} total={:14.3}",
                    row.n_clusters, row.n, row.algorithm.to_string(), row.mean_intra_bm,
                    row.mean_inter_bm, row.mean_to_fusion_bm, row.mean_total_bm
                );
            }
            if let Some(slope) = table.spiral_inter_slope {
                println!("ring-exchange growth exponent vs n_clusters: {slope:.3}");
            }
            if let Some(slope) = table.incluster_to_fusion_slope {
                println!("to-fusion growth exponent vs n_clusters: {slope:.3}");
            }
            println!("wrote {}", config.out_dir.join("scaling.json").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { trajectory, config } => {
            let config = ExperimentConfig::from_json_file(&config)?;
            let report = check_trajectory(&config, &trajectory)?;
            for check in &report.checks {
                println!(
                    "{:<18} evaluated={:6} violations={:4} worst_margin={:+.3e} {}",
                    check.name,
                    check.evaluated,
                    check.violations,
                    check.worst_margin.unwrap_or(f64::NAN),
                    if check.pass { "ok" } else { "FAIL" }
                );
            }
            if report.all_passed() {
                println!("trajectory satisfies every applicable inequality");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("trajectory violates at least one inequality");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
