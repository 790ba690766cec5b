use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pgls_bench::{compare, run_experiment, Algo, ExperimentConfig, Target};
use pgls_core::coop::{CoopStrategy, TopologyKind};
use pgls_core::gls::InitialTour;

#[derive(Parser)]
#[command(name = "pgls", version, about = "Guided Local Search experiments on TSPLIB instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    Random,
    Nn,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded repetitions and write runs.csv and summary.json.
    Run {
        /// TSPLIB .tsp file or bundled instance name.
        #[arg(long)]
        instance: String,
        /// gls, ebgls or parallel.
        #[arg(long, default_value = "ebgls")]
        algo: Algo,
        /// independent, elite-biased, restart or restart-elite-biased.
        #[arg(long, default_value = "elite-biased")]
        strategy: CoopStrategy,
        /// ring or torus.
        #[arg(long, default_value = "ring")]
        topology: TopologyKind,
        /// Workers per parallel run.
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = 0.3)]
        lambda_coeff: f64,
        #[arg(long, default_value_t = 2.0)]
        w: f64,
        /// Elite refresh and exchange period U.
        #[arg(long, default_value_t = 100)]
        u_cycle: u64,
        /// Neighbor-list length.
        #[arg(long, default_value_t = 10)]
        nn_k: usize,
        #[arg(long, value_enum, default_value = "random")]
        initial: Initial,
        #[arg(long)]
        max_seconds: Option<f64>,
        /// Iteration budget per worker.
        #[arg(long)]
        max_iters: Option<u64>,
        /// optimum, none, or an explicit cost.
        #[arg(long, default_value = "optimum")]
        target: Target,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Write full event logs under <out>/trace.
        #[arg(long)]
        trace: bool,
    },
    /// Compare two runs.csv files with a Mann-Whitney U test on excess.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Print the comparison as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            instance,
            algo,
            strategy,
            topology,
            k,
            seed_base,
            lambda_coeff,
            w,
            u_cycle,
            nn_k,
            initial,
            max_seconds,
            max_iters,
            target,
            reps,
            out,
            trace,
        } => {
            let cfg = ExperimentConfig {
                instance,
                algo,
                strategy,
                topology,
                k,
                seed_base,
                lambda_coeff,
                w,
                u: u_cycle,
                nn_k,
                initial: match initial {
                    Initial::Random => InitialTour::Random,
                    Initial::Nn => InitialTour::NearestNeighbor,
                },
                max_seconds,
                max_iterations: max_iters,
                target,
                reps,
                out,
                trace,
            };
            let summary = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Compare { a, b, json } => {
            let cmp = compare(&a, &b)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&cmp)?);
            } else {
                println!("{cmp}");
            }
        }
    }
    Ok(())
}
