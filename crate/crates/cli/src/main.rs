use std::path::PathBuf;
use std::process::ExitCode;

use bdpp_cli::config::RunConfig;
use bdpp_cli::{
    cmd_bench_best, cmd_bench_gen, cmd_report, cmd_search, cmd_verify, parse_suites, verify_table, write_verify_csv,
    CliError, Fault,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bdpp", version, about = "Regularized differentiable architecture search on a toy cell space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search and write its trajectory CSV.
    Search {
        /// JSON run config; the built-in default when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trajectory CSV; falls back to `output.trajectory` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numeric property suites.
    Verify {
        /// beta-grad, theta, flooding, criteria, lipschitz or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Also write every check to a CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Generate or query tabular benchmarks.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Render a markdown report from a trajectory CSV.
    Report {
        #[arg(long)]
        traj: PathBuf,
        /// Benchmark CSV; adds the regret section.
        #[arg(long)]
        bench: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default run config as JSON.
    DefaultConfig,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Write the generated table for a seed.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force optimum of a benchmark CSV.
    Best {
        #[arg(long)]
        bench: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Search { config, out } => {
            let cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            let out = out
                .or_else(|| cfg.output.trajectory.clone())
                .ok_or_else(|| CliError::Usage("no output path: pass --out or set output.trajectory".into()))?;
            let summary = cmd_search(&cfg, &out)?;
            print!("{}", summary.render());
            println!("trajectory {}", out.display());
        }
        Command::Verify {
            suite,
            csv,
            inject_fault,
        } => {
            let suites = parse_suites(&suite)?;
            let reports = cmd_verify(&suites, inject_fault);
            print!("{}", verify_table(&reports));
            if let Some(path) = csv {
                write_verify_csv(&reports, &path)?;
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.suite.name()).collect();
            if !failed.is_empty() {
                return Err(CliError::Failed(format!("failed suites: {}", failed.join(", "))));
            }
        }
        Command::Bench { command } => match command {
            BenchCommand::Gen { seed, out } => {
                let n = cmd_bench_gen(seed, &out)?;
                println!("wrote {n} genotypes to {}", out.display());
            }
            BenchCommand::Best { bench } => {
                let (g, s) = cmd_bench_best(&bench)?;
                println!("{g} {s:.12}");
            }
        },
        Command::Report { traj, bench, out } => {
            cmd_report(&traj, bench.as_deref(), &out)?;
            println!("report {}", out.display());
        }
        Command::DefaultConfig => println!("{}", RunConfig::default().to_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
