//! Command implementations behind the `bdpp` binary.

pub mod config;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bdpp::analysis::verify::{beta_grad_suite, run_suite, BetaGradFn, Suite, SuiteReport};
use bdpp::bilevel::{run, BilevelError};
use bdpp::diffcore::Tensor;
use bdpp::io::{load_benchmark, load_trajectory, save_benchmark, save_trajectory, IoError};
use bdpp::oracle::{brute_force_best, generate_benchmark, OracleError, TabularBenchmark};
use bdpp::par::Exec;
use bdpp::searchspace::{genotype_to_string, SearchSpaceError};
use thiserror::Error;

use config::{BenchmarkSource, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: String, source: IoError },
    #[error(transparent)]
    Search(#[from] BilevelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    SearchSpace(#[from] SearchSpaceError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(field: &str, e: impl std::fmt::Display) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: e.to_string(),
        }
    }

    fn from_io(path: &Path, e: IoError) -> Self {
        match e {
            IoError::Io { source, .. } => CliError::Io {
                path: path.to_path_buf(),
                source,
            },
            f @ IoError::Format { .. } => CliError::Format {
                path: path.display().to_string(),
                source: f,
            },
        }
    }

    /// 1 for failed checks or a diverged search, 2 for usage and config
    /// errors (malformed input files included), 3 for IO failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Failed(_) => 1,
            CliError::Search(BilevelError::Diverged { .. }) => 1,
            _ => 2,
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_bench(path: &Path) -> Result<TabularBenchmark, CliError> {
    load_benchmark(path).map_err(|e| CliError::from_io(path, e))
}

fn resolve_benchmark(source: &BenchmarkSource) -> Result<TabularBenchmark, CliError> {
    match source {
        BenchmarkSource::Generated { seed } => Ok(generate_benchmark(*seed)),
        BenchmarkSource::Imported { path } => load_bench(path),
    }
}

/// Result of `search`, as printed on stdout.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSummary {
    pub genotype: String,
    pub score: f64,
    pub optimum: String,
    pub optimum_score: f64,
    pub epochs: usize,
    pub stopped_by: Option<String>,
}

impl SearchSummary {
    pub fn render(&self) -> String {
        let mut s = format!(
            "genotype  {}\nscore     {:.9}\noptimum   {}\nbest      {:.9}\nregret    {:.9}\nepochs    {}\n",
            self.genotype,
            self.score,
            self.optimum,
            self.optimum_score,
            self.optimum_score - self.score,
            self.epochs
        );
        if let Some(c) = &self.stopped_by {
            s.push_str(&format!("stopped   {c}\n"));
        }
        s
    }
}

/// Run a search and write its trajectory to `out`.
pub fn cmd_search(config: &RunConfig, out: &Path) -> Result<SearchSummary, CliError> {
    let mut search = config.search_config()?;
    search.apply_env_seed()?;
    let data = config.task.generate()?;
    let bench = resolve_benchmark(&config.benchmark)?;
    let outcome = run(&search, &data, Some(&bench))?;
    save_trajectory(&outcome.trajectory.records, out).map_err(|e| CliError::from_io(out, e))?;
    let (best, optimum_score) = brute_force_best(&bench)?;
    Ok(SearchSummary {
        score: bench.lookup(&outcome.genotype_string)?,
        genotype: outcome.genotype_string,
        optimum: genotype_to_string(&best, bench.ops())?,
        optimum_score,
        epochs: outcome.trajectory.records.len(),
        stopped_by: outcome.trajectory.stopped_by.map(|c| c.name().to_string()),
    })
}

/// Parse a `--suite` value; `all` selects every suite.
pub fn parse_suites(name: &str) -> Result<Vec<Suite>, CliError> {
    if name == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    name.parse::<Suite>().map(|s| vec![s]).map_err(|e| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        CliError::Usage(format!("{e}; expected one of {} or all", names.join(", ")))
    })
}

/// Deliberate defects used to check that the suites catch them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Negated Beta-Decay gradient.
    BetaGradSign,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "beta-grad-sign" => Ok(Fault::BetaGradSign),
            _ => Err(format!("unknown fault `{s}`")),
        }
    }
}

fn flipped_beta_grad(alpha: &Tensor) -> Tensor {
    let mut g = bdpp::analysis::verify::autodiff_beta_grad(alpha);
    for v in g.data_mut() {
        *v = -*v;
    }
    g
}

pub fn cmd_verify(suites: &[Suite], fault: Option<Fault>) -> Vec<SuiteReport> {
    suites
        .iter()
        .map(|&s| match (s, fault) {
            (Suite::BetaGrad, Some(Fault::BetaGradSign)) => {
                let f: &BetaGradFn = &flipped_beta_grad;
                beta_grad_suite(f, Exec::Parallel)
            }
            _ => run_suite(s, Exec::Parallel),
        })
        .collect()
}

pub fn verify_table(reports: &[SuiteReport]) -> String {
    let mut s = format!("{:<10} {:<40} {:>12} {:>12}  result\n", "suite", "check", "observed", "bound");
    for r in reports {
        for c in &r.checks {
            s.push_str(&format!(
                "{:<10} {:<40} {:>12.3e} {:>12.3e}  {}\n",
                r.suite.name(),
                c.name,
                c.observed,
                c.bound,
                if c.passed { "pass" } else { "FAIL" }
            ));
        }
    }
    s
}

pub fn write_verify_csv(reports: &[SuiteReport], path: &Path) -> Result<(), CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "suite,check,observed,bound,passed").expect("in-memory write");
    for r in reports {
        for c in &r.checks {
            writeln!(buf, "{},{},{:.8e},{:.8e},{}", r.suite.name(), c.name, c.observed, c.bound, c.passed)
                .expect("in-memory write");
        }
    }
    write_file(path, &buf)
}

pub fn cmd_bench_gen(seed: u64, out: &Path) -> Result<usize, CliError> {
    let bench = generate_benchmark(seed);
    save_benchmark(&bench, out).map_err(|e| CliError::from_io(out, e))?;
    Ok(bench.len())
}

pub fn cmd_bench_best(path: &Path) -> Result<(String, f64), CliError> {
    let bench = load_bench(path)?;
    let (g, s) = brute_force_best(&bench)?;
    Ok((genotype_to_string(&g, bench.ops())?, s))
}

pub fn cmd_report(traj: &Path, bench: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let records = load_trajectory(traj).map_err(|e| CliError::from_io(traj, e))?;
    let bench = bench.map(load_bench).transpose()?;
    let md = report::render(&records, bench.as_ref())?;
    write_file(out, md.as_bytes())
}
