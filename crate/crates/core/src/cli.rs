//! Command-line front end: `generate`, `test`, `tabulate`, `experiment`.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors, 1 on
//! runtime failures.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::baselines::{
    energy_test, fr_test, mmd_test, tukey_depth_test, DepthConfig, MmdBandwidth, PermutationScheme,
};
use crate::error::{Error, Result};
use crate::harness::{
    emit_outputs, run_experiment_timed, write_timing, ExperimentConfig, OutputFormat,
};
use crate::ranker::{Ranker, TrainConfig};
use crate::rankstats::{
    null_distribution, NullTableCache, QuantileMethod, ScoreGenerator, TableMethod,
    DEFAULT_EXACT_BUDGET,
};
use crate::sample::Sample;
use crate::synthdata::{export, generate, Family, ModelSpec};
use crate::twostage::{
    default_roc_null, ranking_test, roc_space_test, RankingTest, SplitConfig, TestReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "ranktest",
    version,
    about = "Ranking-based two-sample rank tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic two-sample problem and write it as CSV.
    Generate {
        /// Model family: L1minus, L1plus, S1, S2, T1, T2, T3.
        #[arg(long)]
        model: Family,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "sample")]
        prefix: String,
        /// Write a column header line.
        #[arg(long)]
        header: bool,
    },
    /// Run a two-sample test on two CSV files (rows are observations).
    Test {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Rank)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = RankerArg::Linear)]
        ranker: RankerArg,
        #[arg(long, default_value = "mww")]
        phi: ScoreGenerator,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        split_fraction: f64,
        #[arg(long, default_value_t = 1000)]
        b_perm: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hidden_width: Option<usize>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the null distribution of a centered rank statistic.
    Tabulate {
        n: usize,
        m: usize,
        phi: ScoreGenerator,
        #[arg(value_enum)]
        method: TableArg,
        #[arg(long, default_value_t = 200_000)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo experiment described by a TOML file.
    Experiment {
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the full-scale pooled sample size.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Rank,
    Rocsup,
    Mmd,
    Energy,
    Fr,
    Tukey,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RankerArg {
    Linear,
    Mlp,
    Boosted,
    Smoothed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableArg {
    Exact,
    Mc,
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Parse(_)
        | Error::Config(_)
        | Error::UnsupportedGenerator(_)
        | Error::BudgetExceeded { .. } => 2,
        Error::Model(_) | Error::NoClosedFormOracle(_) | Error::Io(_) => 1,
    }
}

fn read_input(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Sample::from_csv(&text)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate {
            model,
            dim,
            eps,
            n,
            m,
            seed,
            out,
            prefix,
            header,
        } => {
            let spec = ModelSpec::new(model, dim, eps)?;
            let (x, y) = generate(&spec, n, m, seed)?;
            for p in export(&out, &prefix, &spec, seed, &x, &y, header)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Test {
            x,
            y,
            method,
            ranker,
            phi,
            alpha,
            seed,
            split_fraction,
            b_perm,
            epochs,
            hidden_width,
            out,
        } => {
            let (x, y) = (read_input(&x)?, read_input(&y)?);
            let mut train = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            if let Some(e) = epochs {
                train.epochs = e;
            }
            if let Some(w) = hidden_width {
                train.hidden_width = w;
            }
            let ranker = match ranker {
                RankerArg::Linear => Ranker::Linear(train),
                RankerArg::Mlp => Ranker::Mlp(train),
                RankerArg::Boosted => Ranker::Boosted(train),
                RankerArg::Smoothed => Ranker::SmoothedWphi(phi, train),
            };
            let split = SplitConfig {
                train_fraction: split_fraction,
                seed,
            };
            let scheme = PermutationScheme { b_perm, seed };
            let cache = NullTableCache::in_memory();
            let report: TestReport = match method {
                MethodArg::Rank => ranking_test(
                    &x,
                    &y,
                    &RankingTest {
                        ranker,
                        generator: phi,
                        alpha,
                        split,
                        quantile: QuantileMethod::default(),
                    },
                    &cache,
                )?,
                MethodArg::Rocsup => {
                    let n_test = x.len() - (split_fraction * x.len() as f64).floor() as usize;
                    let m_test = y.len() - (split_fraction * y.len() as f64).floor() as usize;
                    let region = default_roc_null(n_test, m_test)?;
                    roc_space_test(&x, &y, &ranker, alpha, &split, &region)?
                }
                MethodArg::Mmd => mmd_test(&x, &y, &MmdBandwidth::Median, alpha, &scheme)?,
                MethodArg::Energy => energy_test(&x, &y, alpha, &scheme)?,
                MethodArg::Fr => fr_test(&x, &y, alpha, &scheme)?,
                MethodArg::Tukey => tukey_depth_test(
                    &x,
                    &y,
                    phi,
                    alpha,
                    &DepthConfig {
                        seed,
                        ..DepthConfig::default()
                    },
                    QuantileMethod::default(),
                    &cache,
                )?,
            };
            write_or_print(out.as_deref(), &(report.to_json() + "\n"))
        }
        Command::Tabulate {
            n,
            m,
            phi,
            method,
            draws,
            seed,
            out,
        } => {
            let method = match method {
                TableArg::Exact => TableMethod::Exact,
                TableArg::Mc => TableMethod::MonteCarlo { draws, seed },
            };
            let table = null_distribution(n, m, phi, method, DEFAULT_EXACT_BUDGET)?;
            write_or_print(out.as_deref(), &table.to_text())
        }
        Command::Experiment {
            config,
            out,
            paper_scale,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if paper_scale {
                cfg = cfg.paper_scale();
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = out {
                cfg.output_dir = Some(dir);
            }
            cfg.validate()?;
            let (report, secs) = run_experiment_timed(&cfg)?;
            match &cfg.output_dir {
                Some(dir) => {
                    for p in emit_outputs(&report, dir, &OutputFormat::ALL)? {
                        println!("{}", p.display());
                    }
                    println!("{}", write_timing(dir, secs)?.display());
                }
                None => println!("{}", report.to_json()),
            }
            for c in &report.cells {
                for f in &c.failures {
                    eprintln!(
                        "warning: {} {} replication {}: {}",
                        c.model, c.method, f.replication, f.message
                    );
                }
            }
            Ok(())
        }
    }
}
