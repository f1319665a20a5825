//! Command-line front end for `spcelab`: experiment recipes, event logs and
//! JSON reports.
//!
//! Exit codes: 0 on success, 2 for usage or recipe errors, 3 for bad input
//! data, 1 when the output cannot be written.

pub mod commands;
pub mod config;
pub mod error;
pub mod eventlog;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Artifact, Outcome};
use crate::config::{
    parse_list, CalibrateConfig, ChshConfig, ExperimentConfig, ModelSpec, PurityConfig, ScanConfig, SettingsDeg,
    TimeseriesConfig, WindowSpec,
};
pub use crate::error::{CliError, CliResult};

pub const DEFAULT_OUTPUT: &str = "spcelab-out";

#[derive(Debug, Parser)]
#[command(
    name = "spcelab",
    version,
    about = "Seeded Monte Carlo experiments on correlated pairs, purity tests and AR series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate event logs for the four CHSH passes, or an AR series.
    Simulate(SimulateArgs),
    /// Estimate the CHSH value from a model run or four stored logs.
    Chsh(ChshArgs),
    /// Sweep the setting difference and compare with -cos Δ.
    Scan(ScanArgs),
    /// Split-sample purity test of one CSV column.
    Purity(PurityArgs),
    /// Descriptives, correlogram, order selection and AR fit of one column.
    Timeseries(TimeseriesArgs),
    /// Grid search over the contextual model's exponent and window.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML recipe; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// qt, contextual, factorizable or deterministic.
    #[arg(long)]
    model: Option<String>,
    /// Contextual model: delay exponent d.
    #[arg(long)]
    exponent: Option<f64>,
    /// Contextual model: delay scale T0.
    #[arg(long)]
    t0: Option<f64>,
    /// Contextual model: time between emitted pairs.
    #[arg(long)]
    emission_interval: Option<f64>,
    /// Factorizable or deterministic model: draw this many random cells.
    #[arg(long)]
    cells: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// AR model coefficients (with --model ar).
    #[arg(long)]
    phi: Option<String>,
    /// AR model innovation variance.
    #[arg(long)]
    noise_var: Option<f64>,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Pairs per pass, or the series length.
    #[arg(long)]
    n: Option<u64>,
    /// a,a',b,b' in degrees.
    #[arg(long)]
    angles: Option<String>,
}

#[derive(Debug, Args)]
struct ChshArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Pairs per setting pair.
    #[arg(long)]
    n: Option<u64>,
    /// a,a',b,b' in degrees.
    #[arg(long)]
    angles: Option<String>,
    /// Coincidence window width, or "unwindowed".
    #[arg(long)]
    window: Option<String>,
    /// Four event logs in pass order (a,b), (a,b'), (a',b), (a',b').
    #[arg(long, num_args = 4, value_names = ["AB", "AB_PRIME", "A_PRIME_B", "A_PRIME_B_PRIME"])]
    logs: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Pairs per grid point.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    window: Option<String>,
    /// Setting differences in degrees (default 0,15,...,180).
    #[arg(long)]
    deltas: Option<String>,
}

#[derive(Debug, Args)]
struct PurityArgs {
    #[command(flatten)]
    common: Common,
    /// Headed CSV file holding the series.
    #[arg(long)]
    input: Option<String>,
    /// Column to read (default: z).
    #[arg(long)]
    column: Option<String>,
    /// Number of contiguous blocks.
    #[arg(long)]
    splits: Option<usize>,
    /// The column holds 0/1 symbols.
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Args)]
struct TimeseriesArgs {
    #[command(flatten)]
    common: Common,
    /// Headed CSV file holding the series.
    #[arg(long)]
    input: Option<String>,
    /// Column to read (default: z).
    #[arg(long)]
    column: Option<String>,
    /// Largest lag for the correlogram and order selection.
    #[arg(long)]
    maxlag: Option<usize>,
    /// AR order to fit (default: the selected order).
    #[arg(long)]
    fit: Option<usize>,
    /// Histogram bins (default: Sturges).
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Pairs per grid point and cell.
    #[arg(long)]
    n: Option<u64>,
    /// Candidate exponents, comma separated.
    #[arg(long)]
    exponents: Option<String>,
    /// Candidate windows, comma separated; "unwindowed" allowed.
    #[arg(long)]
    windows: Option<String>,
    /// Pairs per point for a confirmation run at the selected cell.
    #[arg(long)]
    verify_n: Option<u64>,
}

impl ModelArgs {
    fn apply(&self, slot: &mut Option<ModelSpec>) -> CliResult<()> {
        if let Some(kind) = &self.model {
            *slot = Some(ModelSpec::from_kind(kind)?);
        }
        let contextual = self.exponent.is_some() || self.t0.is_some() || self.emission_interval.is_some();
        match slot {
            Some(ModelSpec::Contextual {
                t0,
                exponent,
                emission_interval,
            }) => {
                *t0 = self.t0.or(*t0);
                *exponent = self.exponent.or(*exponent);
                *emission_interval = self.emission_interval.or(*emission_interval);
            }
            _ if contextual => {
                return Err(CliError::Config(
                    "--exponent, --t0 and --emission-interval need the contextual model".into(),
                ))
            }
            _ => {}
        }
        if let Some(n) = self.cells {
            match slot {
                Some(ModelSpec::Factorizable { cells, random_cells }) => {
                    *cells = None;
                    *random_cells = Some(n);
                }
                Some(ModelSpec::Deterministic { cells, random_cells }) => {
                    *cells = None;
                    *random_cells = Some(n);
                }
                _ => {
                    return Err(CliError::Config(
                        "--cells needs a factorizable or deterministic model".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Read the recipe for `kind`, or start from an empty one.
fn load<T: Default>(common: &Common, kind: &str, pick: fn(ExperimentConfig) -> Option<T>) -> CliResult<T> {
    let Some(path) = &common.config else {
        return Ok(T::default());
    };
    let cfg = ExperimentConfig::load(path)?;
    let found = cfg.kind();
    pick(cfg).ok_or_else(|| CliError::Config(format!("{} is a `{found}` recipe, not `{kind}`", path.display())))
}

fn output_dir(flag: &Option<String>, slot: &mut Option<String>) -> PathBuf {
    // the output location is not part of the experiment, so it is left out
    // of the echoed recipe
    PathBuf::from(flag.clone().or(slot.take()).unwrap_or_else(|| DEFAULT_OUTPUT.into()))
}

fn windows_list(s: &str) -> CliResult<Vec<WindowSpec>> {
    s.split(',').map(|p| WindowSpec::parse(p.trim())).collect()
}

/// What a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub report: PathBuf,
    pub message: String,
}

type Prepared = (ExperimentConfig, PathBuf, Box<dyn FnOnce() -> CliResult<Outcome>>);

fn prepare(command: Command) -> CliResult<Prepared> {
    Ok(match command {
        Command::Simulate(a) => {
            let mut c = load(&a.common, "simulate", |c| match c {
                ExperimentConfig::Simulate(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            a.model.apply(&mut c.model)?;
            if a.phi.is_some() || a.noise_var.is_some() {
                match &mut c.model {
                    Some(ModelSpec::Ar {
                        coefficients,
                        noise_variance,
                        ..
                    }) => {
                        if let Some(p) = &a.phi {
                            *coefficients = parse_list(p, "phi")?;
                        }
                        *noise_variance = a.noise_var.or(*noise_variance);
                    }
                    _ => return Err(CliError::Config("--phi and --noise-var need --model ar".into())),
                }
            }
            c.seed = a.seed.or(c.seed);
            c.n_pairs = a.n.or(c.n_pairs);
            if let Some(s) = &a.angles {
                c.settings = Some(SettingsDeg::parse(s)?);
            }
            let r = c.resolve()?;
            (
                ExperimentConfig::Simulate(c),
                out,
                Box::new(move || commands::simulate(r)),
            )
        }
        Command::Chsh(a) => {
            let mut c: ChshConfig = load(&a.common, "chsh", |c| match c {
                ExperimentConfig::Chsh(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            a.model.apply(&mut c.model)?;
            c.seed = a.seed.or(c.seed);
            c.n_pairs = a.n.or(c.n_pairs);
            if let Some(s) = &a.angles {
                c.settings = Some(SettingsDeg::parse(s)?);
            }
            if let Some(w) = &a.window {
                c.window = Some(WindowSpec::parse(w)?);
            }
            if a.logs.is_some() {
                c.logs = a.logs.clone();
            }
            let r = c.resolve()?;
            (ExperimentConfig::Chsh(c), out, Box::new(move || commands::chsh(r)))
        }
        Command::Scan(a) => {
            let mut c: ScanConfig = load(&a.common, "correlation-scan", |c| match c {
                ExperimentConfig::CorrelationScan(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            a.model.apply(&mut c.model)?;
            c.seed = a.seed.or(c.seed);
            c.n_pairs = a.n.or(c.n_pairs);
            if let Some(w) = &a.window {
                c.window = Some(WindowSpec::parse(w)?);
            }
            if let Some(d) = &a.deltas {
                c.deltas_deg = Some(parse_list(d, "deltas")?);
            }
            let r = c.resolve()?;
            (
                ExperimentConfig::CorrelationScan(c),
                out,
                Box::new(move || commands::scan(r)),
            )
        }
        Command::Purity(a) => {
            let mut c: PurityConfig = load(&a.common, "purity", |c| match c {
                ExperimentConfig::Purity(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            c.input = a.input.clone().or(c.input);
            c.column = a.column.clone().or(c.column);
            c.splits = a.splits.or(c.splits);
            if a.binary {
                c.binary = Some(true);
            }
            let r = c.resolve()?;
            (ExperimentConfig::Purity(c), out, Box::new(move || commands::purity(r)))
        }
        Command::Timeseries(a) => {
            let mut c: TimeseriesConfig = load(&a.common, "timeseries", |c| match c {
                ExperimentConfig::Timeseries(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            c.input = a.input.clone().or(c.input);
            c.column = a.column.clone().or(c.column);
            c.max_lag = a.maxlag.or(c.max_lag);
            c.fit = a.fit.or(c.fit);
            c.bins = a.bins.or(c.bins);
            let r = c.resolve()?;
            (
                ExperimentConfig::Timeseries(c),
                out,
                Box::new(move || commands::timeseries(r)),
            )
        }
        Command::Calibrate(a) => {
            let mut c: CalibrateConfig = load(&a.common, "calibrate", |c| match c {
                ExperimentConfig::Calibrate(c) => Some(c),
                _ => None,
            })?;
            let out = output_dir(&a.common.out, &mut c.output);
            a.model.apply(&mut c.model)?;
            c.seed = a.seed.or(c.seed);
            c.n_pairs = a.n.or(c.n_pairs);
            if let Some(e) = &a.exponents {
                c.exponents = Some(parse_list(e, "exponents")?);
            }
            if let Some(w) = &a.windows {
                c.windows = Some(windows_list(w)?);
            }
            c.verify_n_pairs = a.verify_n.or(c.verify_n_pairs);
            let r = c.resolve()?;
            (
                ExperimentConfig::Calibrate(c),
                out,
                Box::new(move || commands::calibrate(r)),
            )
        }
    })
}

fn write_artifacts(dir: &Path, artifacts: &[(String, Artifact)]) -> CliResult<()> {
    for (name, artifact) in artifacts {
        let path = dir.join(name);
        match artifact {
            Artifact::EventLog(records) => eventlog::write_event_log(&path, records)?,
            Artifact::Plot(rows) => report::write_plot(&path, rows)?,
            Artifact::Column(column, values) => report::write_column(&path, column, values)?,
        }
    }
    Ok(())
}

/// Parse `argv` (program name first) and run the subcommand.
pub fn execute<I, T>(argv: I) -> CliResult<RunSummary>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let (config, out_dir, job) = prepare(cli.command)?;
    let start = Instant::now();
    let outcome = job()?;
    let elapsed = start.elapsed().as_secs_f64();
    report::create_dir(&out_dir)?;
    write_artifacts(&out_dir, &outcome.artifacts)?;
    let report = report::emit_report(&out_dir, &config, outcome.results)?;
    report::emit_timing(&out_dir, config.kind(), elapsed)?;
    Ok(RunSummary {
        message: format!("{} (report: {})", outcome.summary, report.display()),
        out_dir,
        report,
    })
}

/// Entry point for the binary: runs `argv` and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // help and version requests are not errors
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            print!("{e}");
            return 0;
        }
    }
    match execute(argv) {
        Ok(summary) => {
            println!("{}", summary.message);
            0
        }
        Err(CliError::Usage(text)) => {
            // clap's message already carries the usage text
            eprint!("{text}");
            2
        }
        Err(e) => {
            eprintln!("spcelab: {e}");
            e.exit_code()
        }
    }
}
