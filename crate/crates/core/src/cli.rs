//! Command-line front end: argument parsing, experiment dispatch and CSV
//! output. The binary is a thin wrapper around [`parse_args`] and [`run`].
//!
//! Output is a pure function of the arguments and the scenario file: floats
//! are written in shortest round-trip form and ensembles are reduced in run
//! order, so repeated invocations produce byte-identical CSV.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::complexity::complexity_table;
use crate::error::{BeamformError, Result};
use crate::metrics::{mismatch_experiment, rank_sweep, run_ensemble, Algorithm, SinrCurve};
use crate::scenario::Scenario;
use crate::selftest::run_checks;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BEAMFORM_THREADS";

/// Snapshot count at which a rank sweep reads the SINR unless `--snapshots`
/// is given.
pub const RANK_SWEEP_SNAPSHOTS: usize = 500;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ccm-beamform",
    version,
    about = "Reduced-rank CCM adaptive beamforming experiments",
    after_help = "Set BEAMFORM_THREADS to cap the number of parallel Monte Carlo runs."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble-averaged output SINR versus snapshot index.
    Curve(CurveArgs),
    /// SINR after a fixed number of snapshots (default 500) for a range of ranks.
    RankSweep(RankSweepArgs),
    /// SINR curves with the presumed SOI direction offset from the true one.
    Mismatch(MismatchArgs),
    /// Per-snapshot operation counts for every algorithm family.
    Complexity(ComplexityArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Overrides {
    /// Number of Monte Carlo runs K.
    #[arg(long, value_name = "K")]
    pub runs: Option<usize>,
    /// Snapshots per run N.
    #[arg(long, value_name = "N")]
    pub snapshots: Option<usize>,
    /// Reduced rank r.
    #[arg(long, value_name = "R")]
    pub rank: Option<usize>,
    /// Master seed.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Gram-Schmidt period in snapshots.
    #[arg(long, value_name = "P")]
    pub gs_period: Option<usize>,
    /// Step size for T (JIO-CCM).
    #[arg(long, value_name = "REAL")]
    pub mu_t: Option<f64>,
    /// Step size for w̄ (JIO-CCM).
    #[arg(long, value_name = "REAL")]
    pub mu_w: Option<f64>,
    /// Step size for T (JIO-CCM-GS).
    #[arg(long, value_name = "REAL")]
    pub mu_t_gs: Option<f64>,
    /// Step size for w̄ (JIO-CCM-GS).
    #[arg(long, value_name = "REAL")]
    pub mu_w_gs: Option<f64>,
    /// Step size for full-rank CCM-SG.
    #[arg(long, value_name = "REAL")]
    pub mu_ccm: Option<f64>,
    /// Step size for full-rank CMV-SG.
    #[arg(long, value_name = "REAL")]
    pub mu_cmv: Option<f64>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON file [default: bundled q = 7 scenario; q = 10 for `mismatch`].
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Output CSV file [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Comma-separated algorithm ids [default: all four].
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    common: ScenarioArgs,
}

#[derive(Debug, Args)]
struct RankSweepArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Comma-separated ranks to sweep.
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    ranks: Vec<usize>,
}

#[derive(Debug, Args)]
struct MismatchArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Presumed minus true SOI direction, degrees.
    #[arg(long, value_name = "D", default_value_t = 2.0, allow_negative_numbers = true)]
    mismatch_deg: f64,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// Number of sensors.
    #[arg(long, value_name = "M")]
    m: usize,
    /// Reduced rank.
    #[arg(long, value_name = "R")]
    r: usize,
    /// Output CSV file [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Which experiment to run, with its command-specific settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Curve,
    RankSweep { ranks: Vec<usize> },
    Mismatch { mismatch_deg: f64 },
    Complexity { m: usize, r: usize },
    Selftest,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Curve => "curve",
            Experiment::RankSweep { .. } => "rank-sweep",
            Experiment::Mismatch { .. } => "mismatch",
            Experiment::Complexity { .. } => "complexity",
            Experiment::Selftest => "selftest",
        }
    }
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Experiment,
    /// `None` selects the bundled scenario for the command.
    pub scenario_path: Option<PathBuf>,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    /// Algorithms to run; empty means all four.
    pub algorithms: Vec<Algorithm>,
    pub overrides: Overrides,
}

fn usage_error(message: String) -> clap::Error {
    Cli::command().error(ErrorKind::ValueValidation, message)
}

/// Parses `argv` (without the program name). Errors carry clap's exit code:
/// 2 for usage errors, 0 for `--help`/`--version`.
pub fn parse_args<I, S>(argv: I) -> std::result::Result<ExperimentSpec, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("ccm-beamform"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args)?;
    let (command, common) = match cli.command {
        Command::Curve(a) => (Experiment::Curve, Some(a.common)),
        Command::RankSweep(a) => {
            if a.ranks.is_empty() {
                return Err(usage_error("--ranks must list at least one rank".into()));
            }
            (Experiment::RankSweep { ranks: a.ranks }, Some(a.common))
        }
        Command::Mismatch(a) => {
            if !(a.mismatch_deg.abs() < 90.0) {
                return Err(usage_error(format!(
                    "--mismatch-deg {} must be below 90 in magnitude",
                    a.mismatch_deg
                )));
            }
            (Experiment::Mismatch { mismatch_deg: a.mismatch_deg }, Some(a.common))
        }
        Command::Complexity(a) => {
            return Ok(ExperimentSpec {
                command: Experiment::Complexity { m: a.m, r: a.r },
                scenario_path: None,
                output_path: a.out,
                algorithms: Vec::new(),
                overrides: Overrides::default(),
            })
        }
        Command::Selftest => (Experiment::Selftest, None),
    };
    let Some(common) = common else {
        return Ok(ExperimentSpec {
            command,
            scenario_path: None,
            output_path: None,
            algorithms: Vec::new(),
            overrides: Overrides::default(),
        });
    };
    if let Some(path) = &common.scenario {
        if !path.is_file() {
            return Err(usage_error(format!(
                "scenario file {} does not exist",
                path.display()
            )));
        }
    }
    let mut algorithms = common.algorithms.unwrap_or_default();
    algorithms.dedup();
    Ok(ExperimentSpec {
        command,
        scenario_path: common.scenario,
        output_path: common.out,
        algorithms,
        overrides: common.overrides,
    })
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                BeamformError::InvalidArgument(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// Loads the scenario named by the spec (or the bundled one) and applies the
/// command-line overrides.
pub fn resolve_scenario(spec: &ExperimentSpec) -> Result<Scenario> {
    let mut sc = match (&spec.scenario_path, &spec.command) {
        (Some(path), _) => Scenario::load(path)?,
        (None, Experiment::Mismatch { .. }) => Scenario::bundled_mismatch(),
        (None, _) => Scenario::bundled_default(),
    };
    let o = &spec.overrides;
    let run = &mut sc.run;
    if let Some(v) = o.runs {
        run.n_runs = v;
    }
    if let Some(v) = o.snapshots {
        run.n_snapshots = v;
    }
    if let Some(v) = o.rank {
        run.rank = v;
    }
    if let Some(v) = o.seed {
        run.master_seed = v;
    }
    if let Some(v) = o.gs_period {
        run.gs_period = v;
    }
    if let Some(v) = o.mu_t {
        run.mu_t = v;
    }
    if let Some(v) = o.mu_w {
        run.mu_w = v;
    }
    if let Some(v) = o.mu_t_gs {
        run.mu_t_gs = v;
    }
    if let Some(v) = o.mu_w_gs {
        run.mu_w_gs = v;
    }
    if let Some(v) = o.mu_ccm {
        run.mu_ccm = v;
    }
    if let Some(v) = o.mu_cmv {
        run.mu_cmv = v;
    }
    run.threads = threads_from_env()?;
    sc.validate()?;
    Ok(sc)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn algorithms_or_all(spec: &ExperimentSpec) -> Vec<Algorithm> {
    if spec.algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        spec.algorithms.clone()
    }
}

fn report_divergence(curve: &SinrCurve) {
    if curve.n_diverged > 0 {
        eprintln!(
            "warning: {} of {} {} runs broke down numerically and score zero SINR afterwards",
            curve.n_diverged, curve.n_runs, curve.algorithm
        );
    }
}

/// Writes curve rows; `mismatch` adds a trailing `mismatch_deg` column.
pub fn write_curves<W: Write>(out: W, curves: &[SinrCurve], mismatch: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algorithm", "snapshot", "sinr_db", "n_runs", "rank", "mu_T", "mu_w", "seed"];
    if mismatch {
        header.push("mismatch_deg");
    }
    w.write_record(&header)?;
    for curve in curves {
        let p = &curve.params;
        for (snapshot, sinr) in curve.snapshots.iter().zip(&curve.sinr_db) {
            let mut row = vec![
                curve.algorithm.id().to_string(),
                snapshot.to_string(),
                sinr.to_string(),
                curve.n_runs.to_string(),
                p.rank.to_string(),
                p.mu_t.to_string(),
                p.mu_w.to_string(),
                p.seed.to_string(),
            ];
            if mismatch {
                row.push(p.mismatch_deg.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn execute(spec: &ExperimentSpec) -> Result<bool> {
    match &spec.command {
        Experiment::Selftest => {
            let results = run_checks();
            let mut stdout = io::stdout().lock();
            for r in &results {
                writeln!(stdout, "{r}")?;
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Experiment::Complexity { m, r } => {
            let table = complexity_table(*m, *r)?;
            let mut w = csv::Writer::from_writer(open_output(spec.output_path.as_deref())?);
            w.write_record(["algorithm", "m", "r", "additions", "multiplications"])?;
            for row in table {
                let rank = if row.algorithm.uses_rank() { r.to_string() } else { String::new() };
                w.write_record([
                    row.algorithm.name().to_string(),
                    m.to_string(),
                    rank,
                    row.additions.to_string(),
                    row.multiplications.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(true)
        }
        Experiment::Curve => {
            let sc = resolve_scenario(spec)?;
            let curves = algorithms_or_all(spec)
                .into_iter()
                .map(|algo| run_ensemble(&sc, algo))
                .collect::<Result<Vec<_>>>()?;
            curves.iter().for_each(report_divergence);
            write_curves(open_output(spec.output_path.as_deref())?, &curves, false)?;
            Ok(true)
        }
        Experiment::Mismatch { mismatch_deg } => {
            let sc = resolve_scenario(spec)?;
            let curves = mismatch_experiment(&sc, &algorithms_or_all(spec), *mismatch_deg)?;
            curves.iter().for_each(report_divergence);
            write_curves(open_output(spec.output_path.as_deref())?, &curves, true)?;
            Ok(true)
        }
        Experiment::RankSweep { ranks } => {
            let sc = resolve_scenario(spec)?;
            let algos: Vec<Algorithm> = algorithms_or_all(spec)
                .into_iter()
                .filter(|a| a.is_reduced_rank())
                .collect();
            if algos.is_empty() {
                return Err(BeamformError::InvalidArgument(
                    "rank sweep needs at least one reduced-rank algorithm".into(),
                ));
            }
            let n = spec.overrides.snapshots.unwrap_or(RANK_SWEEP_SNAPSHOTS);
            let mut w = csv::Writer::from_writer(open_output(spec.output_path.as_deref())?);
            w.write_record(["algorithm", "rank", "sinr_db"])?;
            for algo in algos {
                for (rank, sinr) in rank_sweep(&sc, algo, ranks, n)? {
                    w.write_record([algo.id().to_string(), rank.to_string(), sinr.to_string()])?;
                }
            }
            w.flush()?;
            Ok(true)
        }
    }
}

/// Runs a parsed command and returns the process exit code. Runtime failures
/// are reported on standard error.
pub fn run(spec: &ExperimentSpec) -> i32 {
    match execute(spec) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error: {} reported failures", spec.command.name());
            EXIT_RUNTIME
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_RUNTIME
        }
    }
}

/// Entry point used by the binary: parse, run, map to an exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(spec) => run(&spec),
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            code
        }
    }
}
