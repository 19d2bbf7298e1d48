//! Command-line front end. Exit codes: 0 success, 1 computation or domain
//! error, 2 usage or parse error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::RoiError;
use crate::io::{emit_record, emit_table, parse_scenario, Format, SimulationReport};
use crate::propagation::{self, scenario_error_report, AggregationMode};
use crate::roi::{relative_error_of, Money, Scenario};
use crate::simulation::{
    self, compare_with_analytic, convergence_study, run_simulation, run_sweep, CaseSource,
    ProjectBand, SimulationConfig, SweepConfig, SweepRange, DEFAULT_ITERATIONS, DEFAULT_RATIO,
    DEFAULT_SEED, DEFAULT_SEED_COUNT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "roi-accuracy", version)]
#[command(
    about = "Estimate the accuracy of ROI evaluations from benefit and cost estimation errors"
)]
pub struct Cli {
    /// Output format (default: json for analyze/simulate, csv for tables)
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Display fractions as percentages
    #[arg(long, global = true)]
    pub percent: bool,

    /// Worker threads for the simulation engine (output does not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Sum,
    Quadrature,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BandArg {
    Small,
    Medium,
    Large,
}

impl From<BandArg> for ProjectBand {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Small => ProjectBand::Small,
            BandArg::Medium => ProjectBand::Medium,
            BandArg::Large => ProjectBand::Large,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic error report for a scenario file
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
    },
    /// Monte Carlo estimate of the ROI error, with the analytic comparison
    Simulate {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Mean absolute ROI error over a grid of equal benefit/cost errors
    Sweep {
        /// low (0..0.45), high (0.40..0.95) or START:STOP
        #[arg(long, default_value = "low")]
        range: String,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_RATIO)]
        ratio: f64,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Exact 1/(1-x) against its first-order expansion 1+x
    Validity {
        #[arg(long, default_value_t = 0.95)]
        max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Spread of the simulated error across seeds for growing iteration counts
    Convergence {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = DEFAULT_SEED_COUNT)]
        seeds: usize,
        #[arg(long, value_delimiter = ',', default_values_t = simulation::DEFAULT_N_LIST.to_vec())]
        n_list: Vec<usize>,
        /// First seed; further seeds count up from it
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Scenario file; its totals set the actual cost and benefit-cost ratio
    #[arg(conflicts_with_all = ["cost", "band", "ratio"])]
    pub file: Option<PathBuf>,
    /// Explicit actual cost
    #[arg(long, conflicts_with = "band")]
    pub cost: Option<f64>,
    /// Draw the actual cost from a project band
    #[arg(long, value_enum)]
    pub band: Option<BandArg>,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Benefit relative error (defaults to the scenario's summed error)
    #[arg(long)]
    pub e_benefit: Option<f64>,
    /// Cost relative error (defaults to the scenario's summed error)
    #[arg(long)]
    pub e_cost: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(RoiError),
}

impl From<RoiError> for CliError {
    fn from(e: RoiError) -> Self {
        CliError::Domain(e)
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolves the case arguments into a config template (iterations and seed
/// are filled in by the caller).
fn case_config(case: &CaseArgs) -> Result<SimulationConfig, CliError> {
    let (source, ratio, default_errors) = match &case.file {
        Some(path) => {
            let s = load_scenario(path)?;
            let benefit =
                propagation::aggregate_estimates(&s.benefit_estimates(), AggregationMode::Sum);
            let cost = propagation::aggregate_estimates(&s.cost_estimates(), AggregationMode::Sum);
            let ratio = simulation::benefit_cost_ratio(benefit.value, cost.value)?;
            let errors = (relative_error_of(&benefit)?, relative_error_of(&cost)?);
            (CaseSource::ActualCost(cost.value), ratio, Some(errors))
        }
        None => {
            let source = match (case.cost, case.band) {
                (Some(c), _) => CaseSource::ActualCost(Money::new(c)?),
                (None, Some(b)) => CaseSource::Band(b.into()),
                (None, None) => CaseSource::default(),
            };
            (source, case.ratio.unwrap_or(DEFAULT_RATIO), None)
        }
    };
    let pick = |flag: Option<f64>, fallback: Option<f64>, name: &str| {
        flag.or(fallback).ok_or_else(|| {
            CliError::Usage(format!(
                "--{name} is required unless a scenario file is given"
            ))
        })
    };
    Ok(SimulationConfig {
        case_source: source,
        benefit_cost_ratio: ratio,
        e_benefit: pick(case.e_benefit, default_errors.map(|e| e.0), "e-benefit")?,
        e_cost: pick(case.e_cost, default_errors.map(|e| e.1), "e-cost")?,
        ..SimulationConfig::default()
    })
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let percent = cli.percent;
    let fmt = |default: Format| cli.format.map(Format::from).unwrap_or(default);
    match &cli.command {
        Command::Analyze { file, mode } => {
            let scenario = load_scenario(file)?;
            let mode = match mode {
                ModeArg::Sum => AggregationMode::Sum,
                ModeArg::Quadrature => AggregationMode::Quadrature,
            };
            let report = scenario_error_report(&scenario, mode)?;
            Ok(emit_record(&report, fmt(Format::Json), percent))
        }
        Command::Simulate {
            case,
            iterations,
            seed,
        } => {
            let config = SimulationConfig {
                iterations: *iterations,
                seed: *seed,
                ..case_config(case)?
            };
            let result = run_simulation(&config)?;
            let analytic = compare_with_analytic(&result)?;
            Ok(emit_record(
                &SimulationReport { result, analytic },
                fmt(Format::Json),
                percent,
            ))
        }
        Command::Sweep {
            range,
            step,
            ratio,
            iterations,
            seed,
        } => {
            let range: SweepRange = range
                .parse()
                .map_err(|e: RoiError| CliError::Usage(e.to_string()))?;
            let rows = run_sweep(&SweepConfig {
                range,
                step: *step,
                ratio: *ratio,
                iterations: *iterations,
                seed: *seed,
                ..SweepConfig::default()
            })?;
            Ok(emit_table(&rows, fmt(Format::Csv), percent))
        }
        Command::Validity { max, step } => {
            let rows = propagation::taylor_validity_table(*max, *step)?;
            Ok(emit_table(&rows, fmt(Format::Csv), percent))
        }
        Command::Convergence {
            case,
            seeds,
            n_list,
            seed,
        } => {
            let config = SimulationConfig {
                seed: *seed,
                ..case_config(case)?
            };
            let rows = convergence_study(&config, n_list, *seeds)?;
            Ok(emit_table(&rows, fmt(Format::Csv), percent))
        }
    }
}

/// Parses `args` (including the program name), runs the command, writes
/// results to `out` and diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };

    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli),
    };

    match outcome {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_DOMAIN
            }
        },
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("roi-accuracy").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn validity_command() {
        let (code, out, _) = run_capture(&["validity", "--max", "0.5", "--step", "0.1"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "rel_error,exact,approx,relative_gap");
        assert_eq!(lines[6], "0.5,2.0,1.5,0.25");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run_capture(&["analyze", "definitely-missing.toml"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["validity", "--max", "1.0"]).0, EXIT_DOMAIN);
        assert_eq!(
            run_capture(&[
                "simulate",
                "--cost",
                "100",
                "--e-benefit",
                "0.1",
                "--e-cost",
                "1.0"
            ])
            .0,
            EXIT_DOMAIN
        );
        assert_eq!(
            run_capture(&["simulate", "--cost", "100", "--e-benefit", "0.1"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["sweep", "--range", "wide"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn diagnostics_go_to_stderr() {
        let (_, out, err) = run_capture(&["validity", "--max", "1.5"]);
        assert!(out.is_empty());
        assert!(err.starts_with("error:"));
    }
}
