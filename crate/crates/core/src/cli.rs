//! Command-line surface: argument parsing, validation into a [`RunConfig`],
//! and report rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimator::{self, EstimateResult};
use crate::filters::{build_filter, Filter, FilterRecord, PoleSet};
use crate::format::{json_number, sig17};
use crate::localized::{self, Parity, WeightedSpectrum};
use crate::models::{self, fit_heat_coefficients, Model, Spectrum};
use crate::special_functions::{gamma, is_gamma_pole};

/// Exit status for each failure class.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const CSV_HEADER: &str = "lambda,m,epsilon,n_terms,estimate,oracle,abs_error,rel_error";

#[derive(Debug, Parser)]
#[command(name = "specres", version, about = "Heat coefficients and zeta residues from partial spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a moment-vanishing filter and print it as JSON.
    Filter(FilterArgs),
    /// Estimate one heat coefficient at a single cutoff.
    Estimate(EstimateArgs),
    /// Estimate one heat coefficient over a list of cutoffs.
    Sweep(EstimateArgs),
    /// Estimate a localized heat coefficient from weighted eigenvalues.
    Localized(EstimateArgs),
    /// Print a model's oracle coefficients next to a heat-trace fit and,
    /// with --lambda, the logarithmic baseline and filter estimate.
    Oracle(EstimateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Circle,
    Torus2,
    Sphere,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Decreasing pole locations s_0,s_1,...
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub poles: Vec<f64>,
    /// Target pole index (defaults to the last pole).
    #[arg(long)]
    pub k: Option<usize>,
    /// Filter scales a_0,...,a_k (default 1,2,4,...).
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Target pole index.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Cutoff Λ (estimate, localized, oracle).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Cutoffs for a sweep, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Option<Vec<f64>>,
    /// Schedule parameter m; must exceed s_0 - s_k (default s_0 - s_k + 1).
    #[arg(long)]
    pub m: Option<f64>,
    /// Filter scales a_0,...,a_k.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// Pole locations; required for --model file.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub poles: Option<Vec<f64>>,
    /// Spectrum file for --model file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use a filter saved by `specres filter` instead of building one.
    #[arg(long)]
    pub filter_file: Option<PathBuf>,
    /// Circle projection for `localized --model circle`.
    #[arg(long, value_enum)]
    pub parity: Option<ParityArg>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// What to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Filter,
    Estimate,
    Sweep,
    Localized,
    Oracle,
}

/// Where the spectrum comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Model(Model),
    File(PathBuf),
}

/// Where the filter comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterSource {
    Build { poles: Option<Vec<f64>>, scales: Option<Vec<f64>> },
    File(PathBuf),
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: Option<Source>,
    pub k: usize,
    pub cutoffs: Vec<f64>,
    pub m: Option<f64>,
    pub filter: FilterSource,
    pub parity: Option<Parity>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        match cli.command {
            Command::Filter(a) => {
                let k = a.k.unwrap_or(a.poles.len().saturating_sub(1));
                Ok(Self {
                    command: CommandKind::Filter,
                    source: None,
                    k,
                    cutoffs: Vec::new(),
                    m: None,
                    filter: FilterSource::Build {
                        poles: Some(a.poles),
                        scales: a.scales,
                    },
                    parity: None,
                    format: OutputFormat::Json,
                    output: a.output,
                })
            }
            Command::Estimate(a) => Self::from_estimate_args(CommandKind::Estimate, a),
            Command::Sweep(a) => Self::from_estimate_args(CommandKind::Sweep, a),
            Command::Localized(a) => Self::from_estimate_args(CommandKind::Localized, a),
            Command::Oracle(a) => Self::from_estimate_args(CommandKind::Oracle, a),
        }
    }

    fn from_estimate_args(command: CommandKind, a: EstimateArgs) -> Result<Self> {
        let source = match (a.model, a.input) {
            (ModelArg::File, Some(path)) => Source::File(path),
            (ModelArg::File, None) => return Err(usage("--model file requires --input")),
            (_, Some(_)) => return Err(usage("--input is only valid with --model file")),
            (ModelArg::Circle, None) => Source::Model(Model::Circle),
            (ModelArg::Torus2, None) => Source::Model(Model::Torus2),
            (ModelArg::Sphere, None) => Source::Model(Model::Sphere),
        };
        if command == CommandKind::Oracle && matches!(source, Source::File(_)) {
            return Err(usage("oracle data exists only for the built-in models"));
        }
        let cutoffs = match (command, a.lambda, a.cutoffs) {
            (CommandKind::Sweep, None, Some(c)) => {
                if c.len() < 2 {
                    return Err(usage("sweep needs at least two --cutoffs"));
                }
                c
            }
            (CommandKind::Sweep, _, _) => return Err(usage("sweep takes --cutoffs (and not --lambda)")),
            (CommandKind::Oracle, lambda, None) => lambda.into_iter().collect(),
            (_, Some(lambda), None) => vec![lambda],
            (_, _, _) => return Err(usage("this command takes a single --lambda")),
        };
        estimator::check_cutoffs(&cutoffs)?;
        let filter = match a.filter_file {
            Some(path) => {
                if a.poles.is_some() || a.scales.is_some() {
                    return Err(usage("--filter-file cannot be combined with --poles or --scales"));
                }
                FilterSource::File(path)
            }
            None => {
                if matches!(source, Source::File(_)) && a.poles.is_none() {
                    return Err(usage("--model file requires --poles (or --filter-file)"));
                }
                FilterSource::Build {
                    poles: a.poles,
                    scales: a.scales,
                }
            }
        };
        let parity = match (command, a.parity) {
            (CommandKind::Localized, Some(p)) => {
                if source != Source::Model(Model::Circle) {
                    return Err(usage("--parity applies only to localized --model circle"));
                }
                Some(match p {
                    ParityArg::Even => Parity::Even,
                    ParityArg::Odd => Parity::Odd,
                })
            }
            (CommandKind::Localized, None) if source == Source::Model(Model::Circle) => Some(Parity::Even),
            (_, None) => None,
            (_, Some(_)) => return Err(usage("--parity is only valid for localized")),
        };
        Ok(Self {
            command,
            source: Some(source),
            k: a.k,
            cutoffs,
            m: a.m,
            filter,
            parity,
            format: a.format,
            output: a.output,
        })
    }

    fn max_cutoff(&self) -> f64 {
        self.cutoffs.iter().copied().fold(f64::NAN, f64::max)
    }
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::IllConditioned(_)
        | Error::QuadratureFailure { .. }
        | Error::ScheduleViolation { .. }
        | Error::PoleOfGamma(_)
        | Error::InsufficientData { .. } => EXIT_NUMERICAL,
        Error::Parse { .. } | Error::Io { .. } | Error::EmptySpectrum | Error::NonpositiveEigenvalue(_) => EXIT_IO,
        Error::NonFinite(_)
        | Error::Domain(_)
        | Error::InvalidPoles(_)
        | Error::InvalidScales(_)
        | Error::InvalidCutoff(_) => EXIT_USAGE,
    }
}

fn quiet() -> bool {
    std::env::var("SPECRES_QUIET").is_ok_and(|v| v == "1")
}

fn progress(msg: impl AsRef<str>) {
    if !quiet() {
        eprintln!("specres: {}", msg.as_ref());
    }
}

fn load_filter_file(path: &Path) -> Result<Filter> {
    let text = models::read_text(path)?;
    let record: FilterRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    Filter::from_record(record)
}

fn resolve_filter(config: &RunConfig, model_poles: Option<&[f64]>) -> Result<Filter> {
    match &config.filter {
        FilterSource::File(path) => {
            let filter = load_filter_file(path)?;
            if filter.poles().k() != config.k {
                return Err(usage(format!(
                    "filter file targets k = {}, but --k is {}",
                    filter.poles().k(),
                    config.k
                )));
            }
            Ok(filter)
        }
        FilterSource::Build { poles, scales } => {
            let poles = match (poles, model_poles) {
                (Some(p), _) => p.clone(),
                (None, Some(p)) => p.to_vec(),
                (None, None) => return Err(usage("no poles given")),
            };
            build_filter(&PoleSet::new(poles, config.k)?, scales.as_deref())
        }
    }
}

fn load_source(source: &Source, cutoff: f64) -> Result<Spectrum> {
    match source {
        Source::Model(model) => {
            progress(format!("generating {model} spectrum up to {cutoff}"));
            model.spectrum(cutoff)
        }
        Source::File(path) => models::load_spectrum(path),
    }
}

fn model_poles(source: &Source) -> Option<Vec<f64>> {
    match source {
        Source::Model(model) => Some(model.oracle().poles().to_vec()),
        Source::File(_) => None,
    }
}

/// Executes `config` and returns the rendered report.
pub fn run(config: &RunConfig) -> Result<String> {
    match config.command {
        CommandKind::Filter => {
            let filter = resolve_filter(config, None)?;
            Ok(render_json(&filter.to_record()))
        }
        CommandKind::Estimate | CommandKind::Sweep => {
            let source = config.source.as_ref().expect("estimate has a source");
            let filter = resolve_filter(config, model_poles(source).as_deref())?;
            let spectrum = load_source(source, config.max_cutoff())?;
            let results = estimator::sweep(&spectrum, &filter, &config.cutoffs, config.m)?;
            if config.command == CommandKind::Sweep {
                if let Ok(slope) = estimator::convergence_slope(&results) {
                    progress(format!("fitted error slope vs ln epsilon: {slope:.4}"));
                }
            }
            Ok(render_results(&results, config.format, config.command == CommandKind::Sweep))
        }
        CommandKind::Localized => {
            let source = config.source.as_ref().expect("localized has a source");
            let cutoff = config.cutoffs[0];
            let filter = resolve_filter(config, model_poles(source).as_deref())?;
            let weighted = match (source, config.parity) {
                (Source::Model(Model::Circle), Some(parity)) => localized::circle_projection_weights(cutoff, parity)?,
                (Source::Model(model), _) => WeightedSpectrum::identity(&model.spectrum(cutoff)?),
                (Source::File(path), _) => localized::load_weighted_spectrum(path)?,
            };
            let result = localized::estimate_localized(&weighted, &filter, cutoff, config.m)?;
            Ok(render_results(&[result], config.format, false))
        }
        CommandKind::Oracle => run_oracle(config),
    }
}

const FIT_TIMES: [f64; 2] = [1e-3, 1e-4];

fn run_oracle(config: &RunConfig) -> Result<String> {
    let Some(Source::Model(model)) = config.source else {
        return Err(usage("oracle data exists only for the built-in models"));
    };
    let oracle = model.oracle();
    let residues: Vec<Value> = oracle
        .poles()
        .iter()
        .zip(oracle.coefficients())
        .map(|(&s, &c)| {
            if is_gamma_pole(s) {
                Value::Null
            } else {
                estimator::to_zeta_residue(c, s).map_or(Value::Null, json_number)
            }
        })
        .collect();
    progress("fitting the heat trace");
    let fit_spectrum = model.spectrum(60.0 / FIT_TIMES[1])?;
    let fit = fit_heat_coefficients(&fit_spectrum, oracle.poles(), &FIT_TIMES)?;
    let mut report = json!({
        "model": model.name(),
        "poles": oracle.poles().iter().copied().map(json_number).collect::<Vec<_>>(),
        "coefficients": oracle.coefficients().iter().copied().map(json_number).collect::<Vec<_>>(),
        "zeta_residues": residues,
        "fit_times": FIT_TIMES.iter().copied().map(json_number).collect::<Vec<_>>(),
        "fitted_coefficients": fit.iter().copied().map(json_number).collect::<Vec<_>>(),
    });
    if let Some(&cutoff) = config.cutoffs.first() {
        let spectrum = model.spectrum(cutoff)?;
        let filter = resolve_filter(config, Some(oracle.poles()))?;
        let estimate = estimator::estimate_coefficient(&spectrum, &filter, cutoff, config.m)?;
        let leading = oracle.poles()[0];
        let baseline = estimator::dixmier_baseline(&spectrum, leading, cutoff)?;
        let c0 = gamma(leading)? * baseline;
        let truth = oracle.coefficients()[0];
        report["estimate"] = serde_json::to_value(&estimate).expect("results serialize");
        report["dixmier"] = json!({
            "baseline": json_number(baseline),
            "coefficient": json_number(c0),
            "rel_error": json_number((c0 - truth).abs() / truth.abs()),
        });
    }
    Ok(render_json(&report))
}

fn render_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

/// CSV or JSON for a list of results. A single estimate renders as a JSON
/// object, a sweep as an array.
pub fn render_results(results: &[EstimateResult], format: OutputFormat, as_list: bool) -> String {
    match format {
        OutputFormat::Json if as_list => render_json(&results),
        OutputFormat::Json => render_json(&results[0]),
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in results {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    sig17(r.cutoff),
                    sig17(r.m),
                    sig17(r.epsilon),
                    r.n_terms,
                    sig17(r.estimate),
                    csv_opt(r.oracle),
                    csv_opt(r.abs_error),
                    csv_opt(r.rel_error),
                );
            }
            out
        }
    }
}

/// Parses, runs, and writes the report; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|config| {
        let report = run(&config)?;
        match &config.output {
            Some(path) => std::fs::write(path, report).map_err(|e| Error::Io {
                path: path.clone(),
                reason: e.to_string(),
            }),
            None => {
                print!("{report}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("specres: error: {e}");
            exit_code(&e)
        }
    }
}
