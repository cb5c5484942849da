use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use plsaddle::harness::{compare_savings, emit_table, ExperimentConfig, TableFormat};
use plsaddle::problem::ProblemConfig;
use plsaddle::validation::{inject_fault, validate_problem, Fault, ValidationOptions};
use plsaddle::{BoundSet, Error};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "plsaddle",
    version,
    about = "Nested gradient solver for PL saddle problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output format.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Overrides the config's output path. Stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a-priori iteration bounds for a problem.
    Bounds {
        #[arg(long)]
        problem: String,
        /// Problem parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long = "C1", default_value_t = 100.0, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long = "C2", default_value_t = 100.0, allow_negative_numbers = true)]
        c2: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Try to falsify a problem's declared constants by sampling.
    Validate {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        params: Option<String>,
        /// Sample count for every check.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deliberately break the problem before checking it.
        #[arg(long, value_enum)]
        fault: Option<FaultKind>,
        #[arg(long)]
        fault_factor: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Json => TableFormat::Json,
            Format::Text => TableFormat::Text,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultKind {
    ScaledGrad,
    InflatedMu2,
    UnderstatedL22,
}

impl FaultKind {
    fn build(self, factor: Option<f64>) -> Fault {
        match self {
            FaultKind::ScaledGrad => Fault::ScaledGradX(factor.unwrap_or(1.01)),
            FaultKind::InflatedMu2 => Fault::InflatedMu2(factor.unwrap_or(100.0)),
            FaultKind::UnderstatedL22 => Fault::UnderstatedL22(factor.unwrap_or(0.99)),
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonFinite { .. } => EXIT_ABORT,
        _ => EXIT_CONFIG,
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(bytes: &[u8]) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn problem_config(name: &str, params: Option<&str>) -> Result<ProblemConfig, Error> {
    let params = match params {
        Some(text) => serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("--params is not valid JSON: {e}")))?,
        None => serde_json::Value::Null,
    };
    Ok(ProblemConfig {
        name: name.to_string(),
        params,
    })
}

fn run(config: PathBuf, format: Option<Format>, out: Option<PathBuf>) -> Result<u8, Error> {
    let cfg = ExperimentConfig::load(&config)?;
    let records = plsaddle::harness::run_experiment(&cfg)?;
    let output = cfg.output.clone().unwrap_or_default();
    let format = format.map(TableFormat::from).unwrap_or(output.format);
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    let bytes = emit_table(&rows, format);
    match out.or(output.path) {
        Some(path) => std::fs::write(&path, &bytes)?,
        None => emit(&bytes)?,
    }
    let finished: Vec<_> = records
        .iter()
        .filter(|r| !r.failed())
        .map(|r| r.row.clone())
        .collect();
    if !finished.is_empty() {
        eprint!("{}", compare_savings(&finished));
    }
    // warnings and aborts were logged by the harness
    Ok(if records.iter().any(|r| r.failed()) {
        EXIT_ABORT
    } else {
        0
    })
}

fn bounds(
    problem: &str,
    params: Option<&str>,
    gamma: f64,
    c1: f64,
    c2: f64,
    format: ReportFormat,
) -> Result<u8, Error> {
    for (name, v) in [("gamma", gamma), ("C1", c1), ("C2", c2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let p = problem_config(problem, params)?.build()?;
    let set = BoundSet::evaluate(p.constants(), gamma, c1, c2);
    let text = match format {
        ReportFormat::Text => set.to_string(),
        ReportFormat::Json => serde_json::to_string_pretty(&set).expect("bounds serialize") + "\n",
    };
    emit(text.as_bytes())?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn validate(
    problem: &str,
    params: Option<&str>,
    samples: Option<usize>,
    radius: f64,
    seed: u64,
    fault: Option<FaultKind>,
    fault_factor: Option<f64>,
    format: ReportFormat,
) -> Result<u8, Error> {
    let mut p = problem_config(problem, params)?.build()?;
    if let Some(kind) = fault {
        p = inject_fault(&p, kind.build(fault_factor))?;
    }
    let mut opts = ValidationOptions {
        box_radius: radius,
        seed,
        ..ValidationOptions::default()
    };
    if let Some(n) = samples {
        opts.gradient_samples = n;
        opts.lipschitz_pairs = n;
        opts.pl_samples = n;
    }
    let reports = validate_problem(&p, &opts)?;
    let text = match format {
        ReportFormat::Text => reports.iter().map(|r| format!("{r}\n")).collect(),
        ReportFormat::Json => {
            serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
        }
    };
    emit(text.as_bytes())?;
    Ok(if reports.iter().all(|r| r.passed) {
        0
    } else {
        EXIT_VALIDATION
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            format,
            out,
        } => run(config, format, out),
        Command::Bounds {
            problem,
            params,
            gamma,
            c1,
            c2,
            format,
        } => bounds(&problem, params.as_deref(), gamma, c1, c2, format),
        Command::Validate {
            problem,
            params,
            samples,
            radius,
            seed,
            fault,
            fault_factor,
            format,
        } => validate(
            &problem,
            params.as_deref(),
            samples,
            radius,
            seed,
            fault,
            fault_factor,
            format,
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
