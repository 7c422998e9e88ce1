//! psiest: estimate sign-change parameters from data files, run property
//! suites, search for sensitivity witnesses, and replay the built-in
//! demonstrations.
//!
//! Exit codes: 0 success or Holds, 1 property Violated, 2 usage/IO/domain
//! error, 3 demo regression, 4 solver failure (no or non-unique sign
//! change, iteration budget exhausted).

mod demos;
mod ingest;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use psi_estimator::verify::{
    find_sensitivity_witness, run_suite, CheckStatus, Dec, Property, SensitivityOutcome,
    SensitivityQuery, SuiteConfig,
};
use psi_estimator::{
    Error, Estimator, PsiFunction, SolveStatus, SolverConfig, WeightedSample, DEFAULT_SEED,
};

use demos::DemoId;
use ingest::DataFormat;

#[derive(Parser)]
#[command(
    name = "psiest",
    version,
    about = "Weighted sign-change estimation and property verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// Relative bracket width at which bisection stops.
    #[arg(long, value_name = "TOL")]
    bracket_tol: Option<f64>,

    /// Magnitude treated as an exact zero of the weighted sum.
    #[arg(long, value_name = "TOL")]
    zero_tol: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = self.bracket_tol {
            cfg.bracket_tol = tol;
        }
        if let Some(tol) = self.zero_tol {
            cfg.zero_tol = tol;
        }
        cfg.validate().map_err(CliError::from)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the parameter for a data file.
    Estimate {
        /// Estimator descriptor, e.g. normal(sigma=1) or alpha-density.
        #[arg(long, value_name = "SPEC")]
        psi: String,

        /// Input file with one observation per row.
        #[arg(long, value_name = "PATH")]
        data: PathBuf,

        /// Input layout.
        #[arg(long, value_enum, default_value = "csv")]
        format: DataFormat,

        /// Weight column/field name, or an inline list like "3,1,2".
        #[arg(long, value_name = "COL|LIST")]
        weights: Option<String>,

        #[command(flatten)]
        solver: SolverArgs,

        /// Emit a machine-readable report instead of a bare number.
        #[arg(long)]
        json: bool,
    },

    /// Run a randomized property suite and report Holds/Violated.
    Check {
        /// Property name, e.g. mean-type or bisymmetry-2x2.
        #[arg(value_name = "PROPERTY")]
        property: String,

        /// Estimator descriptor the suite draws instances for.
        #[arg(long, value_name = "SPEC")]
        psi: String,

        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        trials: u64,

        /// Seed for instance generation (falls back to PSIEST_SEED, then 42).
        #[arg(long)]
        seed: Option<u64>,

        #[command(flatten)]
        solver: SolverArgs,

        /// Emit the full report as JSON.
        #[arg(long)]
        json: bool,
    },

    /// Search replication counts steering the estimate into a window.
    Sensitivity {
        /// Estimator descriptor.
        #[arg(long, value_name = "SPEC")]
        psi: String,

        /// First observation value.
        #[arg(long)]
        x: f64,

        /// Second observation value.
        #[arg(long)]
        y: f64,

        /// Lower edge of the open target window.
        #[arg(long)]
        u: f64,

        /// Upper edge of the open target window.
        #[arg(long)]
        v: f64,

        /// Largest total count k + m to try.
        #[arg(long, default_value_t = 512)]
        max_total: u64,

        #[command(flatten)]
        solver: SolverArgs,

        /// Emit the outcome as JSON.
        #[arg(long)]
        json: bool,
    },

    /// Replay a built-in demonstration and verify its numbers.
    Demo {
        #[arg(value_enum, value_name = "ID")]
        id: DemoId,
    },
}

/// Error carrier mapping onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unknown names, malformed descriptors: exit 2.
    Usage(String),
    /// Unreadable or invalid input data, domain violations: exit 2.
    Data(String),
    /// The solver could not certify a unique sign change: exit 4.
    Solver(String),
    /// A demo failed to reproduce its pinned numbers: exit 3.
    Regression(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Data(_) => 2,
            CliError::Regression(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Data(m)
            | CliError::Solver(m)
            | CliError::Regression(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Estimate {
            psi,
            data,
            format,
            weights,
            solver,
            json,
        } => {
            let est = parse_spec(&psi)?;
            let cfg = solver.config()?;
            let sample = ingest::ingest(&data, format, weights.as_deref())?;
            validate_domain(&est, &sample)?;
            run_estimate(&est, &sample, &cfg, json)
        }
        Command::Check {
            property,
            psi,
            trials,
            seed,
            solver,
            json,
        } => {
            let est = parse_spec(&psi)?;
            let cfg = SuiteConfig {
                trials,
                seed: resolve_seed(seed)?,
                solver: solver.config()?,
            };
            run_check(&property, &est, &cfg, json)
        }
        Command::Sensitivity {
            psi,
            x,
            y,
            u,
            v,
            max_total,
            solver,
            json,
        } => {
            let est = parse_spec(&psi)?;
            let cfg = solver.config()?;
            run_sensitivity(&est, x, y, u, v, max_total, &cfg, json)
        }
        Command::Demo { id } => {
            demos::run_demo(id)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_spec(spec: &str) -> Result<Estimator, CliError> {
    spec::parse_estimator(spec).map_err(|m| CliError::Usage(format!("--psi {m}")))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("PSIEST_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!("PSIEST_SEED=`{text}` is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Pre-checks positively weighted observations against the observation
/// domain so the report can cite rows instead of a bare solver error.
fn validate_domain(est: &Estimator, sample: &WeightedSample) -> Result<(), CliError> {
    let Estimator::Psi(psi) = est else {
        return Ok(());
    };
    let domain = psi.observation_domain();
    let bad: Vec<String> = sample
        .points()
        .iter()
        .enumerate()
        .filter(|(_, (x, w))| *w > 0.0 && !domain.contains(*x))
        .map(|(i, (x, _))| format!("row {} (x = {x})", i + 1))
        .take(6)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!(
            "observations outside the domain {domain} of {}: {}",
            est.label(),
            bad.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct EstimateOutput {
    command: &'static str,
    psi: String,
    observations: usize,
    total_weight: Dec,
    theta: Dec,
    status: &'static str,
    bracket: [Dec; 2],
    iterations: u32,
}

fn run_estimate(
    est: &Estimator,
    sample: &WeightedSample,
    cfg: &SolverConfig,
    json: bool,
) -> Result<ExitCode, CliError> {
    match est.solve_weighted(sample, cfg)? {
        Some(result) => {
            if json {
                let out = EstimateOutput {
                    command: "estimate",
                    psi: est.label(),
                    observations: sample.points().len(),
                    total_weight: Dec(sample.total_weight()),
                    theta: Dec(result.theta_hat),
                    status: match result.status {
                        SolveStatus::ZeroPoint => "zero-point",
                        SolveStatus::SignChange => "sign-change",
                    },
                    bracket: [Dec(result.bracket.0), Dec(result.bracket.1)],
                    iterations: result.iterations,
                };
                println!("{}", to_json(&out));
            } else {
                println!("{}", result.theta_hat);
            }
            Ok(ExitCode::SUCCESS)
        }
        // Tuple-only references have no solver trace to report.
        None => {
            let value = est.estimate_weighted(sample, cfg)?;
            if json {
                let out = EstimateOutput {
                    command: "estimate",
                    psi: est.label(),
                    observations: sample.points().len(),
                    total_weight: Dec(sample.total_weight()),
                    theta: Dec(value),
                    status: "direct",
                    bracket: [Dec(value), Dec(value)],
                    iterations: 0,
                };
                println!("{}", to_json(&out));
            } else {
                println!("{value}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_property(name: &str) -> Result<Property, CliError> {
    if name == "sensitivity" {
        return Err(CliError::Usage(
            "`sensitivity` is a dedicated subcommand: psiest sensitivity --help".into(),
        ));
    }
    serde_json::from_value(serde_json::Value::String(name.to_owned())).map_err(|_| {
        CliError::Usage(format!(
            "unknown property `{name}`; expected one of mean-type, weight-line-monotone, \
             bisymmetry, bisymmetry-2x2, replication-limit, weight-continuity, \
             null-homogeneity, permutation-invariance, quasi-affine-monotone"
        ))
    })
}

fn run_check(
    name: &str,
    est: &Estimator,
    cfg: &SuiteConfig,
    json: bool,
) -> Result<ExitCode, CliError> {
    let property = parse_property(name)?;
    let report = run_suite(property, est, cfg).map_err(|e| match e {
        Error::Unsupported(m) => CliError::Usage(m),
        other => CliError::from(other),
    })?;
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{}: {}", report.property, report.status);
        println!(
            "trials: {}  seed: {}  tolerance: {:e}",
            report.trials, report.seed, report.tolerance.0
        );
        if let Some(witness) = &report.witness {
            println!(
                "witness: {}",
                serde_json::to_string(witness).expect("witness serializes")
            );
        }
        if let Some(cause) = &report.cause {
            println!("cause: {cause}");
        }
    }
    match report.status {
        CheckStatus::Holds => Ok(ExitCode::SUCCESS),
        CheckStatus::Violated => Ok(ExitCode::from(1)),
        CheckStatus::Inconclusive => Ok(ExitCode::from(4)),
    }
}

#[derive(Serialize)]
struct SensitivityOutput {
    command: &'static str,
    psi: String,
    x: Dec,
    y: Dec,
    lower: Dec,
    upper: Dec,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Dec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_total: Option<u64>,
}

#[allow(clippy::too_many_arguments)]
fn run_sensitivity(
    est: &Estimator,
    x: f64,
    y: f64,
    u: f64,
    v: f64,
    max_total: u64,
    cfg: &SolverConfig,
    json: bool,
) -> Result<ExitCode, CliError> {
    let query = SensitivityQuery::new(x, y, u, v).with_max_total(max_total);
    let outcome = find_sensitivity_witness(est, &query, cfg).map_err(|e| match e {
        Error::InvalidQuery(m) => CliError::Usage(m),
        other => CliError::from(other),
    })?;
    let mut out = SensitivityOutput {
        command: "sensitivity",
        psi: est.label(),
        x: Dec(x),
        y: Dec(y),
        lower: Dec(u),
        upper: Dec(v),
        outcome: "not-found-up-to-bound",
        k: None,
        m: None,
        value: None,
        max_total: None,
    };
    match outcome {
        SensitivityOutcome::Found { k, m, value } => {
            out.outcome = "found";
            out.k = Some(k);
            out.m = Some(m);
            out.value = Some(Dec(value));
            if json {
                println!("{}", to_json(&out));
            } else {
                println!("found: k = {k}, m = {m}, estimate = {value}");
            }
        }
        SensitivityOutcome::NotFoundUpToBound { max_total } => {
            out.max_total = Some(max_total);
            if json {
                println!("{}", to_json(&out));
            } else {
                println!("not found up to total count {max_total}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}
