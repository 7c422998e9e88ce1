//! Built-in demonstrations with pinned expected outcomes. Each demo
//! prints a short report and re-verifies the numbers it prints; any
//! mismatch is a build regression (exit code 3).

use psi_estimator::verify::{
    check_bisymmetry, check_mean_type, find_sensitivity_witness, CheckStatus, SensitivityOutcome,
    SensitivityQuery, Witness,
};
use psi_estimator::{
    estimate_weighted, kappa, Error, Estimator, Psi, ReferenceEstimator, SolverConfig,
    WeightedSample,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DemoId {
    KappaMeanType,
    KappaBisymmetry,
    SignTable,
    Replication,
    SensitivityNormal,
    SensitivityMax,
}

const EXACT: f64 = 1e-12;

pub fn run_demo(id: DemoId) -> Result<(), CliError> {
    match id {
        DemoId::KappaMeanType => kappa_mean_type(),
        DemoId::KappaBisymmetry => kappa_bisymmetry(),
        DemoId::SignTable => sign_table(),
        DemoId::Replication => replication(),
        DemoId::SensitivityNormal => sensitivity_normal(),
        DemoId::SensitivityMax => sensitivity_max(),
    }
}

fn regression(msg: impl Into<String>) -> CliError {
    CliError::Regression(msg.into())
}

fn expect_value(label: &str, got: f64, want: f64) -> Result<(), CliError> {
    if (got - want).abs() <= EXACT {
        Ok(())
    } else {
        Err(regression(format!("{label}: got {got}, expected {want}")))
    }
}

/// The additive-geometric blend is a mean but not mean-type: pooling two
/// tuples with equal summaries escapes their common value.
fn kappa_mean_type() -> Result<(), CliError> {
    let pairs: [(&[f64], f64); 3] = [
        (&[1.0, 81.0], 25.0),
        (&[25.0, 25.0], 25.0),
        (&[1.0, 81.0, 25.0, 25.0], 24.0),
    ];
    for (xs, want) in pairs {
        let got = kappa(xs).map_err(|e| regression(e.to_string()))?;
        let shown: Vec<String> = xs.iter().map(|v| format!("{v}")).collect();
        println!("kappa({}) = {got}", shown.join(", "));
        expect_value("kappa", got, want)?;
    }
    let est = Estimator::Reference(ReferenceEstimator::kappa());
    let report = check_mean_type(
        &est,
        &[vec![1.0, 81.0], vec![25.0, 25.0]],
        &SolverConfig::default(),
    )
    .map_err(|e| regression(e.to_string()))?;
    if report.status != CheckStatus::Violated {
        return Err(regression(format!(
            "mean-type check reported {} instead of Violated",
            report.status
        )));
    }
    println!("mean-type VIOLATED: pooling blocks with summaries 25 and 25 yields 24");
    Ok(())
}

/// On a 4x2 grid every row summary (25) exceeds every column summary (24),
/// so aggregating rows-then-columns cannot match columns-then-rows.
fn kappa_bisymmetry() -> Result<(), CliError> {
    let est = Estimator::Reference(ReferenceEstimator::kappa());
    let observations = vec![
        vec![1.0, 81.0],
        vec![81.0, 1.0],
        vec![25.0, 25.0],
        vec![25.0, 25.0],
    ];
    println!("grid rows: (1, 81), (81, 1), (25, 25), (25, 25)");
    let weights = vec![vec![1.0; 2]; 4];
    let report = check_bisymmetry(&est, &observations, &weights, &SolverConfig::default())
        .map_err(|e| regression(e.to_string()))?;
    let Some(Witness::Bisymmetry {
        row_estimates,
        column_estimates,
        ..
    }) = &report.witness
    else {
        return Err(regression(format!(
            "bisymmetry check reported {} without a grid witness",
            report.status
        )));
    };
    let rows: Vec<String> = row_estimates.iter().map(|d| format!("{}", d.0)).collect();
    let cols: Vec<String> = column_estimates
        .iter()
        .map(|d| format!("{}", d.0))
        .collect();
    println!("row estimates:    {}", rows.join(", "));
    println!("column estimates: {}", cols.join(", "));
    for d in row_estimates {
        expect_value("row estimate", d.0, 25.0)?;
    }
    for d in column_estimates {
        expect_value("column estimate", d.0, 24.0)?;
    }
    println!("bisymmetry VIOLATED: every row estimate (25) exceeds every column estimate (24)");
    Ok(())
}

/// The two-point sign estimator picks whichever observation carries the
/// majority weight and has no unique value at an exact tie.
fn sign_table() -> Result<(), CliError> {
    let psi = Psi::sign_location();
    let cfg = SolverConfig::default();
    let (x, y) = (2.0, 7.0);
    println!("two-point sign estimator on (x, y) = ({x}, {y}) with weights (lambda, 1 - lambda)");
    for (lambda, want, side) in [(0.25, y, "y"), (0.75, x, "x")] {
        let sample = WeightedSample::from_parts(&[x, y], &[lambda, 1.0 - lambda])
            .map_err(|e| regression(e.to_string()))?;
        let got = estimate_weighted(&psi, &sample, &cfg)
            .map_err(|e| regression(e.to_string()))?
            .theta_hat;
        let relation = if lambda < 0.5 { "<" } else { ">" };
        println!("  lambda = {lambda} ({relation} 1/2) -> {side} = {want}");
        // The estimate sits at a jump of the weighted sign sum; the
        // solver brackets it to relative precision, not exactly.
        if (got - want).abs() > 1e-9 * want.abs() {
            return Err(regression(format!(
                "sign estimate at lambda = {lambda}: got {got}, expected {want}"
            )));
        }
    }
    let tied =
        WeightedSample::from_parts(&[x, y], &[0.5, 0.5]).map_err(|e| regression(e.to_string()))?;
    match estimate_weighted(&psi, &tied, &cfg) {
        Err(Error::NonUniqueSignChange { lo, hi }) => {
            println!(
                "  lambda = 1/2 -> no unique estimate: the weighted signs cancel on all of \
                 ({x}, {y}); the solver found a flat stretch near t = {:.2}",
                0.5 * (lo + hi)
            );
            Ok(())
        }
        other => Err(regression(format!(
            "tied weights should yield a non-unique sign change, got {other:?}"
        ))),
    }
}

/// Replicating the block (0) l times against one copy of (1) pulls the
/// location estimate to l/(l+1) * 0 + 1/(l+1); the error decays like
/// 1/(l+1) and vanishes in the limit.
fn replication() -> Result<(), CliError> {
    let psi = Psi::normal_location(1.0).map_err(|e| regression(e.to_string()))?;
    let cfg = SolverConfig::default();
    println!("location estimate for l copies of the block (0) plus one copy of (1):");
    println!("{:>6}  {:>22}  {:>22}", "l", "estimate", "1/(l+1)");
    for p in 0..=10u32 {
        let l = 1u64 << p;
        let sample = WeightedSample::from_parts(&[0.0, 1.0], &[l as f64, 1.0])
            .map_err(|e| regression(e.to_string()))?;
        let got = estimate_weighted(&psi, &sample, &cfg)
            .map_err(|e| regression(e.to_string()))?
            .theta_hat;
        let want = 1.0 / (l as f64 + 1.0);
        println!("{l:>6}  {got:>22}  {want:>22}");
        expect_value("replicated estimate", got, want)?;
    }
    println!("the estimate tracks 1/(l+1) and collapses to the base value 0 as l grows");
    Ok(())
}

/// With k copies of 0 and m copies of 1 the location estimate is
/// m/(k+m), which reaches the window (0.3, 0.4) at (k, m) = (2, 1).
fn sensitivity_normal() -> Result<(), CliError> {
    let est = Estimator::Psi(Psi::normal_location(1.0).map_err(|e| regression(e.to_string()))?);
    let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4);
    println!("searching counts (k, m) with estimate(k x 0, m x 1) inside (0.3, 0.4)");
    match find_sensitivity_witness(&est, &query, &SolverConfig::default())
        .map_err(|e| regression(e.to_string()))?
    {
        SensitivityOutcome::Found { k, m, value } => {
            println!("found: k = {k}, m = {m}, estimate = {value}");
            if (k, m) != (2, 1) {
                return Err(regression(format!(
                    "expected the minimal witness (2, 1), got ({k}, {m})"
                )));
            }
            expect_value("witness estimate", value, 1.0 / 3.0)
        }
        other => Err(regression(format!(
            "expected a witness for the location estimate, got {other:?}"
        ))),
    }
}

/// The maximum of a batch of 0s and 1s is always 0 or 1, so no counts
/// can place it inside (0.3, 0.4).
fn sensitivity_max() -> Result<(), CliError> {
    let est = Estimator::Reference(ReferenceEstimator::max());
    let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4);
    println!("searching counts (k, m) with max(k x 0, m x 1) inside (0.3, 0.4)");
    match find_sensitivity_witness(&est, &query, &SolverConfig::default())
        .map_err(|e| regression(e.to_string()))?
    {
        SensitivityOutcome::NotFoundUpToBound { max_total } => {
            println!(
                "not found up to total count {max_total}: the maximum jumps from 0 to 1 \
                 and never enters the window"
            );
            Ok(())
        }
        other => Err(regression(format!(
            "expected no witness for the maximum, got {other:?}"
        ))),
    }
}
