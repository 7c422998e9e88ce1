//! Grid bisymmetry: estimating rows first and columns first must be
//! compatible, in the sense that the smallest row estimate cannot exceed
//! the largest column estimate.

use crate::catalog::Estimator;
use crate::domain::WeightedSample;
use crate::error::Error;
use crate::solver::SolverConfig;
use crate::verify::report::{CheckStatus, Dec, Property, PropertyReport, Witness};

fn grid_shape(observations: &[Vec<f64>], weights: &[Vec<f64>]) -> Result<(usize, usize), Error> {
    let n = observations.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let m = observations[0].len();
    if m == 0 {
        return Err(Error::EmptySample);
    }
    if observations.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidConfig(
            "observation grid rows have unequal lengths".into(),
        ));
    }
    if weights.len() != n || weights.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidConfig(
            "weight grid shape does not match the observation grid".into(),
        ));
    }
    for row in weights {
        for &w in row {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "grid weights must be finite and nonnegative, got {w}"
                )));
            }
        }
    }
    Ok((n, m))
}

/// Checks `min(row estimates) <= max(column estimates)` on an `n x m`
/// grid, where row `i` is estimated with weights `weights[i][..]` and
/// column `j` with weights `weights[..][j]`. Every row and column must
/// carry positive total weight. Solver failures make the check
/// inconclusive.
pub fn check_bisymmetry(
    est: &Estimator,
    observations: &[Vec<f64>],
    weights: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    let (n, m) = grid_shape(observations, weights)?;
    cfg.validate()?;

    for (i, row) in weights.iter().enumerate() {
        if row.iter().sum::<f64>() <= 0.0 {
            return Err(Error::PositivityViolation(format!(
                "row {i} has zero total weight"
            )));
        }
    }
    for j in 0..m {
        if weights.iter().map(|row| row[j]).sum::<f64>() <= 0.0 {
            return Err(Error::PositivityViolation(format!(
                "column {j} has zero total weight"
            )));
        }
    }

    let inconclusive = |what: String| {
        Ok(
            PropertyReport::new(Property::Bisymmetry, CheckStatus::Inconclusive, 0.0)
                .with_cause(what),
        )
    };

    let mut row_estimates = Vec::with_capacity(n);
    for i in 0..n {
        let sample = WeightedSample::from_parts(&observations[i], &weights[i])?;
        match est.estimate_weighted(&sample, cfg) {
            Ok(v) => row_estimates.push(v),
            Err(e) if e.is_solver_failure() => {
                return inconclusive(format!("row {i} estimate failed: {e}"))
            }
            Err(e) => return Err(e),
        }
    }
    let mut column_estimates = Vec::with_capacity(m);
    for j in 0..m {
        let xs: Vec<f64> = (0..n).map(|i| observations[i][j]).collect();
        let ws: Vec<f64> = (0..n).map(|i| weights[i][j]).collect();
        let sample = WeightedSample::from_parts(&xs, &ws)?;
        match est.estimate_weighted(&sample, cfg) {
            Ok(v) => column_estimates.push(v),
            Err(e) if e.is_solver_failure() => {
                return inconclusive(format!("column {j} estimate failed: {e}"))
            }
            Err(e) => return Err(e),
        }
    }

    let min_row = row_estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let max_col = column_estimates
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = row_estimates
        .iter()
        .chain(&column_estimates)
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 10.0 * cfg.bracket_tol * scale;

    if min_row <= max_col + tol {
        Ok(PropertyReport::new(
            Property::Bisymmetry,
            CheckStatus::Holds,
            tol,
        ))
    } else {
        let witness = Witness::Bisymmetry {
            observations: observations
                .iter()
                .map(|row| row.iter().copied().map(Dec).collect())
                .collect(),
            weights: weights
                .iter()
                .map(|row| row.iter().copied().map(Dec).collect())
                .collect(),
            row_estimates: row_estimates.iter().copied().map(Dec).collect(),
            column_estimates: column_estimates.iter().copied().map(Dec).collect(),
            margin: Dec(min_row - max_col),
        };
        Ok(
            PropertyReport::new(Property::Bisymmetry, CheckStatus::Violated, tol)
                .with_witness(witness),
        )
    }
}

/// The 2x2 weighted special case with weight rows `(alpha, beta)` and
/// `(gamma, delta)`; columns use `(alpha, gamma)` and `(beta, delta)`.
/// The report is tagged [`Property::Bisymmetry2x2`].
#[allow(clippy::too_many_arguments)]
pub fn check_bisymmetry_2x2(
    est: &Estimator,
    x: f64,
    y: f64,
    u: f64,
    v: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    let observations = vec![vec![x, y], vec![u, v]];
    let weights = vec![vec![alpha, beta], vec![gamma, delta]];
    let mut report = check_bisymmetry(est, &observations, &weights, cfg)?;
    report.property = Property::Bisymmetry2x2;
    Ok(report)
}
