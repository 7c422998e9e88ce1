//! Mean-value position of concatenated estimates: the estimate of a
//! concatenation of blocks must lie within the span of the per-block
//! estimates, and strictly inside it for continuous estimators whose
//! block estimates actually differ.

use crate::catalog::Estimator;
use crate::error::Error;
use crate::solver::SolverConfig;
use crate::verify::report::{CheckStatus, Dec, Property, PropertyReport, Witness};

fn to_dec_vec(xs: &[f64]) -> Vec<Dec> {
    xs.iter().copied().map(Dec).collect()
}

/// Estimates every block and their concatenation, then checks
/// `min(block estimates) <= concatenated estimate <= max(block estimates)`
/// up to a tolerance of 10 bracket widths.
///
/// When the estimator is continuous and the block estimates differ by more
/// than the tolerance, both inequalities must be strict and the report is
/// tagged [`Property::MeanTypeStrict`]. Solver failures on any block make
/// the check inconclusive; malformed blocks are an error.
pub fn check_mean_type(
    est: &Estimator,
    blocks: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    if blocks.is_empty() {
        return Err(Error::EmptySample);
    }
    if blocks.iter().any(Vec::is_empty) {
        return Err(Error::EmptySample);
    }
    cfg.validate()?;

    let mut block_estimates = Vec::with_capacity(blocks.len());
    for block in blocks {
        match est.estimate_tuple(block, cfg) {
            Ok(v) => block_estimates.push(v),
            Err(e) if e.is_solver_failure() => {
                return Ok(
                    PropertyReport::new(Property::MeanType, CheckStatus::Inconclusive, 0.0)
                        .with_cause(format!("block estimate failed: {e}")),
                );
            }
            Err(e) => return Err(e),
        }
    }
    let concatenated: Vec<f64> = blocks.iter().flatten().copied().collect();
    let concat_estimate = match est.estimate_tuple(&concatenated, cfg) {
        Ok(v) => v,
        Err(e) if e.is_solver_failure() => {
            return Ok(
                PropertyReport::new(Property::MeanType, CheckStatus::Inconclusive, 0.0)
                    .with_cause(format!("concatenated estimate failed: {e}")),
            );
        }
        Err(e) => return Err(e),
    };

    let min = block_estimates
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = block_estimates
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = block_estimates
        .iter()
        .chain(std::iter::once(&concat_estimate))
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 10.0 * cfg.bracket_tol * scale;

    let spread = max - min > tol;
    let strict = spread && est.continuity() == Some(true) && blocks.len() >= 2;
    let (property, holds) = if strict {
        (
            Property::MeanTypeStrict,
            concat_estimate > min + tol && concat_estimate < max - tol,
        )
    } else {
        (
            Property::MeanType,
            concat_estimate >= min - tol && concat_estimate <= max + tol,
        )
    };

    let mut report = PropertyReport::new(
        property,
        if holds {
            CheckStatus::Holds
        } else {
            CheckStatus::Violated
        },
        tol,
    );
    if !holds {
        let margin = (min - concat_estimate).max(concat_estimate - max);
        report = report.with_witness(Witness::MeanType {
            blocks: blocks.iter().map(|b| to_dec_vec(b)).collect(),
            block_estimates: to_dec_vec(&block_estimates),
            concat_estimate: Dec(concat_estimate),
            margin: Dec(margin),
        });
    }
    Ok(report)
}
