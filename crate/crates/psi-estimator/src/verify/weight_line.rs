//! Monotonicity of the estimate along a line `s -> s*a + b` in weight
//! space: as long as the weights stay admissible, the estimate must be a
//! monotone function of `s` (no peak, no valley).

use crate::catalog::Psi;
use crate::domain::{Interval, WeightedSample};
use crate::error::Error;
use crate::solver::{estimate_weighted, SolverConfig};
use crate::verify::monotone::monotone_violation;
use crate::verify::report::{CheckStatus, Dec, Property, PropertyReport, Witness};

/// The set of line parameters `s` for which `s*a + b` is an admissible
/// weight vector: every coordinate nonnegative and not all zero. The
/// result is an interval, possibly unbounded, with the single all-zero
/// point removed when it sits on an endpoint; `None` when no `s` is
/// admissible.
pub fn weight_line_domain(a: &[f64], b: &[f64]) -> Result<Option<Interval>, Error> {
    if a.len() != b.len() {
        return Err(Error::InvalidConfig(format!(
            "direction and offset lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "direction and offset must be finite".into(),
        ));
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&ai, &bi) in a.iter().zip(b) {
        // Need s*ai + bi >= 0.
        if ai > 0.0 {
            lo = lo.max(-bi / ai);
        } else if ai < 0.0 {
            hi = hi.min(-bi / ai);
        } else if bi < 0.0 {
            return Ok(None);
        }
    }
    if lo > hi {
        return Ok(None);
    }

    // Locate the single s (if any) where the whole vector is zero.
    let zero_s = match a.iter().position(|&ai| ai != 0.0) {
        Some(i) => {
            let s0 = -b[i] / a[i];
            if a.iter().zip(b).all(|(&ai, &bi)| s0 * ai + bi == 0.0) {
                Some(s0)
            } else {
                None
            }
        }
        None => {
            // Constant line: admissible iff b itself is admissible.
            if b.iter().all(|&bi| bi == 0.0) {
                return Ok(None);
            }
            None
        }
    };

    let mut lo_closed = lo.is_finite();
    let mut hi_closed = hi.is_finite();
    if let Some(s0) = zero_s {
        // The zero vector can only occur where every constraint is tight,
        // which is an endpoint of the interval.
        if lo == hi && s0 == lo {
            return Ok(None);
        }
        if s0 == lo {
            lo_closed = false;
        }
        if s0 == hi {
            hi_closed = false;
        }
    }
    Ok(Some(Interval::new(lo, hi, lo_closed, hi_closed)?))
}

/// Evaluates the estimator on `grid_size` equally spaced admissible points
/// of the weight line and checks the estimates for a peak or valley deeper
/// than 10 bracket widths. Open or infinite ends of the admissible
/// interval are pulled inward before gridding.
pub fn check_weight_line_monotone(
    psi: &Psi,
    xs: &[f64],
    a: &[f64],
    b: &[f64],
    grid_size: usize,
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.len() != xs.len() || b.len() != xs.len() {
        return Err(Error::InvalidConfig(format!(
            "weight line dimensions {}/{} do not match the sample length {}",
            a.len(),
            b.len(),
            xs.len()
        )));
    }
    if grid_size < 3 {
        return Err(Error::InvalidConfig(
            "a monotonicity grid needs at least 3 points".into(),
        ));
    }
    cfg.validate()?;

    let domain = weight_line_domain(a, b)?.ok_or_else(|| {
        Error::Domain("the weight line contains no admissible weight vector".into())
    })?;

    // Bounded, slightly interior gridding window.
    const SPAN: f64 = 100.0;
    const EDGE: f64 = 1e-4;
    let mut glo = domain.lo;
    let mut ghi = domain.hi;
    if !domain.lo_closed || glo < -SPAN {
        glo = glo.max(-SPAN) + EDGE;
    }
    if !domain.hi_closed || ghi > SPAN {
        ghi = ghi.min(SPAN) - EDGE;
    }
    if glo > ghi {
        // The admissible interval is narrower than the edge pull-in; grid
        // its midpoint only, which is trivially monotone.
        glo = 0.5 * (domain.lo + domain.hi);
        ghi = glo;
    }

    let mut s_values = Vec::with_capacity(grid_size);
    let mut estimates = Vec::with_capacity(grid_size);
    for idx in 0..grid_size {
        let frac = idx as f64 / (grid_size - 1) as f64;
        let s = glo + frac * (ghi - glo);
        let weights: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(&ai, &bi)| (s * ai + bi).max(0.0))
            .collect();
        let sample = match WeightedSample::from_parts(xs, &weights) {
            Ok(sample) => sample,
            Err(_) => {
                return Ok(PropertyReport::new(
                    Property::WeightLineMonotone,
                    CheckStatus::Inconclusive,
                    0.0,
                )
                .with_cause(format!("grid point s = {s} left the admissible weights")));
            }
        };
        match estimate_weighted(psi, &sample, cfg) {
            Ok(r) => {
                s_values.push(s);
                estimates.push(r.theta_hat);
            }
            Err(e) if e.is_solver_failure() => {
                return Ok(PropertyReport::new(
                    Property::WeightLineMonotone,
                    CheckStatus::Inconclusive,
                    0.0,
                )
                .with_cause(format!("estimate at s = {s} failed: {e}")));
            }
            Err(e) => return Err(e),
        }
    }

    let scale = estimates.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 10.0 * cfg.bracket_tol * scale;
    match monotone_violation(&estimates, tol) {
        None => Ok(PropertyReport::new(
            Property::WeightLineMonotone,
            CheckStatus::Holds,
            tol,
        )),
        Some((i, j, k)) => {
            let triple = [estimates[i], estimates[j], estimates[k]];
            let peak = triple[1] - triple[0].max(triple[2]);
            let valley = triple[0].min(triple[2]) - triple[1];
            let witness = Witness::WeightLine {
                xs: xs.iter().copied().map(Dec).collect(),
                direction: a.iter().copied().map(Dec).collect(),
                offset: b.iter().copied().map(Dec).collect(),
                s_values: [Dec(s_values[i]), Dec(s_values[j]), Dec(s_values[k])],
                estimates: [Dec(triple[0]), Dec(triple[1]), Dec(triple[2])],
                margin: Dec(peak.max(valley)),
            };
            Ok(
                PropertyReport::new(Property::WeightLineMonotone, CheckStatus::Violated, tol)
                    .with_witness(witness),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Psi;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn swap_line_between_two_unit_masses() {
        // Weights (1-s, s) for s in [0, 1]: both ends keep one coordinate
        // positive, so the full closed interval is admissible.
        let d = weight_line_domain(&[-1.0, 1.0], &[1.0, 0.0])
            .unwrap()
            .unwrap();
        assert_eq!(
            (d.lo, d.hi, d.lo_closed, d.hi_closed),
            (0.0, 1.0, true, true)
        );
    }

    #[test]
    fn ray_through_zero_is_open_at_the_zero_vector() {
        let d = weight_line_domain(&[1.0, 2.0], &[0.0, 0.0])
            .unwrap()
            .unwrap();
        assert_eq!((d.lo, d.lo_closed), (0.0, false));
        assert_eq!(d.hi, f64::INFINITY);
    }

    #[test]
    fn infeasible_and_constant_lines() {
        assert!(weight_line_domain(&[0.0, 0.0], &[1.0, -1.0])
            .unwrap()
            .is_none());
        assert!(weight_line_domain(&[0.0], &[0.0]).unwrap().is_none());
        let whole = weight_line_domain(&[0.0, 0.0], &[2.0, 1.0])
            .unwrap()
            .unwrap();
        assert_eq!(whole.lo, f64::NEG_INFINITY);
        assert_eq!(whole.hi, f64::INFINITY);
        let opposed = weight_line_domain(&[1.0, -1.0], &[0.0, 0.0]).unwrap();
        assert!(opposed.is_none());
    }

    #[test]
    fn mean_moves_monotonically_along_a_swap_line() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_weight_line_monotone(&psi, &[0.0, 10.0], &[-1.0, 1.0], &[1.0, 0.0], 17, &cfg())
                .unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let psi = Psi::normal_location(1.0).unwrap();
        assert!(
            check_weight_line_monotone(&psi, &[1.0], &[1.0, 2.0], &[0.0, 0.0], 9, &cfg()).is_err()
        );
    }
}
