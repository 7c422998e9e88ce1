//! Sensitivity witnesses: given two observations whose singleton estimates
//! straddle a target window, find replication counts that drive the
//! two-point estimate into the window.

use crate::catalog::Estimator;
use crate::error::Error;
use crate::solver::SolverConfig;

/// A sensitivity question: can replication counts `(k, m)` for the pair
/// `(x, y)` place the estimate strictly inside `(lower, upper)`?
/// The window must satisfy `estimate(x) < lower < upper < estimate(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityQuery {
    pub x: f64,
    pub y: f64,
    pub lower: f64,
    pub upper: f64,
    /// Largest total count `k + m` to scan.
    pub max_total: u64,
}

impl SensitivityQuery {
    pub const DEFAULT_MAX_TOTAL: u64 = 512;

    pub fn new(x: f64, y: f64, lower: f64, upper: f64) -> Self {
        Self {
            x,
            y,
            lower,
            upper,
            max_total: Self::DEFAULT_MAX_TOTAL,
        }
    }

    pub fn with_max_total(mut self, max_total: u64) -> Self {
        self.max_total = max_total;
        self
    }
}

/// Outcome of a witness scan. Exhausting the budget is a result, not an
/// error: some estimators (maximum, midrange) provably never enter the
/// window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensitivityOutcome {
    /// `estimate(x repeated k times, y repeated m times)` is strictly
    /// inside the window; `k + m` is minimal and, among equal totals, `m`
    /// is minimal.
    Found {
        k: u64,
        m: u64,
        value: f64,
    },
    NotFoundUpToBound {
        max_total: u64,
    },
}

/// Scans totals `q = 2..=max_total` and for each total the counts
/// `(k, m) = (q - p, p)` for `p = 1..q`, returning the first hit.
///
/// Probes that fail with a non-unique sign change (ties of discontinuous
/// families) are skipped; any other solver or domain failure aborts the
/// scan.
pub fn find_sensitivity_witness(
    est: &Estimator,
    query: &SensitivityQuery,
    cfg: &SolverConfig,
) -> Result<SensitivityOutcome, Error> {
    let SensitivityQuery {
        x,
        y,
        lower,
        upper,
        max_total,
    } = *query;
    for v in [x, y, lower, upper] {
        if !v.is_finite() {
            return Err(Error::InvalidQuery(format!(
                "query values must be finite, got {v}"
            )));
        }
    }
    if lower >= upper {
        return Err(Error::InvalidQuery(format!(
            "the window requires lower < upper, got ({lower}, {upper})"
        )));
    }
    if max_total < 2 {
        return Err(Error::InvalidQuery(
            "max_total must allow at least one copy of each observation".into(),
        ));
    }
    cfg.validate()?;

    let at_x = est.estimate_tuple(&[x], cfg)?;
    let at_y = est.estimate_tuple(&[y], cfg)?;
    if !(at_x < lower && upper < at_y) {
        return Err(Error::InvalidQuery(format!(
            "singleton estimates {at_x} and {at_y} do not straddle the window \
             ({lower}, {upper})"
        )));
    }

    for total in 2..=max_total {
        for m in 1..total {
            let k = total - m;
            match est.estimate_pair_counts(x, y, k, m, cfg) {
                Ok(value) => {
                    if lower < value && value < upper {
                        return Ok(SensitivityOutcome::Found { k, m, value });
                    }
                }
                Err(Error::NonUniqueSignChange { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SensitivityOutcome::NotFoundUpToBound { max_total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Psi, ReferenceEstimator};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn mean_window_is_hit_by_the_smallest_total() {
        let est = Estimator::Psi(Psi::normal_location(1.0).unwrap());
        let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4);
        match find_sensitivity_witness(&est, &query, &cfg()).unwrap() {
            SensitivityOutcome::Found { k, m, value } => {
                assert_eq!((k, m), (2, 1));
                assert!((value - 1.0 / 3.0).abs() <= 1e-9);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn maximum_never_enters_an_interior_window() {
        let est = Estimator::Reference(ReferenceEstimator::max());
        let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4).with_max_total(64);
        assert_eq!(
            find_sensitivity_witness(&est, &query, &cfg()).unwrap(),
            SensitivityOutcome::NotFoundUpToBound { max_total: 64 }
        );
    }

    #[test]
    fn midrange_never_enters_an_off_center_window() {
        let est = Estimator::Reference(ReferenceEstimator::mid_range());
        let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4).with_max_total(64);
        assert_eq!(
            find_sensitivity_witness(&est, &query, &cfg()).unwrap(),
            SensitivityOutcome::NotFoundUpToBound { max_total: 64 }
        );
    }

    #[test]
    fn windows_outside_the_singleton_estimates_are_rejected() {
        let est = Estimator::Psi(Psi::normal_location(1.0).unwrap());
        let bad = SensitivityQuery::new(0.0, 1.0, 1.5, 2.0);
        assert!(matches!(
            find_sensitivity_witness(&est, &bad, &cfg()),
            Err(Error::InvalidQuery(_))
        ));
        let inverted = SensitivityQuery::new(0.0, 1.0, 0.4, 0.3);
        assert!(matches!(
            find_sensitivity_witness(&est, &inverted, &cfg()),
            Err(Error::InvalidQuery(_))
        ));
    }

    #[test]
    fn sign_ties_are_skipped_rather_than_fatal() {
        let est = Estimator::Psi(Psi::sign_location());
        // The sign estimate of (x.., y..) is x or y, never interior, and
        // balanced counts are ties: the scan must terminate cleanly.
        let query = SensitivityQuery::new(0.0, 1.0, 0.3, 0.4).with_max_total(16);
        assert_eq!(
            find_sensitivity_witness(&est, &query, &cfg()).unwrap(),
            SensitivityOutcome::NotFoundUpToBound { max_total: 16 }
        );
    }
}
