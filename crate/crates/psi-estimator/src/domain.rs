//! Core domain types shared by the solver, the catalog, and the verifier:
//! open parameter domains, observation intervals, and weighted samples.

use std::fmt;

use crate::error::Error;

/// An open interval (lo, hi) of admissible parameter values. Either endpoint
/// may be infinite; `lo < hi` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterDomain {
    lo: f64,
    hi: f64,
}

impl ParameterDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self, Error> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidConfig(
                "parameter domain endpoints must not be NaN".into(),
            ));
        }
        if lo >= hi {
            return Err(Error::InvalidConfig(format!(
                "parameter domain requires lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub const fn positive_half_line() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub const fn unit_interval() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Strict interior membership; endpoints are excluded.
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    /// The point at which a search of this domain starts when no initial
    /// guess is supplied: the midpoint when both endpoints are finite,
    /// otherwise 0 if it is interior, otherwise one unit inside the finite
    /// endpoint (or 0 for the whole real line).
    pub fn reference_point(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            _ if self.contains(0.0) => 0.0,
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }
}

impl fmt::Display for ParameterDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// An interval of real observations with individually open or closed
/// endpoints. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self, Error> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidConfig(
                "interval endpoints must not be NaN".into(),
            ));
        }
        if lo > hi {
            return Err(Error::InvalidConfig(format!(
                "interval requires lo <= hi, got [{lo}, {hi}]"
            )));
        }
        let lo_closed = lo_closed && lo.is_finite();
        let hi_closed = hi_closed && hi.is_finite();
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(Error::InvalidConfig(format!(
                "degenerate interval at {lo} must be closed on both ends"
            )));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self, Error> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self, Error> {
        Self::new(lo, hi, true, true)
    }

    pub const fn all_reals() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lb = if self.lo_closed { '[' } else { '(' };
        let rb = if self.hi_closed { ']' } else { ')' };
        write!(f, "{lb}{}, {}{rb}", self.lo, self.hi)
    }
}

/// Observations paired with nonnegative weights, at least one of which is
/// positive. Weight zero marks an observation as absent without changing
/// the sample length.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    points: Vec<(f64, f64)>,
}

impl WeightedSample {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut any_positive = false;
        for (i, &(x, w)) in points.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Domain(format!("observation {i} is not finite: {x}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!(
                    "weight {i} must be finite and nonnegative, got {w}"
                )));
            }
            if w > 0.0 {
                any_positive = true;
            }
        }
        if !any_positive {
            return Err(Error::ZeroWeightVector);
        }
        Ok(Self { points })
    }

    pub fn unweighted(xs: &[f64]) -> Result<Self, Error> {
        Self::new(xs.iter().map(|&x| (x, 1.0)).collect())
    }

    pub fn from_parts(xs: &[f64], weights: &[f64]) -> Result<Self, Error> {
        if xs.len() != weights.len() {
            return Err(Error::InvalidConfig(format!(
                "observation and weight lengths differ: {} vs {}",
                xs.len(),
                weights.len()
            )));
        }
        Self::new(xs.iter().copied().zip(weights.iter().copied()).collect())
    }

    /// Integer replication counts as weights; count zero drops the point.
    pub fn from_counts(xs: &[f64], counts: &[u64]) -> Result<Self, Error> {
        if xs.len() != counts.len() {
            return Err(Error::InvalidConfig(format!(
                "observation and count lengths differ: {} vs {}",
                xs.len(),
                counts.len()
            )));
        }
        Self::new(
            xs.iter()
                .copied()
                .zip(counts.iter().map(|&k| k as f64))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|&(x, _)| x).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|&(_, w)| w).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|&(_, w)| w).sum()
    }

    /// The same observations with every weight multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self, Error> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Domain(format!(
                "weight scale must be finite and positive, got {s}"
            )));
        }
        Self::new(self.points.iter().map(|&(x, w)| (x, s * w)).collect())
    }
}

/// The contract a psi function must satisfy to be estimated: evaluation on
/// observation/parameter pairs plus the domains the solver must respect.
pub trait PsiFunction {
    /// Value of psi at observation `x` and parameter `t`. `t` is strictly
    /// inside the parameter domain when called by the solver.
    fn eval(&self, x: f64, t: f64) -> Result<f64, Error>;

    /// Open interval of admissible parameter values.
    fn parameter_domain(&self) -> ParameterDomain;

    /// Interval of admissible observations.
    fn observation_domain(&self) -> Interval;

    /// Whether `t -> psi(x, t)` is continuous on the parameter domain for
    /// every admissible `x`. Strict mean-value statements require this.
    fn continuous_in_t(&self) -> bool;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_covers_all_endpoint_shapes() {
        let d = ParameterDomain::new(2.0, 6.0).unwrap();
        assert_eq!(d.reference_point(), 4.0);
        assert_eq!(ParameterDomain::real_line().reference_point(), 0.0);
        let up = ParameterDomain::positive_half_line();
        assert_eq!(up.reference_point(), 1.0);
        let down = ParameterDomain::new(f64::NEG_INFINITY, -3.0).unwrap();
        assert_eq!(down.reference_point(), -4.0);
        let shifted = ParameterDomain::new(-5.0, f64::INFINITY).unwrap();
        assert_eq!(shifted.reference_point(), 0.0);
    }

    #[test]
    fn parameter_domain_rejects_bad_endpoints() {
        assert!(ParameterDomain::new(1.0, 1.0).is_err());
        assert!(ParameterDomain::new(2.0, 1.0).is_err());
        assert!(ParameterDomain::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn interval_membership_respects_endpoint_closure() {
        let half_open = Interval::new(0.0, 1.0, true, false).unwrap();
        assert!(half_open.contains(0.0));
        assert!(!half_open.contains(1.0));
        assert!(half_open.contains(0.5));
        let all = Interval::all_reals();
        assert!(all.contains(-1e300));
        assert!(!all.contains(f64::INFINITY));
    }

    #[test]
    fn weighted_sample_requires_a_positive_weight() {
        assert!(matches!(
            WeightedSample::from_parts(&[1.0, 2.0], &[0.0, 0.0]),
            Err(Error::ZeroWeightVector)
        ));
        assert!(matches!(
            WeightedSample::new(vec![]),
            Err(Error::EmptySample)
        ));
        assert!(WeightedSample::from_parts(&[1.0, 2.0], &[0.0, 3.0]).is_ok());
    }

    #[test]
    fn counts_convert_to_weights() {
        let s = WeightedSample::from_counts(&[1.0, 2.0], &[3, 0]).unwrap();
        assert_eq!(s.weights(), vec![3.0, 0.0]);
        assert!(matches!(
            WeightedSample::from_counts(&[1.0], &[0]),
            Err(Error::ZeroWeightVector)
        ));
    }
}
