//! Sign-change solver for decreasing-type estimating functions.
//!
//! The target is the point where `t -> sum_i w_i * psi(x_i, t)` changes sign
//! from positive to negative on an open parameter domain. The solver never
//! uses derivatives: it brackets by expansion from a reference point and
//! then bisects keyed on signs alone, so it also handles functions that are
//! discontinuous or flat away from the crossing.

use crate::domain::{ParameterDomain, PsiFunction, WeightedSample};
use crate::error::Error;

/// Half the significand precision; used to pick probe offsets that are
/// far enough apart to be distinguishable after rounding.
const SQRT_EPS: f64 = 1.4901161193847656e-8; // 2^-26

/// How a solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The estimate is the midpoint of a tolerance-width bracket with a
    /// strict sign change across it.
    SignChange,
    /// The function evaluated to exactly zero at the estimate and changes
    /// sign through it (or the zero set is narrower than tolerance).
    ZeroPoint,
}

/// Result of a successful sign-change search.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub theta_hat: f64,
    /// Function value at `theta_hat`.
    pub residual: f64,
    /// Final bracket; degenerate `(theta_hat, theta_hat)` for exact zeros.
    pub bracket: (f64, f64),
    /// Bisection iterations performed (bracket expansions not included).
    pub iterations: u32,
    /// True when `|residual| <= zero_tol`.
    pub is_zero_point: bool,
    pub status: SolveStatus,
}

/// Tunable tolerances and budgets for the sign-change search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative bracket width at which bisection stops: the bracket must
    /// shrink below `bracket_tol * max(1, |lo|, |hi|)`.
    pub bracket_tol: f64,
    /// Residual magnitude below which the estimate is reported as a zero
    /// point rather than a jump through zero.
    pub zero_tol: f64,
    /// Bisection iteration budget.
    pub max_iterations: u32,
    /// Bracket expansion budget per direction.
    pub max_expansions: u32,
    /// Optional starting point; must lie strictly inside the domain.
    pub initial_guess: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            bracket_tol: 1e-12,
            zero_tol: 1e-9,
            max_iterations: 200,
            max_expansions: 128,
            initial_guess: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.bracket_tol.is_finite() && self.bracket_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bracket_tol must be finite and positive, got {}",
                self.bracket_tol
            )));
        }
        if !(self.zero_tol.is_finite() && self.zero_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "zero_tol must be finite and nonnegative, got {}",
                self.zero_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        if self.max_expansions == 0 {
            return Err(Error::InvalidConfig(
                "max_expansions must be positive".into(),
            ));
        }
        if let Some(g) = self.initial_guess {
            if !g.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "initial_guess must be finite, got {g}"
                )));
            }
        }
        Ok(())
    }
}

fn scale_of(a: f64, b: f64) -> f64 {
    1.0f64.max(a.abs()).max(b.abs())
}

/// Weighted sum of psi values at `t` using Neumaier compensated summation
/// in index order. Zero-weight terms are skipped (their observations are
/// treated as absent). An infinite term short-circuits to that infinity;
/// NaN anywhere is a domain error.
pub fn weighted_sum<P: PsiFunction + ?Sized>(
    psi: &P,
    sample: &WeightedSample,
    t: f64,
) -> Result<f64, Error> {
    if !psi.parameter_domain().contains(t) {
        return Err(Error::Domain(format!(
            "parameter {t} is outside the open domain {}",
            psi.parameter_domain()
        )));
    }
    let x_domain = psi.observation_domain();
    for (i, &(x, w)) in sample.points().iter().enumerate() {
        if w > 0.0 && !x_domain.contains(x) {
            return Err(Error::Domain(format!(
                "observation {i} ({x}) is outside the observation domain {x_domain}"
            )));
        }
    }
    weighted_sum_unchecked(psi, sample, t)
}

fn weighted_sum_unchecked<P: PsiFunction + ?Sized>(
    psi: &P,
    sample: &WeightedSample,
    t: f64,
) -> Result<f64, Error> {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &(x, w) in sample.points() {
        if w == 0.0 {
            continue;
        }
        let term = w * psi.eval(x, t)?;
        if term.is_nan() {
            return Err(Error::Domain(format!(
                "psi({x}, {t}) produced NaN after weighting"
            )));
        }
        let next = sum + term;
        if !next.is_finite() {
            // Infinite partial sums carry no usable compensation; the sign
            // of the infinity is still meaningful to the search.
            if next.is_nan() {
                return Err(Error::Domain(format!(
                    "weighted sum became indeterminate at t = {t}"
                )));
            }
            return Ok(next);
        }
        comp += if sum.abs() >= term.abs() {
            (sum - next) + term
        } else {
            (term - next) + sum
        };
        sum = next;
    }
    let total = sum + comp;
    if total.is_nan() {
        return Err(Error::Domain(format!(
            "weighted sum became indeterminate at t = {t}"
        )));
    }
    Ok(total)
}

enum Probe {
    /// New lower bracket end: the function is positive here.
    Low(f64),
    /// New upper bracket end: the function is negative here.
    High(f64),
    /// Exact zero with a verified sign change through it.
    Accept(f64),
}

struct SignSearch<'a, F> {
    f: F,
    domain: ParameterDomain,
    cfg: &'a SolverConfig,
    iterations: u32,
}

impl<'a, F> SignSearch<'a, F>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    fn eval(&mut self, t: f64) -> Result<f64, Error> {
        let v = (self.f)(t)?;
        if v.is_nan() {
            return Err(Error::Domain(format!("function value at t = {t} is NaN")));
        }
        Ok(v)
    }

    fn probe(&mut self, t: f64) -> Result<Probe, Error> {
        let v = self.eval(t)?;
        if v > 0.0 {
            Ok(Probe::Low(t))
        } else if v < 0.0 {
            Ok(Probe::High(t))
        } else {
            self.resolve_exact_zero(t)
        }
    }

    /// The function is exactly zero at `t`. Look a small step to either
    /// side to decide whether this is a genuine crossing, an offset bracket
    /// end, or a plateau of zeros.
    fn resolve_exact_zero(&mut self, t: f64) -> Result<Probe, Error> {
        let mut delta = self.cfg.bracket_tol.max(SQRT_EPS * 1.0f64.max(t.abs()));
        if self.domain.lo().is_finite() {
            delta = delta.min(0.5 * (t - self.domain.lo()));
        }
        if self.domain.hi().is_finite() {
            delta = delta.min(0.5 * (t - self.domain.hi()).abs());
        }
        if delta <= 0.0 || !self.domain.contains(t - delta) || !self.domain.contains(t + delta) {
            // No room to probe on both sides; accept the zero as-is.
            return Ok(Probe::Accept(t));
        }
        let left = self.eval(t - delta)?;
        let right = self.eval(t + delta)?;
        match (left > 0.0, left < 0.0, right > 0.0, right < 0.0) {
            (true, _, _, true) => Ok(Probe::Accept(t)),
            (_, true, _, _) => Ok(Probe::High(t - delta)),
            (_, _, true, _) => Ok(Probe::Low(t + delta)),
            (false, false, false, false) => {
                // Zero at t - delta, t, and t + delta: a plateau unless the
                // whole span is inside tolerance.
                let width = 2.0 * delta;
                if width > 4.0 * self.cfg.bracket_tol * scale_of(t - delta, t + delta) {
                    Err(Error::NonUniqueSignChange {
                        lo: t - delta,
                        hi: t + delta,
                    })
                } else {
                    Ok(Probe::Accept(t))
                }
            }
            (true, _, false, false) => self.split_zero_pair(t, t + delta),
            (false, false, _, true) => self.split_zero_pair(t - delta, t),
        }
    }

    /// `f` is exactly zero at both `z1 < z2`. Use the midpoint to either
    /// detect a plateau or convert one end into a strict bracket bound.
    fn split_zero_pair(&mut self, z1: f64, z2: f64) -> Result<Probe, Error> {
        let mid = 0.5 * (z1 + z2);
        if mid <= z1 || mid >= z2 {
            return Ok(Probe::Accept(mid.clamp(z1, z2)));
        }
        let v = self.eval(mid)?;
        if v > 0.0 {
            Ok(Probe::Low(mid))
        } else if v < 0.0 {
            Ok(Probe::High(mid))
        } else if (z2 - z1) > 4.0 * self.cfg.bracket_tol * scale_of(z1, z2) {
            Err(Error::NonUniqueSignChange { lo: z1, hi: z2 })
        } else {
            Ok(Probe::Accept(mid))
        }
    }

    /// Next probe location when expanding from `r` toward a domain
    /// endpoint: distance from `r` doubles toward an infinite endpoint and
    /// the remaining gap halves toward a finite one.
    fn expansion_point(&self, r: f64, toward_hi: bool, k: u32) -> f64 {
        let endpoint = if toward_hi {
            self.domain.hi()
        } else {
            self.domain.lo()
        };
        if endpoint.is_infinite() {
            let step = 2.0f64.powi(k as i32 - 1);
            if toward_hi {
                r + step
            } else {
                r - step
            }
        } else {
            let gap = (r - endpoint) * 0.5f64.powi(k as i32);
            endpoint + gap
        }
    }

    fn finish_zero(&self, theta: f64) -> EstimateResult {
        EstimateResult {
            theta_hat: theta,
            residual: 0.0,
            bracket: (theta, theta),
            iterations: self.iterations,
            is_zero_point: true,
            status: SolveStatus::ZeroPoint,
        }
    }

    fn run(&mut self) -> Result<EstimateResult, Error> {
        let r = match self.cfg.initial_guess {
            Some(g) => {
                if !self.domain.contains(g) {
                    return Err(Error::Domain(format!(
                        "initial guess {g} is outside the open domain {}",
                        self.domain
                    )));
                }
                g
            }
            None => self.domain.reference_point(),
        };

        let mut low: Option<f64> = None; // positive value seen here
        let mut high: Option<f64> = None; // negative value seen here
        match self.probe(r)? {
            Probe::Low(t) => low = Some(t),
            Probe::High(t) => high = Some(t),
            Probe::Accept(theta) => return Ok(self.finish_zero(theta)),
        }

        // Expand toward the lower endpoint until a positive value is found.
        let mut k = 0u32;
        while low.is_none() {
            if k >= self.cfg.max_expansions {
                return Err(Error::NoSignChange {
                    expansions: k,
                    context: "no positive value found toward the lower endpoint".into(),
                });
            }
            k += 1;
            let t = self.expansion_point(r, false, k);
            if !self.domain.contains(t) {
                return Err(Error::NoSignChange {
                    expansions: k,
                    context: "expansion reached the lower endpoint".into(),
                });
            }
            match self.probe(t)? {
                Probe::Low(t2) => low = Some(t2),
                Probe::High(t2) => high = Some(high.map_or(t2, |h: f64| h.min(t2))),
                Probe::Accept(theta) => return Ok(self.finish_zero(theta)),
            }
        }

        // Symmetrically expand toward the upper endpoint for a negative.
        let mut k = 0u32;
        while high.is_none() {
            if k >= self.cfg.max_expansions {
                return Err(Error::NoSignChange {
                    expansions: k,
                    context: "no negative value found toward the upper endpoint".into(),
                });
            }
            k += 1;
            let t = self.expansion_point(r, true, k);
            if !self.domain.contains(t) {
                return Err(Error::NoSignChange {
                    expansions: k,
                    context: "expansion reached the upper endpoint".into(),
                });
            }
            match self.probe(t)? {
                Probe::Low(t2) => low = Some(low.map_or(t2, |l: f64| l.max(t2))),
                Probe::High(t2) => high = Some(t2),
                Probe::Accept(theta) => return Ok(self.finish_zero(theta)),
            }
        }

        let mut lo_b = low.expect("lower bracket end is set");
        let mut hi_b = high.expect("upper bracket end is set");
        if lo_b >= hi_b {
            return Err(Error::NoSignChange {
                expansions: k,
                context: format!(
                    "sign pattern is inconsistent with a decreasing-type function \
                     (positive at {lo_b}, negative at {hi_b})"
                ),
            });
        }

        loop {
            let scale = scale_of(lo_b, hi_b);
            if (hi_b - lo_b) <= self.cfg.bracket_tol * scale {
                break;
            }
            let mid = 0.5 * (lo_b + hi_b);
            if !(mid > lo_b && mid < hi_b) {
                // Adjacent floats: the bracket cannot shrink further.
                break;
            }
            if self.iterations >= self.cfg.max_iterations {
                return Err(Error::MaxIterations {
                    limit: self.cfg.max_iterations,
                    lo: lo_b,
                    hi: hi_b,
                });
            }
            self.iterations += 1;
            match self.probe(mid)? {
                Probe::Low(t) => {
                    if t >= hi_b {
                        return Err(Error::NoSignChange {
                            expansions: 0,
                            context: format!(
                                "sign pattern is inconsistent with a decreasing-type \
                                 function near {t}"
                            ),
                        });
                    }
                    lo_b = lo_b.max(t);
                }
                Probe::High(t) => {
                    if t <= lo_b {
                        return Err(Error::NoSignChange {
                            expansions: 0,
                            context: format!(
                                "sign pattern is inconsistent with a decreasing-type \
                                 function near {t}"
                            ),
                        });
                    }
                    hi_b = hi_b.min(t);
                }
                Probe::Accept(theta) => return Ok(self.finish_zero(theta)),
            }
        }

        let theta_hat = 0.5 * (lo_b + hi_b);
        let residual = self.eval(theta_hat)?;
        let is_zero_point = residual.abs() <= self.cfg.zero_tol;
        Ok(EstimateResult {
            theta_hat,
            residual,
            bracket: (lo_b, hi_b),
            iterations: self.iterations,
            is_zero_point,
            status: if is_zero_point {
                SolveStatus::ZeroPoint
            } else {
                SolveStatus::SignChange
            },
        })
    }
}

/// Locates the sign change of `f` (positive below, negative above) on the
/// open `domain`. `f` must be deterministic.
pub fn find_sign_change<F>(
    f: F,
    domain: &ParameterDomain,
    cfg: &SolverConfig,
) -> Result<EstimateResult, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    cfg.validate()?;
    let mut search = SignSearch {
        f,
        domain: *domain,
        cfg,
        iterations: 0,
    };
    search.run()
}

fn validate_observations<P: PsiFunction + ?Sized>(
    psi: &P,
    sample: &WeightedSample,
) -> Result<(), Error> {
    let x_domain = psi.observation_domain();
    for (i, &(x, w)) in sample.points().iter().enumerate() {
        if w > 0.0 && !x_domain.contains(x) {
            return Err(Error::Domain(format!(
                "observation {i} ({x}) is outside the observation domain {x_domain}"
            )));
        }
    }
    Ok(())
}

/// Estimates the parameter for a weighted sample.
pub fn estimate_weighted<P: PsiFunction + ?Sized>(
    psi: &P,
    sample: &WeightedSample,
    cfg: &SolverConfig,
) -> Result<EstimateResult, Error> {
    cfg.validate()?;
    validate_observations(psi, sample)?;
    let domain = psi.parameter_domain();
    find_sign_change(|t| weighted_sum_unchecked(psi, sample, t), &domain, cfg)
}

/// Estimates the parameter for an unweighted sample (all weights 1).
pub fn estimate<P: PsiFunction + ?Sized>(
    psi: &P,
    xs: &[f64],
    cfg: &SolverConfig,
) -> Result<EstimateResult, Error> {
    estimate_weighted(psi, &WeightedSample::unweighted(xs)?, cfg)
}

/// Estimates with integer replication counts used directly as weights.
pub fn estimate_replicated<P: PsiFunction + ?Sized>(
    psi: &P,
    xs: &[f64],
    counts: &[u64],
    cfg: &SolverConfig,
) -> Result<EstimateResult, Error> {
    estimate_weighted(psi, &WeightedSample::from_counts(xs, counts)?, cfg)
}

/// Cross-check variant of [`estimate_replicated`] that physically repeats
/// each observation `counts[i]` times and solves the unweighted problem.
/// Intended for validating the weight route; the total count is capped to
/// keep the materialized sample small.
pub fn estimate_replicated_materialized<P: PsiFunction + ?Sized>(
    psi: &P,
    xs: &[f64],
    counts: &[u64],
    cfg: &SolverConfig,
) -> Result<EstimateResult, Error> {
    const MAX_TOTAL: u64 = 1 << 22;
    if xs.len() != counts.len() {
        return Err(Error::InvalidConfig(format!(
            "observation and count lengths differ: {} vs {}",
            xs.len(),
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroWeightVector);
    }
    if total > MAX_TOTAL {
        return Err(Error::InvalidConfig(format!(
            "materialized sample of {total} observations exceeds the cap of {MAX_TOTAL}"
        )));
    }
    let mut repeated = Vec::with_capacity(total as usize);
    for (&x, &k) in xs.iter().zip(counts) {
        repeated.extend(std::iter::repeat_n(x, k as usize));
    }
    estimate(psi, &repeated, cfg)
}

/// Verifies that `result` still looks like a downward sign change: the
/// function is at least `-zero_tol` just below the estimate and at most
/// `zero_tol` just above it, probing at 10 bracket tolerances.
pub fn certify_sign_change<F>(
    mut f: F,
    result: &EstimateResult,
    domain: &ParameterDomain,
    cfg: &SolverConfig,
) -> Result<bool, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    let (blo, bhi) = result.bracket;
    let offset = 10.0 * cfg.bracket_tol * scale_of(blo, bhi);
    let below = result.theta_hat - offset;
    let above = result.theta_hat + offset;
    if domain.contains(below) {
        let v = f(below)?;
        if v < -cfg.zero_tol {
            return Ok(false);
        }
    }
    if domain.contains(above) {
        let v = f(above)?;
        if v > cfg.zero_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;

    /// Minimal psi for tests: psi(x, t) = x - t on the real line.
    struct Shift;

    impl PsiFunction for Shift {
        fn eval(&self, x: f64, t: f64) -> Result<f64, Error> {
            Ok(x - t)
        }
        fn parameter_domain(&self) -> ParameterDomain {
            ParameterDomain::real_line()
        }
        fn observation_domain(&self) -> Interval {
            Interval::all_reals()
        }
        fn continuous_in_t(&self) -> bool {
            true
        }
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn linear_crossing_is_found_to_tolerance() {
        let f = |t: f64| Ok(3.5 - t);
        let r = find_sign_change(f, &ParameterDomain::real_line(), &cfg()).unwrap();
        assert!((r.theta_hat - 3.5).abs() <= 1e-11);
        assert!(r.bracket.0 <= r.theta_hat && r.theta_hat <= r.bracket.1);
    }

    #[test]
    fn exact_zero_at_reference_point_is_accepted() {
        // Reference point of (0, 2) is 1 and sign(1 - t) is 0 there.
        let f = |t: f64| Ok((1.0f64 - t).signum() * f64::from(t != 1.0));
        let d = ParameterDomain::new(0.0, 2.0).unwrap();
        let r = find_sign_change(f, &d, &cfg()).unwrap();
        assert_eq!(r.theta_hat, 1.0);
        assert_eq!(r.status, SolveStatus::ZeroPoint);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.bracket, (1.0, 1.0));
    }

    #[test]
    fn jump_through_zero_reports_sign_change_status() {
        let f = |t: f64| Ok(if t < 2.0 { 1.0 } else { -1.0 });
        let r = find_sign_change(f, &ParameterDomain::real_line(), &cfg()).unwrap();
        assert!((r.theta_hat - 2.0).abs() <= 1e-11);
        assert_eq!(r.status, SolveStatus::SignChange);
        assert!(!r.is_zero_point);
        assert_eq!(r.residual.abs(), 1.0);
    }

    #[test]
    fn wide_zero_plateau_is_rejected() {
        let f = |t: f64| {
            Ok(if t < 1.0 {
                1.0
            } else if t <= 2.0 {
                0.0
            } else {
                -1.0
            })
        };
        match find_sign_change(f, &ParameterDomain::real_line(), &cfg()) {
            Err(Error::NonUniqueSignChange { lo, hi }) => {
                assert!(lo >= 1.0 - 1e-6 && hi <= 2.0 + 1e-6);
                assert!(hi - lo > 4.0 * cfg().bracket_tol);
            }
            other => panic!("expected a plateau error, got {other:?}"),
        }
    }

    #[test]
    fn all_positive_function_exhausts_upward_expansion() {
        let f = |_t: f64| Ok(1.0);
        match find_sign_change(f, &ParameterDomain::real_line(), &cfg()) {
            Err(Error::NoSignChange { expansions, .. }) => {
                assert_eq!(expansions, cfg().max_expansions);
            }
            other => panic!("expected NoSignChange, got {other:?}"),
        }
    }

    #[test]
    fn expansion_respects_finite_endpoints() {
        // Crossing close to the lower endpoint of (0, inf).
        let f = |t: f64| Ok(1e-6 - t);
        let d = ParameterDomain::positive_half_line();
        let r = find_sign_change(f, &d, &cfg()).unwrap();
        assert!((r.theta_hat - 1e-6).abs() <= 1e-11);
    }

    #[test]
    fn initial_guess_must_be_interior() {
        let d = ParameterDomain::positive_half_line();
        let bad = SolverConfig {
            initial_guess: Some(-1.0),
            ..cfg()
        };
        assert!(matches!(
            find_sign_change(|t| Ok(1.0 - t), &d, &bad),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn weighted_sum_is_compensated_and_ordered() {
        let sample = WeightedSample::from_parts(&[1e16, 1.0, -1e16], &[1.0, 1.0, 1.0]).unwrap();
        let v = weighted_sum(&Shift, &sample, 0.0).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn weighted_sum_skips_zero_weight_terms() {
        struct LogPsi;
        impl PsiFunction for LogPsi {
            fn eval(&self, x: f64, _t: f64) -> Result<f64, Error> {
                if x <= 0.0 {
                    return Err(Error::Domain("x must be positive".into()));
                }
                Ok(x.ln())
            }
            fn parameter_domain(&self) -> ParameterDomain {
                ParameterDomain::real_line()
            }
            fn observation_domain(&self) -> Interval {
                Interval::new(0.0, f64::INFINITY, false, false).unwrap()
            }
            fn continuous_in_t(&self) -> bool {
                true
            }
        }
        // The zero-weight observation sits outside the domain but is absent.
        let sample = WeightedSample::from_parts(&[-5.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(weighted_sum(&LogPsi, &sample, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn weighted_sum_propagates_infinities_without_nan() {
        struct Inv;
        impl PsiFunction for Inv {
            fn eval(&self, x: f64, t: f64) -> Result<f64, Error> {
                Ok(x / t)
            }
            fn parameter_domain(&self) -> ParameterDomain {
                ParameterDomain::positive_half_line()
            }
            fn observation_domain(&self) -> Interval {
                Interval::all_reals()
            }
            fn continuous_in_t(&self) -> bool {
                true
            }
        }
        let sample = WeightedSample::from_parts(&[1e308, 1e308], &[10.0, 10.0]).unwrap();
        let v = weighted_sum(&Inv, &sample, 0.5).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn weighted_sum_rejects_exterior_parameter() {
        let sample = WeightedSample::unweighted(&[1.0]).unwrap();
        struct HalfLine;
        impl PsiFunction for HalfLine {
            fn eval(&self, x: f64, t: f64) -> Result<f64, Error> {
                Ok(x - t)
            }
            fn parameter_domain(&self) -> ParameterDomain {
                ParameterDomain::positive_half_line()
            }
            fn observation_domain(&self) -> Interval {
                Interval::all_reals()
            }
            fn continuous_in_t(&self) -> bool {
                true
            }
        }
        assert!(matches!(
            weighted_sum(&HalfLine, &sample, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            weighted_sum(&HalfLine, &sample, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn estimate_matches_sample_mean_for_shift_psi() {
        let r = estimate(&Shift, &[1.0, 2.0, 6.0], &cfg()).unwrap();
        assert!((r.theta_hat - 3.0).abs() <= 1e-11);
    }

    #[test]
    fn replicated_weight_route_matches_materialized_route() {
        let xs = [1.0, 5.0, 9.0];
        let counts = [3, 1, 2];
        let a = estimate_replicated(&Shift, &xs, &counts, &cfg()).unwrap();
        let b = estimate_replicated_materialized(&Shift, &xs, &counts, &cfg()).unwrap();
        assert!((a.theta_hat - b.theta_hat).abs() <= 2e-12 * a.theta_hat.abs().max(1.0));
    }

    #[test]
    fn zero_counts_drop_observations() {
        let r = estimate_replicated(&Shift, &[100.0, 2.0, 4.0], &[0, 1, 1], &cfg()).unwrap();
        assert!((r.theta_hat - 3.0).abs() <= 1e-11);
    }

    #[test]
    fn certificate_accepts_good_results_and_rejects_frauds() {
        let f = |t: f64| Ok(3.5 - t);
        let d = ParameterDomain::real_line();
        let r = find_sign_change(f, &d, &cfg()).unwrap();
        assert!(certify_sign_change(f, &r, &d, &cfg()).unwrap());
        let fake = EstimateResult {
            theta_hat: 10.0,
            residual: -6.5,
            bracket: (10.0, 10.0),
            iterations: 0,
            is_zero_point: false,
            status: SolveStatus::SignChange,
        };
        assert!(!certify_sign_change(f, &fake, &d, &cfg()).unwrap());
    }

    #[test]
    fn max_iterations_is_enforced() {
        let tight = SolverConfig {
            max_iterations: 3,
            bracket_tol: 1e-300,
            ..cfg()
        };
        assert!(matches!(
            find_sign_change(|t| Ok(0.3 - t), &ParameterDomain::real_line(), &tight),
            Err(Error::MaxIterations { limit: 3, .. })
        ));
    }
}
