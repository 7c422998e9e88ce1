//! Built-in psi families, their closed-form estimates where available,
//! reference estimators used as counterexamples, and composition of
//! several psi estimators through a combining expression.

use crate::domain::{Interval, ParameterDomain, PsiFunction, WeightedSample};
use crate::error::Error;
use crate::expr::Expr;
use crate::solver::{estimate_weighted, EstimateResult, SolverConfig};

/// A built-in or user-supplied psi family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `psi(x, t) = (x - t) / sigma^2` on the real line; the estimate is
    /// the weighted sample mean.
    NormalLocation { sigma: f64 },
    /// `psi(x, a) = 1/a + ln(1 - x^2)` for observations in (0, 1) and
    /// parameter in (0, inf); the estimate is
    /// `-sum(w) / sum(w * ln(1 - x^2))`.
    AlphaDensity,
    /// `psi(x, t) = sign(x - t)`: discontinuous in `t`, estimates a
    /// weighted median when one is unambiguous.
    SignLocation,
    /// `psi(x, t) = f(x) - f(t)` for a strictly monotone generator `f`;
    /// the estimate is the weighted quasi-arithmetic mean
    /// `f^-1(sum(w f(x)) / sum(w))`.
    QuasiArithmetic { generator: Expr },
    /// Arbitrary expression in `x` and `t`.
    UserExpression { body: Expr },
}

/// A psi function ready for estimation: a family plus its parameter and
/// observation domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi {
    family: Family,
    theta: ParameterDomain,
    x_domain: Interval,
    continuous_in_t: bool,
}

impl Psi {
    pub fn normal_location(sigma: f64) -> Result<Self, Error> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self {
            family: Family::NormalLocation { sigma },
            theta: ParameterDomain::real_line(),
            x_domain: Interval::all_reals(),
            continuous_in_t: true,
        })
    }

    pub fn alpha_density() -> Self {
        Self {
            family: Family::AlphaDensity,
            theta: ParameterDomain::positive_half_line(),
            x_domain: Interval::open(0.0, 1.0).expect("static interval"),
            continuous_in_t: true,
        }
    }

    pub fn sign_location() -> Self {
        Self {
            family: Family::SignLocation,
            theta: ParameterDomain::real_line(),
            x_domain: Interval::all_reals(),
            continuous_in_t: false,
        }
    }

    /// Quasi-arithmetic family for a strictly monotone generator in `x`.
    /// The parameter domain must coincide with the observation interval on
    /// which the generator is evaluated.
    pub fn quasi_arithmetic(
        generator: Expr,
        theta: ParameterDomain,
        x_domain: Interval,
    ) -> Result<Self, Error> {
        generator.check_variables(&["x"])?;
        Ok(Self {
            family: Family::QuasiArithmetic { generator },
            theta,
            x_domain,
            continuous_in_t: true,
        })
    }

    /// Quasi-arithmetic family on the positive half line, the default
    /// domain for generators such as `sqrt(x)` and `ln(x)`.
    pub fn quasi_arithmetic_default(generator: Expr) -> Result<Self, Error> {
        Self::quasi_arithmetic(
            generator,
            ParameterDomain::positive_half_line(),
            Interval::open(0.0, f64::INFINITY)?,
        )
    }

    /// The square-root quasi-arithmetic mean on (0, inf).
    pub fn sqrt_mean() -> Self {
        let generator = Expr::parse("sqrt(x)").expect("static expression");
        Self::quasi_arithmetic_default(generator).expect("static family")
    }

    /// A user-supplied expression in `x` and `t`. Continuity in `t` is
    /// assumed unless a `sign` call depends on `t`.
    pub fn user_expression(
        body: Expr,
        theta: ParameterDomain,
        x_domain: Interval,
    ) -> Result<Self, Error> {
        body.check_variables(&["x", "t"])?;
        let continuous_in_t = !body.sign_depends_on("t");
        Ok(Self {
            family: Family::UserExpression { body },
            theta,
            x_domain,
            continuous_in_t,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Human-readable family descriptor matching the CLI specifier syntax.
    pub fn label(&self) -> String {
        match &self.family {
            Family::NormalLocation { sigma } => format!("normal(sigma={sigma})"),
            Family::AlphaDensity => "alpha-density".into(),
            Family::SignLocation => "sign".into(),
            Family::QuasiArithmetic { generator } => format!(
                "quasi-arith(f=\"{generator}\", theta=({}, {}), x-domain=({}, {}))",
                self.theta.lo(),
                self.theta.hi(),
                self.x_domain.lo,
                self.x_domain.hi
            ),
            Family::UserExpression { body } => format!(
                "expr(psi=\"{body}\", theta=({}, {}), x-domain=({}, {}))",
                self.theta.lo(),
                self.theta.hi(),
                self.x_domain.lo,
                self.x_domain.hi
            ),
        }
    }
}

impl PsiFunction for Psi {
    fn eval(&self, x: f64, t: f64) -> Result<f64, Error> {
        match &self.family {
            Family::NormalLocation { sigma } => Ok((x - t) / (sigma * sigma)),
            Family::AlphaDensity => {
                let one_minus = 1.0 - x * x;
                if one_minus <= 0.0 {
                    return Err(Error::Domain(format!("observation {x} is outside (0, 1)")));
                }
                Ok(1.0 / t + one_minus.ln())
            }
            Family::SignLocation => Ok(if x > t {
                1.0
            } else if x < t {
                -1.0
            } else {
                0.0
            }),
            Family::QuasiArithmetic { generator } => {
                let gx = generator.eval(&[("x", x)])?;
                let gt = generator.eval(&[("x", t)])?;
                Ok(gx - gt)
            }
            Family::UserExpression { body } => Ok(body.eval(&[("x", x), ("t", t)])?),
        }
    }

    fn parameter_domain(&self) -> ParameterDomain {
        self.theta
    }

    fn observation_domain(&self) -> Interval {
        self.x_domain
    }

    fn continuous_in_t(&self) -> bool {
        self.continuous_in_t
    }
}

/// Closed-form weighted estimate for families that have one, or `None`
/// when only the solver route exists. Used as an independent oracle for
/// the solver.
pub fn closed_form_weighted(psi: &Psi, sample: &WeightedSample) -> Result<Option<f64>, Error> {
    let x_domain = psi.observation_domain();
    for (i, &(x, w)) in sample.points().iter().enumerate() {
        if w > 0.0 && !x_domain.contains(x) {
            return Err(Error::Domain(format!(
                "observation {i} ({x}) is outside the observation domain {x_domain}"
            )));
        }
    }
    let active = || sample.points().iter().filter(|&&(_, w)| w > 0.0);
    match psi.family() {
        Family::NormalLocation { .. } => {
            let total: f64 = active().map(|&(_, w)| w).sum();
            let dot: f64 = active().map(|&(x, w)| w * x).sum();
            Ok(Some(dot / total))
        }
        Family::AlphaDensity => {
            let total: f64 = active().map(|&(_, w)| w).sum();
            let log_mass: f64 = active().map(|&(x, w)| w * (1.0 - x * x).ln()).sum();
            if log_mass == 0.0 {
                return Err(Error::Domain(
                    "all observations are too close to 0 for the estimate to be finite".into(),
                ));
            }
            Ok(Some(-total / log_mass))
        }
        Family::QuasiArithmetic { generator } => {
            let total: f64 = active().map(|&(_, w)| w).sum();
            let mut dot = 0.0;
            for &(x, w) in active() {
                dot += w * generator.eval(&[("x", x)])?;
            }
            let target = dot / total;
            let g = |t: f64| Ok(generator.eval(&[("x", t)])?);
            let domain = psi.parameter_domain();
            Ok(Some(invert_monotone(g, &domain, target)?))
        }
        Family::SignLocation | Family::UserExpression { .. } => Ok(None),
    }
}

/// Solves `g(t) = target` for a strictly monotone `g` on an open domain by
/// expansion and bisection. Independent of the sign-change solver so the
/// two routes can cross-validate each other.
pub fn invert_monotone<G>(g: G, domain: &ParameterDomain, target: f64) -> Result<f64, Error>
where
    G: Fn(f64) -> Result<f64, Error>,
{
    const REL_TOL: f64 = 1e-13;
    const MAX_STEPS: u32 = 200;
    if !target.is_finite() {
        return Err(Error::Domain(format!(
            "inversion target must be finite, got {target}"
        )));
    }

    let step_point = |k: u32, toward_hi: bool| -> f64 {
        let r = domain.reference_point();
        let endpoint = if toward_hi { domain.hi() } else { domain.lo() };
        if endpoint.is_infinite() {
            let step = 2.0f64.powi(k as i32 - 1);
            if toward_hi {
                r + step
            } else {
                r - step
            }
        } else {
            endpoint + (r - endpoint) * 0.5f64.powi(k as i32)
        }
    };

    let r = domain.reference_point();
    let vr = g(r)?;

    // Direction of monotonicity from the first probe that differs from r.
    let mut direction = 0.0f64;
    'outer: for &toward_hi in &[true, false] {
        for k in 1..=12u32 {
            let t = step_point(k, toward_hi);
            if !domain.contains(t) {
                continue;
            }
            let v = g(t)?;
            if v != vr {
                let raw = if toward_hi { v - vr } else { vr - v };
                direction = raw.signum();
                break 'outer;
            }
        }
    }
    if direction == 0.0 {
        return Err(Error::Domain(
            "generator appears constant near the reference point; cannot invert".into(),
        ));
    }

    // h is increasing with a root at the preimage of target.
    let h = |t: f64| -> Result<f64, Error> { Ok(direction * (g(t)? - target)) };

    let hr = h(r)?;
    if hr == 0.0 {
        return Ok(r);
    }
    let (mut below, mut above) = (None, None); // h(below) < 0 < h(above)
    if hr > 0.0 {
        above = Some(r);
    } else {
        below = Some(r);
    }
    for &(toward_hi, want_positive) in &[(false, false), (true, true)] {
        let slot_filled = if want_positive {
            above.is_some()
        } else {
            below.is_some()
        };
        if slot_filled {
            continue;
        }
        let mut found = false;
        for k in 1..=MAX_STEPS {
            let t = step_point(k, toward_hi);
            if !domain.contains(t) {
                break;
            }
            let v = h(t)?;
            if v == 0.0 {
                return Ok(t);
            }
            if (v > 0.0) == want_positive {
                if want_positive {
                    above = Some(t);
                } else {
                    below = Some(t);
                }
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Domain(format!(
                "inversion target {target} is outside the generator's range on {domain}"
            )));
        }
    }

    let mut lo = below.expect("lower end bracketed");
    let mut hi = above.expect("upper end bracketed");
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..400 {
        let scale = 1.0f64.max(lo.abs()).max(hi.abs());
        if (hi - lo) <= REL_TOL * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = h(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The reference aggregation
/// `kappa(x) = (sum(x) + n * geometric_mean(x)) / (2n)` for positive
/// observations. It lies between min and max but fails the replication
/// and bisymmetry structure of psi estimators, which makes it the standard
/// counterexample input.
pub fn kappa(xs: &[f64]) -> Result<f64, Error> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    for (i, &x) in xs.iter().enumerate() {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Domain(format!(
                "observation {i} must be finite and positive, got {x}"
            )));
        }
    }
    let n = xs.len() as f64;
    let arith: f64 = xs.iter().sum();
    let geo = (xs.iter().map(|&x| x.ln()).sum::<f64>() / n).exp();
    Ok((arith + n * geo) / (2.0 * n))
}

/// Tuple-only aggregations used as foils in property checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// `kappa` above; defined for positive observations.
    Kappa,
    /// Sample maximum.
    Max,
    /// `(min + max) / 2`.
    MidRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceEstimator {
    pub kind: ReferenceKind,
}

impl ReferenceEstimator {
    pub const fn kappa() -> Self {
        Self {
            kind: ReferenceKind::Kappa,
        }
    }

    pub const fn max() -> Self {
        Self {
            kind: ReferenceKind::Max,
        }
    }

    pub const fn mid_range() -> Self {
        Self {
            kind: ReferenceKind::MidRange,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ReferenceKind::Kappa => "kappa",
            ReferenceKind::Max => "max",
            ReferenceKind::MidRange => "mid-range",
        }
    }

    pub fn evaluate(&self, xs: &[f64]) -> Result<f64, Error> {
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, &x) in xs.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Domain(format!(
                    "observation {i} must be finite, got {x}"
                )));
            }
        }
        match self.kind {
            ReferenceKind::Kappa => kappa(xs),
            ReferenceKind::Max => Ok(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            ReferenceKind::MidRange => {
                let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
                let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(0.5 * (min + max))
            }
        }
    }
}

/// Several psi estimators applied to the same sample, combined by an
/// expression in the component estimates `t1, ..., tN`. The combined value
/// must land in the declared output domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeEstimator {
    components: Vec<Psi>,
    combiner: Expr,
    output_domain: ParameterDomain,
}

impl CompositeEstimator {
    pub fn new(
        components: Vec<Psi>,
        combiner: Expr,
        output_domain: ParameterDomain,
    ) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::InvalidConfig(
                "a composite estimator needs at least one component".into(),
            ));
        }
        let names: Vec<String> = (1..=components.len()).map(|i| format!("t{i}")).collect();
        let allowed: Vec<&str> = names.iter().map(String::as_str).collect();
        combiner.check_variables(&allowed)?;
        Ok(Self {
            components,
            combiner,
            output_domain,
        })
    }

    pub fn components(&self) -> &[Psi] {
        &self.components
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(Psi::label).collect();
        format!(
            "composite(g={}, components=[{}])",
            self.combiner,
            parts.join(", ")
        )
    }

    /// True when every component is continuous in its parameter; the
    /// combining expression itself is built from continuous primitives
    /// unless it calls `sign` on a component estimate.
    pub fn continuous(&self) -> bool {
        self.components.iter().all(Psi::continuous_in_t)
            && (1..=self.components.len()).all(|i| !self.combiner.sign_depends_on(&format!("t{i}")))
    }

    pub fn estimate_weighted(
        &self,
        sample: &WeightedSample,
        cfg: &SolverConfig,
    ) -> Result<f64, Error> {
        let mut names = Vec::with_capacity(self.components.len());
        let mut values = Vec::with_capacity(self.components.len());
        for (i, psi) in self.components.iter().enumerate() {
            let r = estimate_weighted(psi, sample, cfg)?;
            names.push(format!("t{}", i + 1));
            values.push(r.theta_hat);
        }
        let bindings: Vec<(&str, f64)> = names
            .iter()
            .map(String::as_str)
            .zip(values.iter().copied())
            .collect();
        let combined = self.combiner.eval(&bindings)?;
        if !self.output_domain.contains(combined) {
            return Err(Error::Domain(format!(
                "combined estimate {combined} left the output domain {}",
                self.output_domain
            )));
        }
        Ok(combined)
    }

    pub fn estimate(&self, xs: &[f64], cfg: &SolverConfig) -> Result<f64, Error> {
        self.estimate_weighted(&WeightedSample::unweighted(xs)?, cfg)
    }
}

/// Anything that can map a sample to a single estimate: a psi function
/// solved for its sign change, a composite of such, or a tuple-only
/// reference aggregation.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Psi(Psi),
    Composite(CompositeEstimator),
    Reference(ReferenceEstimator),
}

impl Estimator {
    pub fn label(&self) -> String {
        match self {
            Estimator::Psi(p) => p.label(),
            Estimator::Composite(c) => c.label(),
            Estimator::Reference(r) => r.label().to_string(),
        }
    }

    /// `Some(flag)` for estimators with a meaningful continuity notion,
    /// `None` for reference aggregations.
    pub fn continuity(&self) -> Option<bool> {
        match self {
            Estimator::Psi(p) => Some(p.continuous_in_t()),
            Estimator::Composite(c) => Some(c.continuous()),
            Estimator::Reference(_) => None,
        }
    }

    pub fn estimate_tuple(&self, xs: &[f64], cfg: &SolverConfig) -> Result<f64, Error> {
        match self {
            Estimator::Psi(p) => Ok(crate::solver::estimate(p, xs, cfg)?.theta_hat),
            Estimator::Composite(c) => c.estimate(xs, cfg),
            Estimator::Reference(r) => r.evaluate(xs),
        }
    }

    /// Weighted estimation. Reference aggregations only support weight
    /// vectors of moderate nonnegative integers, which are materialized as
    /// replications.
    pub fn estimate_weighted(
        &self,
        sample: &WeightedSample,
        cfg: &SolverConfig,
    ) -> Result<f64, Error> {
        match self {
            Estimator::Psi(p) => Ok(estimate_weighted(p, sample, cfg)?.theta_hat),
            Estimator::Composite(c) => c.estimate_weighted(sample, cfg),
            Estimator::Reference(r) => {
                const MAX_TOTAL: f64 = 1e6;
                let mut repeated = Vec::new();
                let mut total = 0.0;
                for &(x, w) in sample.points() {
                    if w == 0.0 {
                        continue;
                    }
                    if w.fract() != 0.0 {
                        return Err(Error::Unsupported(format!(
                            "{} only accepts integer weights, got {w}",
                            r.label()
                        )));
                    }
                    total += w;
                    if total > MAX_TOTAL {
                        return Err(Error::Unsupported(format!(
                            "{} weight total exceeds {MAX_TOTAL}",
                            r.label()
                        )));
                    }
                    repeated.extend(std::iter::repeat_n(x, w as usize));
                }
                r.evaluate(&repeated)
            }
        }
    }

    /// Estimate for the two-point sample `(x repeated k times, y repeated
    /// m times)`; psi routes use replication counts as weights.
    pub fn estimate_pair_counts(
        &self,
        x: f64,
        y: f64,
        k: u64,
        m: u64,
        cfg: &SolverConfig,
    ) -> Result<f64, Error> {
        let sample = WeightedSample::from_counts(&[x, y], &[k, m])?;
        self.estimate_weighted(&sample, cfg)
    }

    /// Full estimation result with bracket and residual; only psi routes
    /// carry one.
    pub fn solve_weighted(
        &self,
        sample: &WeightedSample,
        cfg: &SolverConfig,
    ) -> Result<Option<EstimateResult>, Error> {
        match self {
            Estimator::Psi(p) => Ok(Some(estimate_weighted(p, sample, cfg)?)),
            Estimator::Composite(_) | Estimator::Reference(_) => Ok(None),
        }
    }
}
