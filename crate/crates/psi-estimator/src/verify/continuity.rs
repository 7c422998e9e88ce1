//! Continuity of the estimate in the weight vector: perturbing admissible
//! weights along fixed rays with halving radii must produce deviations
//! that shrink to zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::Psi;
use crate::domain::WeightedSample;
use crate::error::Error;
use crate::solver::{estimate_weighted, SolverConfig};
use crate::verify::report::{CheckStatus, Dec, Property, PropertyReport, Witness};

/// Deviation threshold (relative to the base estimate) the smallest
/// radius must reach for continuity to be accepted.
pub const CONTINUITY_EPS: f64 = 1e-4;

/// Fixed seed for probe directions, so the check is deterministic for
/// deterministic inputs.
const DIRECTION_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

/// Maximum number of radius halvings before giving up.
const MAX_HALVINGS: u32 = 48;

/// Checks continuity of `lambda -> estimate` at `lambda0`.
///
/// `probes` unit directions are drawn once (deterministically), reshaped
/// so that each ray `lambda0 + r * d` stays admissible for every
/// `r <= radius`, and the maximum deviation of the estimate over the rays
/// is recorded while `r` halves. Holds when the deviations never grow
/// (beyond solver noise) and reach `1e-4 * max(1, |base|)`; still-shrinking
/// deviations that have not reached the threshold are inconclusive;
/// growth, or failure to shrink at all across every radius, is a
/// violation. Solver failures on any probe make the check inconclusive.
pub fn check_weight_continuity(
    psi: &Psi,
    xs: &[f64],
    lambda0: &[f64],
    radius: f64,
    probes: usize,
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    let base_sample = WeightedSample::from_parts(xs, lambda0)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "perturbation radius must be finite and positive, got {radius}"
        )));
    }
    if probes == 0 {
        return Err(Error::InvalidConfig(
            "at least one probe direction is required".into(),
        ));
    }
    cfg.validate()?;

    let inconclusive = |what: String| {
        Ok(
            PropertyReport::new(Property::WeightContinuity, CheckStatus::Inconclusive, 0.0)
                .with_cause(what),
        )
    };

    let base = match estimate_weighted(psi, &base_sample, cfg) {
        Ok(r) => r.theta_hat,
        Err(e) if e.is_solver_failure() => {
            return inconclusive(format!("base estimate failed: {e}"))
        }
        Err(e) => return Err(e),
    };
    let scale = 1.0f64.max(base.abs());
    let eps = CONTINUITY_EPS * scale;
    let slack = 10.0 * cfg.bracket_tol * scale;

    let directions = probe_directions(lambda0, radius, probes)?;

    let weight_floor = lambda0.iter().fold(1.0f64, |acc, w| acc.max(w.abs()));
    let radius_floor = 1e-12 * weight_floor;

    let mut radii: Vec<f64> = Vec::new();
    let mut deviations: Vec<f64> = Vec::new();
    let mut verdict: Option<CheckStatus> = None;
    for k in 0..=MAX_HALVINGS {
        let r = radius * 0.5f64.powi(k as i32);
        if k > 0 && r < radius_floor {
            break;
        }
        let mut dev = 0.0f64;
        for d in &directions {
            let weights: Vec<f64> = lambda0.iter().zip(d).map(|(&w, &di)| w + r * di).collect();
            let sample = match WeightedSample::from_parts(xs, &weights) {
                Ok(s) => s,
                Err(_) => {
                    return Err(Error::InvalidProbe(format!(
                        "perturbed weights at radius {r} left the admissible set"
                    )))
                }
            };
            match estimate_weighted(psi, &sample, cfg) {
                Ok(res) => dev = dev.max((res.theta_hat - base).abs()),
                Err(e) if e.is_solver_failure() => {
                    return inconclusive(format!("probe at radius {r} failed: {e}"))
                }
                Err(e) => return Err(e),
            }
        }
        radii.push(r);
        deviations.push(dev);
        if deviations.len() >= 2 {
            let prev = deviations[deviations.len() - 2];
            if dev > prev + slack {
                verdict = Some(CheckStatus::Violated);
                break;
            }
        }
        if deviations.len() >= 3 && dev <= eps {
            verdict = Some(CheckStatus::Holds);
            break;
        }
    }

    let status = verdict.unwrap_or_else(|| {
        let first = deviations.first().copied().unwrap_or(0.0);
        let last = deviations.last().copied().unwrap_or(0.0);
        if deviations.len() >= 3 && last <= eps {
            CheckStatus::Holds
        } else if last <= 0.25 * first + slack {
            // Still clearly shrinking when the radius floor was reached.
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Violated
        }
    });

    let mut report = PropertyReport::new(Property::WeightContinuity, status, eps);
    match status {
        CheckStatus::Holds => {}
        CheckStatus::Inconclusive => {
            report = report.with_cause(format!(
                "deviations are shrinking but did not reach {eps:e} before the radius floor"
            ));
        }
        CheckStatus::Violated => {
            let margin = deviations
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            report = report.with_witness(Witness::WeightContinuity {
                xs: xs.iter().copied().map(Dec).collect(),
                weights: lambda0.iter().copied().map(Dec).collect(),
                radii: radii.iter().copied().map(Dec).collect(),
                deviations: deviations.iter().copied().map(Dec).collect(),
                margin: Dec(margin),
            });
        }
    }
    Ok(report)
}

/// Unit-ish directions reshaped so `lambda0 + r*d` has nonnegative
/// coordinates for all `r <= radius`: coordinates at zero weights point
/// upward, and the direction is shrunk until no positive weight can be
/// driven below 0.1% of itself.
fn probe_directions(lambda0: &[f64], radius: f64, probes: usize) -> Result<Vec<Vec<f64>>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    let mut directions = Vec::with_capacity(probes);
    for _ in 0..probes {
        let mut d: Vec<f64> = (0..lambda0.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-6 {
            // Vanishing draw; fall back to a coordinate direction.
            d = vec![0.0; lambda0.len()];
            d[0] = 1.0;
        } else {
            for v in &mut d {
                *v /= norm;
            }
        }
        for (v, &w) in d.iter_mut().zip(lambda0) {
            if w == 0.0 {
                *v = v.abs();
            }
        }
        let mut shrink = 1.0f64;
        for (&v, &w) in d.iter().zip(lambda0) {
            if v < 0.0 && w > 0.0 {
                shrink = shrink.min(0.999 * w / (radius * v.abs()));
            }
        }
        if shrink < 1.0 {
            for v in &mut d {
                *v *= shrink;
            }
        }
        if d.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidProbe(
                "probe direction degenerated to the zero vector".into(),
            ));
        }
        directions.push(d);
    }
    Ok(directions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Psi;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn mean_estimate_is_continuous_in_the_weights() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_weight_continuity(&psi, &[0.0, 1.0], &[1.0, 1.0], 0.1, 8, &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn boundary_weights_are_perturbed_inward_only() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_weight_continuity(&psi, &[0.0, 5.0], &[1.0, 0.0], 0.5, 8, &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn locally_constant_sign_estimates_are_continuous() {
        // Weights (0.25, 1.0) leave a clear majority at 5: small
        // perturbations cannot move the weighted median.
        let psi = Psi::sign_location();
        let report =
            check_weight_continuity(&psi, &[1.0, 5.0], &[0.25, 1.0], 0.05, 8, &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn tied_sign_weights_are_inconclusive() {
        let psi = Psi::sign_location();
        let report =
            check_weight_continuity(&psi, &[1.0, 5.0], &[0.5, 0.5], 0.05, 8, &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Inconclusive);
    }

    #[test]
    fn invalid_radius_and_probe_counts_are_rejected() {
        let psi = Psi::normal_location(1.0).unwrap();
        assert!(check_weight_continuity(&psi, &[0.0], &[1.0], 0.0, 4, &cfg()).is_err());
        assert!(check_weight_continuity(&psi, &[0.0], &[1.0], 0.1, 0, &cfg()).is_err());
    }
}
