//! Replication limits: replicating a base block `l` times while a tail
//! block stays fixed must drive the combined estimate to the base block's
//! own estimate as `l` grows.

use crate::catalog::Psi;
use crate::domain::WeightedSample;
use crate::error::Error;
use crate::solver::{estimate_weighted, SolverConfig};
use crate::verify::report::{CheckStatus, Dec, Property, PropertyReport, Witness};

/// Relative tolerance the final replication error must reach for the
/// property to hold.
pub const REPLICATION_LIMIT_TOL: f64 = 1e-6;

/// For each `l` in `schedule`, estimates the sample in which every
/// observation of `base_block` carries weight `l` and every observation of
/// `tail_block` carries weight 1, and records the distance to the estimate
/// of `base_block` alone.
///
/// Holds when the final error is below `1e-6 * max(1, |base estimate|)`
/// and the late errors are no larger than the early ones; an error
/// sequence that is still shrinking but has not yet reached the tolerance
/// is inconclusive; a growing sequence is a violation.
pub fn check_replication_limit(
    psi: &Psi,
    base_block: &[f64],
    tail_block: &[f64],
    schedule: &[u64],
    cfg: &SolverConfig,
) -> Result<PropertyReport, Error> {
    if base_block.is_empty() {
        return Err(Error::EmptySample);
    }
    if schedule.is_empty() {
        return Err(Error::InvalidConfig(
            "the replication schedule must be nonempty".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(Error::InvalidConfig(
            "the replication schedule must be strictly increasing and positive".into(),
        ));
    }
    cfg.validate()?;

    let inconclusive = |what: String| {
        Ok(
            PropertyReport::new(Property::ReplicationLimit, CheckStatus::Inconclusive, 0.0)
                .with_cause(what),
        )
    };

    let base = match estimate_weighted(psi, &WeightedSample::unweighted(base_block)?, cfg) {
        Ok(r) => r.theta_hat,
        Err(e) if e.is_solver_failure() => {
            return inconclusive(format!("base block estimate failed: {e}"))
        }
        Err(e) => return Err(e),
    };

    let xs: Vec<f64> = base_block.iter().chain(tail_block).copied().collect();
    let mut errors = Vec::with_capacity(schedule.len());
    for &l in schedule {
        let weights: Vec<f64> = base_block
            .iter()
            .map(|_| l as f64)
            .chain(tail_block.iter().map(|_| 1.0))
            .collect();
        let sample = WeightedSample::from_parts(&xs, &weights)?;
        match estimate_weighted(psi, &sample, cfg) {
            Ok(r) => errors.push((r.theta_hat - base).abs()),
            Err(e) if e.is_solver_failure() => {
                return inconclusive(format!("estimate at replication {l} failed: {e}"))
            }
            Err(e) => return Err(e),
        }
    }

    let scale = 1.0f64.max(base.abs());
    let limit_tol = REPLICATION_LIMIT_TOL * scale;
    // Slack for solver noise when comparing early and late errors.
    let noise = 4.0 * cfg.bracket_tol * scale;
    let head = errors.iter().take(3).copied().fold(0.0f64, f64::max);
    let tail = errors
        .iter()
        .skip(errors.len().saturating_sub(3))
        .copied()
        .fold(0.0f64, f64::max);
    let last = *errors.last().expect("schedule is nonempty");

    let shrinking = tail <= head + noise;
    let status = if last <= limit_tol && shrinking {
        CheckStatus::Holds
    } else if shrinking {
        CheckStatus::Inconclusive
    } else {
        CheckStatus::Violated
    };

    let mut report = PropertyReport::new(Property::ReplicationLimit, status, limit_tol);
    match status {
        CheckStatus::Holds => {}
        CheckStatus::Inconclusive => {
            report = report.with_cause(format!(
                "errors are shrinking but the last ({last:e}) is still above {limit_tol:e}; \
                 extend the schedule"
            ));
        }
        CheckStatus::Violated => {
            report = report.with_witness(Witness::Replication {
                base_block: base_block.iter().copied().map(Dec).collect(),
                tail_block: tail_block.iter().copied().map(Dec).collect(),
                schedule: schedule.to_vec(),
                errors: errors.iter().copied().map(Dec).collect(),
                limit_tolerance: Dec(limit_tol),
                margin: Dec(last - limit_tol),
            });
        }
    }
    Ok(report)
}

/// Replication schedule `1, 2, 4, ..., 2^max_power`.
pub fn power_schedule(max_power: u32) -> Vec<u64> {
    (0..=max_power).map(|p| 1u64 << p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Psi;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn mean_replication_error_is_exactly_one_over_l_plus_one() {
        // Base block (0), tail block (1): the weighted mean is 1/(l+1).
        let psi = Psi::normal_location(1.0).unwrap();
        let schedule: Vec<u64> = (1..=64).collect();
        let report = check_replication_limit(&psi, &[0.0], &[1.0], &schedule, &cfg()).unwrap();
        // 1/65 is far above 1e-6 but shrinking: inconclusive, not violated.
        assert_eq!(report.status, CheckStatus::Inconclusive);
    }

    #[test]
    fn long_schedules_reach_the_limit() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_replication_limit(&psi, &[0.0], &[1.0], &power_schedule(21), &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn identical_blocks_hold_immediately() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_replication_limit(&psi, &[1.0, 3.0], &[1.0, 3.0], &power_schedule(4), &cfg())
                .unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn empty_tail_block_is_the_trivial_limit() {
        let psi = Psi::normal_location(1.0).unwrap();
        let report =
            check_replication_limit(&psi, &[2.0, 4.0], &[], &power_schedule(3), &cfg()).unwrap();
        assert_eq!(report.status, CheckStatus::Holds);
    }

    #[test]
    fn schedules_must_increase() {
        let psi = Psi::normal_location(1.0).unwrap();
        assert!(check_replication_limit(&psi, &[0.0], &[1.0], &[4, 2], &cfg()).is_err());
        assert!(check_replication_limit(&psi, &[0.0], &[1.0], &[0, 1], &cfg()).is_err());
        assert!(check_replication_limit(&psi, &[0.0], &[1.0], &[], &cfg()).is_err());
    }
}
