//! Check reports and violation witnesses.
//!
//! Reports serialize to JSON with every real number encoded as a decimal
//! string of 17 significant digits, which round-trips `f64` exactly and is
//! byte-stable across platforms.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An `f64` that serializes as an exact decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec(pub f64);

impl Dec {
    pub fn format(v: f64) -> String {
        format!("{v:.16e}")
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Dec::format(self.0))
    }
}

impl From<f64> for Dec {
    fn from(v: f64) -> Self {
        Dec(v)
    }
}

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&Dec::format(self.0))
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse::<f64>()
            .map(Dec)
            .map_err(|_| D::Error::custom(format!("invalid decimal number `{text}`")))
    }
}

/// The property a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    MeanType,
    MeanTypeStrict,
    WeightLineMonotone,
    Bisymmetry,
    #[serde(rename = "bisymmetry-2x2")]
    Bisymmetry2x2,
    ReplicationLimit,
    WeightContinuity,
    Sensitivity,
    NullHomogeneity,
    PermutationInvariance,
    QuasiAffineMonotone,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::MeanType => "mean-type",
            Property::MeanTypeStrict => "mean-type-strict",
            Property::WeightLineMonotone => "weight-line-monotone",
            Property::Bisymmetry => "bisymmetry",
            Property::Bisymmetry2x2 => "bisymmetry-2x2",
            Property::ReplicationLimit => "replication-limit",
            Property::WeightContinuity => "weight-continuity",
            Property::Sensitivity => "sensitivity",
            Property::NullHomogeneity => "null-homogeneity",
            Property::PermutationInvariance => "permutation-invariance",
            Property::QuasiAffineMonotone => "quasi-affine-monotone",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of a check. `Inconclusive` means the check could not be carried
/// out (typically a solver failure on a probe), not that it nearly failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Holds => "holds",
            CheckStatus::Violated => "violated",
            CheckStatus::Inconclusive => "inconclusive",
        })
    }
}

/// The inputs and observed values behind a reported violation: enough to
/// recompute the margin without re-running any solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A concatenated estimate left the span of its block estimates.
    MeanType {
        blocks: Vec<Vec<Dec>>,
        block_estimates: Vec<Dec>,
        concat_estimate: Dec,
        /// How far the concatenated estimate lies outside
        /// `[min(block_estimates), max(block_estimates)]` (or, for the
        /// strict form, how badly an equality was hit).
        margin: Dec,
    },
    /// Estimates along a weight line formed a peak or a valley.
    WeightLine {
        xs: Vec<Dec>,
        direction: Vec<Dec>,
        offset: Vec<Dec>,
        s_values: [Dec; 3],
        estimates: [Dec; 3],
        margin: Dec,
    },
    /// The smallest row estimate of a grid exceeded the largest column
    /// estimate.
    Bisymmetry {
        observations: Vec<Vec<Dec>>,
        weights: Vec<Vec<Dec>>,
        row_estimates: Vec<Dec>,
        column_estimates: Vec<Dec>,
        /// `min(row_estimates) - max(column_estimates)`, positive.
        margin: Dec,
    },
    /// Replication errors failed to vanish along the schedule.
    Replication {
        base_block: Vec<Dec>,
        tail_block: Vec<Dec>,
        schedule: Vec<u64>,
        errors: Vec<Dec>,
        limit_tolerance: Dec,
        /// `errors.last() - limit_tolerance` when the tail stayed too
        /// large, otherwise the size of the observed growth.
        margin: Dec,
    },
    /// Deviations under shrinking weight perturbations failed to shrink.
    WeightContinuity {
        xs: Vec<Dec>,
        weights: Vec<Dec>,
        radii: Vec<Dec>,
        deviations: Vec<Dec>,
        /// Largest increase between consecutive deviations.
        margin: Dec,
    },
    /// An invariance (weight scaling or permutation) moved the estimate.
    Invariance {
        xs: Vec<Dec>,
        weights: Vec<Dec>,
        /// What was applied, for example `scale=2.5` or
        /// `permutation=[2,0,1]`.
        transform: String,
        base_estimate: Dec,
        transformed_estimate: Dec,
        /// `|base_estimate - transformed_estimate|`.
        margin: Dec,
    },
}

impl Witness {
    /// Recomputes the margin from the stored estimates alone.
    pub fn recompute_margin(&self) -> f64 {
        match self {
            Witness::MeanType {
                block_estimates,
                concat_estimate,
                ..
            } => {
                let min = block_estimates
                    .iter()
                    .map(|d| d.0)
                    .fold(f64::INFINITY, f64::min);
                let max = block_estimates
                    .iter()
                    .map(|d| d.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                (min - concat_estimate.0).max(concat_estimate.0 - max)
            }
            Witness::WeightLine { estimates, .. } => {
                let [a, b, c] = [estimates[0].0, estimates[1].0, estimates[2].0];
                let peak = b - a.max(c);
                let valley = a.min(c) - b;
                peak.max(valley)
            }
            Witness::Bisymmetry {
                row_estimates,
                column_estimates,
                ..
            } => {
                let min_row = row_estimates
                    .iter()
                    .map(|d| d.0)
                    .fold(f64::INFINITY, f64::min);
                let max_col = column_estimates
                    .iter()
                    .map(|d| d.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                min_row - max_col
            }
            Witness::Replication {
                errors,
                limit_tolerance,
                ..
            } => errors.last().map_or(f64::NAN, |e| e.0 - limit_tolerance.0),
            Witness::WeightContinuity { deviations, .. } => deviations
                .windows(2)
                .map(|w| w[1].0 - w[0].0)
                .fold(f64::NEG_INFINITY, f64::max),
            Witness::Invariance {
                base_estimate,
                transformed_estimate,
                ..
            } => (base_estimate.0 - transformed_estimate.0).abs(),
        }
    }

    pub fn stored_margin(&self) -> f64 {
        match self {
            Witness::MeanType { margin, .. }
            | Witness::WeightLine { margin, .. }
            | Witness::Bisymmetry { margin, .. }
            | Witness::Replication { margin, .. }
            | Witness::WeightContinuity { margin, .. }
            | Witness::Invariance { margin, .. } => margin.0,
        }
    }
}

/// Result of one check or one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub status: CheckStatus,
    /// Number of instances examined (1 for single-instance checks).
    pub trials: u64,
    /// Seed of the randomized suite, 0 for deterministic checks.
    pub seed: u64,
    /// The comparison tolerance in effect (the largest one, for suites
    /// whose tolerance scales with the data).
    pub tolerance: Dec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    /// Why a check was inconclusive.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cause: Option<String>,
}

impl PropertyReport {
    pub fn new(property: Property, status: CheckStatus, tolerance: f64) -> Self {
        Self {
            property,
            status,
            trials: 1,
            seed: 0,
            tolerance: Dec(tolerance),
            witness: None,
            cause: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_cause(mut self, cause: impl Into<String>) -> Self {
        self.cause = Some(cause.into());
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Checks that a report's witness is internally consistent: the margin it
/// claims matches the one recomputed from its stored estimates. Returns
/// `None` when the report carries no witness.
pub fn replay_witness(report: &PropertyReport) -> Option<bool> {
    let witness = report.witness.as_ref()?;
    let recomputed = witness.recompute_margin();
    let stored = witness.stored_margin();
    let tol = 1e-12 * 1.0f64.max(stored.abs()).max(recomputed.abs());
    Some((recomputed - stored).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dec_round_trips_exactly() {
        for &v in &[
            0.0,
            -0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1e-300,
            -2.2250738585072014e-308,
            9.007199254740993e15,
            f64::MAX,
        ] {
            let text = Dec::format(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "round trip failed for {v}");
        }
    }

    #[test]
    fn report_json_round_trips_and_is_stable() {
        let report = PropertyReport::new(Property::Bisymmetry, CheckStatus::Violated, 2.5e-11)
            .with_trials(1)
            .with_witness(Witness::Bisymmetry {
                observations: vec![vec![Dec(1.0), Dec(81.0)], vec![Dec(25.0), Dec(25.0)]],
                weights: vec![vec![Dec(1.0), Dec(1.0)], vec![Dec(1.0), Dec(1.0)]],
                row_estimates: vec![Dec(25.0), Dec(25.0)],
                column_estimates: vec![Dec(13.0), Dec(24.0)],
                margin: Dec(1.0),
            });
        let json = report.to_json();
        assert!(json.starts_with("{\"property\":\"bisymmetry\""));
        assert!(json.contains("\"status\":\"violated\""));
        assert!(json.contains(&Dec::format(2.5e-11)));
        let back = PropertyReport::from_json(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), json);
        assert_eq!(replay_witness(&back), Some(true));
    }

    #[test]
    fn replay_detects_tampered_margins() {
        let mut report = PropertyReport::new(Property::MeanType, CheckStatus::Violated, 1e-11)
            .with_witness(Witness::MeanType {
                blocks: vec![vec![Dec(1.0), Dec(81.0)], vec![Dec(25.0), Dec(25.0)]],
                block_estimates: vec![Dec(25.0), Dec(25.0)],
                concat_estimate: Dec(24.0),
                margin: Dec(1.0),
            });
        assert_eq!(replay_witness(&report), Some(true));
        if let Some(Witness::MeanType { margin, .. }) = report.witness.as_mut() {
            *margin = Dec(0.25);
        }
        assert_eq!(replay_witness(&report), Some(false));
        report.witness = None;
        assert_eq!(replay_witness(&report), None);
    }

    #[test]
    fn absent_witness_and_cause_are_omitted_from_json() {
        let report = PropertyReport::new(Property::MeanType, CheckStatus::Holds, 1e-11);
        let json = report.to_json();
        assert!(!json.contains("witness"));
        assert!(!json.contains("cause"));
    }
}
