//! Property verification for estimators: structural checks (mean-value
//! position, weight-line monotonicity, grid bisymmetry, replication
//! limits, weight continuity, invariances), sensitivity witness searches,
//! and seeded randomized suites. Every check produces a [`PropertyReport`]
//! whose witness carries enough data to replay the computation.

mod bisymmetry;
mod continuity;
mod mean_type;
mod monotone;
mod replication;
mod report;
mod sensitivity;
mod suites;
mod weight_line;

pub use bisymmetry::{check_bisymmetry, check_bisymmetry_2x2};
pub use continuity::check_weight_continuity;
pub use mean_type::check_mean_type;
pub use monotone::{is_monotone_sampled, is_quasi_affine_sampled, monotone_violation};
pub use replication::check_replication_limit;
pub use report::{replay_witness, CheckStatus, Dec, Property, PropertyReport, Witness};
pub use sensitivity::{find_sensitivity_witness, SensitivityOutcome, SensitivityQuery};
pub use suites::{
    check_null_homogeneity, check_permutation_invariance, run_suite, trial_rng, SuiteConfig,
};
pub use weight_line::{check_weight_line_monotone, weight_line_domain};
