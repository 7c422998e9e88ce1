//! Weighted generalized psi-estimation.
//!
//! An estimate here is the point where the weighted sum
//! `t -> sum_i w_i * psi(x_i, t)` changes sign from positive to negative on
//! an open parameter domain. This crate provides:
//!
//! * a derivative-free sign-change solver with explicit handling of exact
//!   zeros and zero plateaus ([`solver`]);
//! * built-in psi families with closed-form oracles where they exist, plus
//!   reference aggregations and composite estimators ([`catalog`]);
//! * a small expression language for user-supplied psi functions ([`expr`]);
//! * randomized and deterministic property checks (mean-value position,
//!   weight monotonicity, grid bisymmetry, replication limits, weight
//!   continuity, sensitivity witnesses) with replayable JSON reports
//!   ([`verify`]).

pub mod catalog;
pub mod domain;
mod error;
pub mod expr;
pub mod solver;
pub mod verify;

pub use catalog::{
    closed_form_weighted, invert_monotone, kappa, CompositeEstimator, Estimator, Family, Psi,
    ReferenceEstimator, ReferenceKind,
};
pub use domain::{Interval, ParameterDomain, PsiFunction, WeightedSample};
pub use error::Error;
pub use solver::{
    certify_sign_change, estimate, estimate_replicated, estimate_replicated_materialized,
    estimate_weighted, find_sign_change, weighted_sum, EstimateResult, SolveStatus, SolverConfig,
};

/// Seed used by randomized checks when none is supplied.
pub const DEFAULT_SEED: u64 = 42;
