//! Safe feature screening for the Lasso.
//!
//! The Lasso problem `min ½‖Xβ − y‖² + λ‖β‖₁` is solved along a decreasing
//! sequence of `λ` values. Given a certified solution at `λ1`, the screening
//! rules in this crate identify features whose coefficients must be zero at
//! `λ2 < λ1` and drop them from the solve.
//!
//! The main rule bounds `⟨x_j, θ2*⟩` over the intersection of a ball and a
//! half-space built from the two variational inequalities of the dual
//! projection problem ([`geometry`]). SAFE, DPP and the strong rule are
//! provided for comparison ([`rules`]), together with per-feature sure-removal
//! parameters ([`removal`]) and a path runner that measures rejection ratios
//! and timings ([`path`]).

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod path;
pub mod removal;
pub mod rules;
pub mod solver;

mod linalg;

pub use dataset::{
    generate_synthetic, load_instance, InstanceFormat, ProblemInstance, SyntheticData,
    SyntheticSpec,
};
pub use error::{Error, Result};
pub use geometry::{build_anchor, sasvi_bounds, screen_feature, BoundCase, BoundPair, Decision, ScreeningAnchor};
pub use path::{run_path, GridSpec, PathConfig, PathResult};
pub use removal::{removal_profile, sure_removal_lambda, RemovalProfile, RemovalThreshold};
pub use rules::{screen, RuleKind, ScreenReport};
pub use solver::{kkt_violations, lambda_max, solve, PrimalDualSolution, SolverConfig};

/// Default discard margin shared by screening and sure-removal.
pub const DEFAULT_MARGIN: f64 = 1e-6;
