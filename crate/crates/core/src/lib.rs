//! Concentration bounds for the information content `-ln f(X)` of convex
//! (heavy-tailed, `kappa`-concave) probability measures.
//!
//! The crate evaluates the sharp deviation profile `psi(alpha)` and its
//! closed-form consequences ([`bounds`]), the Legendre tail exponents
//! ([`legendre`]), certifies log-concavity of moment curves by quadrature
//! ([`moments`]) and checks everything against seeded simulation
//! ([`montecarlo`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod legendre;
pub mod measures;
pub mod moments;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod roots;
pub mod special;

pub use bounds::{
    entropy_upper_bound, fisher_varentropy_bound, log_mgf_normalized, psi_c, small_ball, varentropy_bound,
    DeviationProfile, SmallBallResult,
};
pub use config::{Command, OutputFormat, RunConfig};
pub use error::{Error, Result};
pub use legendre::{dual, dual_lower, dual_upper, tail_bound, Exponent, Side, TailExponent};
pub use measures::{
    Concavity, ConvexParams, Family, FamilyKind, FamilySpec, GaussianFamily, HomogeneousFamily, ParetoFamily,
    ScalarSConcaveFn, StudentFamily,
};
pub use moments::{certify_log_concavity, Certificate, MomentCurve, Normalizer, Regime};
pub use montecarlo::{information_stats, verify_bounds, SampleReport, Verdict, VerdictTable, CHUNK_SIZE};
pub use quad::QuadConfig;
pub use report::{run, Report};
pub use special::NormKind;
