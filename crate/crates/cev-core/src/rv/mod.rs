//! Regular-variation toolkit: a registry of scalar function handles,
//! left-continuous inverses, numerical (psi1, psi2) limits for norming
//! pairs, variation classification (RV / Pi / Gamma / neither), and the
//! integral builders for Pi- and Gamma-varying functions.

mod builders;
mod classify;
mod handle;
mod inverse;
mod norming;
pub mod registry;

pub use builders::{gamma_builder, pi_builder};
pub use classify::{
    check_gamma, check_pi, classify_h_log, classify_norming, classify_variation, Evidence,
    EvidencePoint, NormingClass, NormingClassification, VariationClass, VariationKind,
};
pub use handle::{FunctionHandle, Interval, ScalarFn};
pub use inverse::left_continuous_inverse;
pub use norming::{default_c_grid, default_t_grid, estimate_psi_limits, NormingPair, PsiClass, PsiEstimate};
pub use registry::{list_functions, parse_function_spec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RvError {
    #[error("function '{name}' is not nondecreasing on its domain (near t = {t})")]
    MonotoneCheckFailed { name: String, t: f64 },
    #[error("function '{name}' returned a non-finite value at t = {t}")]
    NonFiniteEval { name: String, t: f64 },
    #[error("inverse round-trip for '{name}' failed at t = {t} (error {err:e})")]
    InverseRoundTripFailed { name: String, t: f64, err: f64 },
    #[error("'{name}' is not flagged monotone; generalized inverse undefined")]
    NotMonotone { name: String },
    #[error("inverse undefined above range (target {t})")]
    InverseAboveRange { t: f64 },
    #[error("could not bracket the generalized inverse for target {t}")]
    BracketFailed { t: f64 },
    #[error("scale function must be positive; '{name}' is {value} at t = {t}")]
    NotPositive { name: String, t: f64, value: f64 },
    #[error("t-grid must be increasing with at least {need} points")]
    BadGrid { need: usize },
    #[error("scale point c must be positive, got {c}")]
    BadScalePoint { c: f64 },
    #[error("'{name}' failed the slow-variation spot check (ratio {ratio} at t = {t})")]
    SlowVariationCheckFailed { name: String, t: f64, ratio: f64 },
    #[error("'{name}' failed the self-neglecting spot check (ratio {ratio} at t = {t})")]
    SelfNeglectingCheckFailed { name: String, t: f64, ratio: f64 },
    #[error("norming pair is inconsistent: {reason}")]
    InconsistentNorming { reason: String },
    #[error("unknown function spec '{spec}'; known: {known}")]
    UnknownFunction { spec: String, known: String },
    #[error(transparent)]
    Quad(#[from] crate::quad::QuadError),
}
