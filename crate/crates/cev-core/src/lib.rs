//! Conditional extreme value limits: marginal standardization, norming
//! classification, spectral representation of limit measures, random
//! norming, worked example models, and a seeded Monte Carlo harness that
//! checks empirical conditional laws of exceedances against closed-form
//! limits.
//!
//! Module map:
//! * [`rv`] — function registry, generalized inverses, (psi1, psi2) limit
//!   estimation, variation classification, Pi/Gamma builders.
//! * [`spectral`] — spectral measures on [0,1), the two rectangle formulas
//!   for mu*, H*, the random-norming law G, and the polar sampler.
//! * [`transforms`] — Y/X standardization, centering rectification, and the
//!   change-of-units admissibility engine.
//! * [`models`] — executable example models: samplers + norming +
//!   closed-form conditional limits.
//! * [`montecarlo`] — exceedance harness: empirical conditional CDFs, KS
//!   studies, random-norming/factorization tests, degeneracy and
//!   density-scaling checks.
//!
//! All types are immutable after construction and evaluation is pure;
//! samplers are deterministic in (n, seed) and chunk-parallel with results
//! independent of worker count (see [`seeding`]).

// Negated float comparisons like !(v > 0.0) are used throughout to treat
// NaN as a failure of the positive branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod gauss;
pub mod models;
pub mod montecarlo;
pub mod quad;
pub mod rv;
pub mod seeding;
pub mod spectral;
pub mod transforms;

pub use models::ConditionalModel;
pub use montecarlo::VerificationReport;
pub use rv::{FunctionHandle, Interval, NormingPair, PsiClass};
pub use spectral::{MuStar, SpectralMeasure};
