//! Spectral representation of the standardized limit measure mu*.
//!
//! A Radon measure S on [0,1) with \int_0^1 (1-w) S(dw) = 1 determines the
//! -1-homogeneous measure mu* through the polar form r^{-2} dr S(dw). Two
//! rectangle formulas are implemented as independent routes:
//!
//! * direct:  mu*([0,x] x (y,inf]) = \int ((1-w)/y - w/x)_+ S(dw)
//! * Fubini:  mu*([0,x] x (y,inf]) = \int_0^inf S([0, xv ^ (1-yv) ^ 1)) dv
//!
//! plus the conditional law H*(x) = mu*([0,x] x (1,inf]), the random-norming
//! CDF G(x) = \int_0^{x/(1+x)} (1-w) S(dw), and a polar sampler.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, integrate_with_breakpoints, QuadError};
use crate::seeding::chunked_draws;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("spectral support must lie in [0,1): found point {w}")]
    SupportViolation { w: f64 },
    #[error("spectral density is negative at w = {w}")]
    NegativeDensity { w: f64 },
    #[error("atom masses must be positive (found {mass})")]
    NegativeMass { mass: f64 },
    #[error("integral of (1-w) S(dw) is zero or non-finite")]
    ZeroOrNonFiniteIntegral,
    #[error("sampler requires finite total spectral mass")]
    InfiniteMassSampler,
    #[error("acceptance rate {rate:e} below 1e-4; spectral mass too concentrated near w = 1")]
    AcceptanceTooLow { rate: f64 },
    #[error("unknown spectral spec '{spec}'")]
    UnknownSpec { spec: String },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Closed-form density families on [0,1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    /// s(w) = level
    Uniform { level: f64 },
    /// s(w) = intercept + slope * w (nonnegative on [0,1) required)
    Linear { intercept: f64, slope: f64 },
    /// s(w) = scale * (1-w)^{-3/2}: infinite total mass, finite
    /// (1-w)-moment. Exercises the "S need not be finite" allowance.
    InverseSquareRootTail { scale: f64 },
}

impl DensityFamily {
    pub fn eval(&self, w: f64) -> f64 {
        match *self {
            DensityFamily::Uniform { level } => level,
            DensityFamily::Linear { intercept, slope } => intercept + slope * w,
            DensityFamily::InverseSquareRootTail { scale } => scale * (1.0 - w).powf(-1.5),
        }
    }

    /// \int_0^1 (1-w) s(w) dw in closed form, when available.
    fn first_moment_complement_closed(&self) -> Option<f64> {
        match *self {
            DensityFamily::Uniform { level } => Some(0.5 * level),
            // exercised through quadrature deliberately
            DensityFamily::Linear { .. } => None,
            DensityFamily::InverseSquareRootTail { scale } => Some(2.0 * scale),
        }
    }

    fn total_mass(&self) -> Option<f64> {
        match *self {
            DensityFamily::Uniform { level } => Some(level),
            DensityFamily::Linear { intercept, slope } => Some(intercept + 0.5 * slope),
            DensityFamily::InverseSquareRootTail { .. } => None,
        }
    }

    /// Draw from the normalized density (finite-mass families only).
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            DensityFamily::Uniform { .. } => rng.gen::<f64>(),
            DensityFamily::Linear { intercept: a, slope: b } => {
                let q: f64 = rng.gen::<f64>() * (a + 0.5 * b);
                if b.abs() < 1e-300 {
                    q / a
                } else {
                    // solve a w + b w^2 / 2 = q
                    ((a * a + 2.0 * b * q).sqrt() - a) / b
                }
            }
            DensityFamily::InverseSquareRootTail { .. } => {
                unreachable!("sampler rejects infinite-mass spectral measures")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub mass: f64,
}

/// How the measure is stored: a closed-form density, a finite atom list, or
/// a quadrature table (nodes with weights).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    Density(DensityFamily),
    Atoms { atoms: Vec<Atom> },
    Table { nodes: Vec<f64>, weights: Vec<f64> },
}

const FMC_QUAD_TOL: f64 = 1e-8;
const RECT_QUAD_TOL: f64 = 1e-10;

/// A spectral measure on [0,1).
///
/// `scale` multiplies the stored representation, so normalization never
/// rewrites the representation itself. After `validate_normalization`
/// the first moment complement \int (1-w) S(dw) equals 1 (to 1e-9 for
/// closed forms, 1e-6 through quadrature).
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMeasure {
    repr: Representation,
    scale: f64,
    /// None encodes infinite (or numerically divergent) total mass.
    total_mass: Option<f64>,
    first_moment_complement: f64,
}

impl SpectralMeasure {
    pub fn new(repr: Representation) -> Result<Self, SpectralError> {
        match &repr {
            Representation::Density(fam) => {
                for i in 0..200 {
                    let w = i as f64 / 200.0;
                    let v = fam.eval(w);
                    if v < 0.0 || v.is_nan() {
                        return Err(SpectralError::NegativeDensity { w });
                    }
                }
            }
            Representation::Atoms { atoms } => {
                for a in atoms {
                    if !(0.0..1.0).contains(&a.w) {
                        return Err(SpectralError::SupportViolation { w: a.w });
                    }
                    if !(a.mass > 0.0) {
                        return Err(SpectralError::NegativeMass { mass: a.mass });
                    }
                }
            }
            Representation::Table { nodes, weights } => {
                for (&w, &m) in nodes.iter().zip(weights.iter()) {
                    if !(0.0..1.0).contains(&w) {
                        return Err(SpectralError::SupportViolation { w });
                    }
                    if !(m > 0.0) {
                        return Err(SpectralError::NegativeMass { mass: m });
                    }
                }
            }
        }

        let mut s = SpectralMeasure {
            repr,
            scale: 1.0,
            total_mass: None,
            first_moment_complement: f64::NAN,
        };
        s.total_mass = s.compute_total_mass();
        s.first_moment_complement = s.compute_fmc()?;
        if !(s.first_moment_complement > 0.0) || !s.first_moment_complement.is_finite() {
            return Err(SpectralError::ZeroOrNonFiniteIntegral);
        }
        Ok(s)
    }

    fn compute_total_mass(&self) -> Option<f64> {
        match &self.repr {
            Representation::Density(fam) => fam.total_mass().map(|m| m * self.scale),
            Representation::Atoms { atoms } => {
                Some(atoms.iter().map(|a| a.mass).sum::<f64>() * self.scale)
            }
            Representation::Table { weights, .. } => {
                Some(weights.iter().sum::<f64>() * self.scale)
            }
        }
    }

    fn compute_fmc(&self) -> Result<f64, SpectralError> {
        if let Representation::Density(fam) = &self.repr {
            if let Some(v) = fam.first_moment_complement_closed() {
                return Ok(v * self.scale);
            }
        }
        Ok(self.integral_against(|w| 1.0 - w, FMC_QUAD_TOL)?)
    }

    /// \int_{[0,1)} weight(w) S(dw). The weight must be continuous; for
    /// densities it is integrated by adaptive quadrature.
    fn integral_against<W: Fn(f64) -> f64>(
        &self,
        weight: W,
        tol: f64,
    ) -> Result<f64, QuadError> {
        let raw = match &self.repr {
            Representation::Density(fam) => match fam {
                DensityFamily::InverseSquareRootTail { scale } => {
                    // substitute w = 1 - s^2 to remove the singularity:
                    // \int_0^1 weight(w) c (1-w)^{-3/2} dw
                    //   = 2c \int_0^1 weight(1 - s^2) / s^2 ds  -- still
                    // singular unless weight(1) = 0, which holds for every
                    // weight used here ((1-w)-damped); guard anyway.
                    let c = *scale;
                    integrate(
                        |s| {
                            let w = 1.0 - s * s;
                            2.0 * c * weight(w) / (s * s)
                        },
                        1e-8,
                        1.0,
                        tol,
                    )?
                }
                _ => integrate(|w| weight(w) * fam.eval(w), 0.0, 1.0, tol)?,
            },
            Representation::Atoms { atoms } => {
                atoms.iter().map(|a| a.mass * weight(a.w)).sum()
            }
            Representation::Table { nodes, weights } => {
                nodes.iter().zip(weights.iter()).map(|(&w, &m)| m * weight(w)).sum()
            }
        };
        Ok(raw * self.scale)
    }

    /// S([0, s)): cumulative mass strictly below s.
    fn cum_below(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let s1 = s.min(1.0);
        let raw = match &self.repr {
            Representation::Density(fam) => match *fam {
                DensityFamily::Uniform { level } => level * s1,
                DensityFamily::Linear { intercept, slope } => {
                    intercept * s1 + 0.5 * slope * s1 * s1
                }
                DensityFamily::InverseSquareRootTail { scale } => {
                    if s1 >= 1.0 {
                        f64::INFINITY
                    } else {
                        2.0 * scale * ((1.0 - s1).powf(-0.5) - 1.0)
                    }
                }
            },
            Representation::Atoms { atoms } => {
                atoms.iter().filter(|a| a.w < s1).map(|a| a.mass).sum()
            }
            Representation::Table { nodes, weights } => nodes
                .iter()
                .zip(weights.iter())
                .filter(|(&w, _)| w < s1)
                .map(|(_, &m)| m)
                .sum(),
        };
        raw * self.scale
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn total_mass(&self) -> Option<f64> {
        self.total_mass
    }

    pub fn first_moment_complement(&self) -> f64 {
        self.first_moment_complement
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.repr, Representation::Atoms { .. } | Representation::Table { .. })
    }

    /// Atom positions (discrete representations only), scaled masses.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match &self.repr {
            Representation::Atoms { atoms } => Some(
                atoms.iter().map(|a| Atom { w: a.w, mass: a.mass * self.scale }).collect(),
            ),
            Representation::Table { nodes, weights } => Some(
                nodes
                    .iter()
                    .zip(weights.iter())
                    .map(|(&w, &m)| Atom { w, mass: m * self.scale })
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "repr": self.repr,
            "scale": self.scale,
            "total_mass": self.total_mass,
            "first_moment_complement": self.first_moment_complement,
        })
    }
}

/// Rescale so that \int (1-w) S(dw) = 1; returns the normalized measure and
/// the applied factor.
pub fn validate_normalization(
    s: &SpectralMeasure,
) -> Result<(SpectralMeasure, f64), SpectralError> {
    let fmc = s.first_moment_complement;
    if !(fmc > 0.0) || !fmc.is_finite() {
        return Err(SpectralError::ZeroOrNonFiniteIntegral);
    }
    let factor = 1.0 / fmc;
    let mut out = s.clone();
    out.scale *= factor;
    out.total_mass = out.compute_total_mass();
    out.first_moment_complement = out.compute_fmc()?;
    Ok((out, factor))
}

/// The standardized limit measure mu* carried by a spectral measure.
#[derive(Clone, Debug, Serialize)]
pub struct MuStar {
    pub s: SpectralMeasure,
}

impl MuStar {
    pub fn new(s: SpectralMeasure) -> Self {
        MuStar { s }
    }

    /// mu*([0,x] x (y,inf]) by the direct spectral formula
    /// \int ((1-w)/y - w/x)_+ S(dw).
    pub fn rect(&self, x: f64, y: f64) -> Result<f64, SpectralError> {
        assert!(x > 0.0 && y > 0.0, "rectangle corner must be positive");
        let u = x / (x + y);
        match &self.s.repr {
            Representation::Density(_) => {
                // integrand vanishes for w >= u; integrate the smooth part.
                let v = self
                    .s
                    .integral_against(
                        |w| {
                            if w >= u {
                                0.0
                            } else {
                                (1.0 - w) / y - w / x
                            }
                        },
                        RECT_QUAD_TOL,
                    )
                    .map_err(SpectralError::from)?;
                Ok(v.max(0.0))
            }
            _ => {
                // exact sums; the positive-part form needs no boundary care.
                let v = self
                    .s
                    .integral_against(|w| ((1.0 - w) / y - w / x).max(0.0), RECT_QUAD_TOL)?;
                Ok(v.max(0.0))
            }
        }
    }

    /// The same rectangle by the Fubini route
    /// \int_0^{1/y} S([0, xv ^ (1 - yv) ^ 1)) dv.
    ///
    /// Independent of `rect`: integrates the cumulative function of S over
    /// the radial variable, with all kink locations passed as breakpoints.
    pub fn rect_fubini(&self, x: f64, y: f64) -> Result<f64, SpectralError> {
        assert!(x > 0.0 && y > 0.0, "rectangle corner must be positive");
        let upper = 1.0 / y;
        let mut breakpoints = vec![1.0 / (x + y), 1.0 / x];
        if let Some(atoms) = self.s.atoms() {
            for a in &atoms {
                breakpoints.push(a.w / x);
                if a.w < 1.0 {
                    breakpoints.push((1.0 - a.w) / y);
                }
            }
        }
        let integrand = |v: f64| {
            let bound = (x * v).min(1.0 - y * v).min(1.0);
            self.s.cum_below(bound)
        };
        Ok(integrate_with_breakpoints(integrand, 0.0, upper, &breakpoints, 1e-9)?)
    }

    /// H*(x) = mu*([0,x] x (1,inf]).
    pub fn h_star(&self, x: f64) -> Result<f64, SpectralError> {
        self.rect(x, 1.0)
    }

    /// Random-norming CDF G(x) = \int_0^{x/(1+x)} (1-w) S(dw).
    pub fn g_random_norm(&self, x: f64) -> Result<f64, SpectralError> {
        assert!(x > 0.0, "G is defined for x > 0");
        let u = x / (1.0 + x);
        match &self.s.repr {
            Representation::Density(_) => {
                let v = self.s.integral_against(
                    |w| if w <= u { 1.0 - w } else { 0.0 },
                    RECT_QUAD_TOL,
                )?;
                Ok(v.clamp(0.0, 1.0))
            }
            _ => {
                let v =
                    self.s.integral_against(|w| if w <= u { 1.0 - w } else { 0.0 }, 0.0)?;
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }

    /// Polar sampler: W ~ S/|S|, R standard Pareto(1), point (RW, R(1-W)),
    /// keeping points whose second coordinate exceeds 1.
    ///
    /// `n` counts raw draws; with S normalized the acceptance rate is
    /// 1/|S|. Deterministic for fixed (n, seed) and chunk-parallel.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<(f64, f64)>, SpectralError> {
        let total = self.s.total_mass.ok_or(SpectralError::InfiniteMassSampler)?;
        if !(total > 0.0) || !total.is_finite() {
            return Err(SpectralError::InfiniteMassSampler);
        }

        // cumulative table for discrete representations
        let discrete: Option<Vec<(f64, f64)>> = self.s.atoms().map(|atoms| {
            let mut acc = 0.0;
            atoms
                .iter()
                .map(|a| {
                    acc += a.mass / total;
                    (acc, a.w)
                })
                .collect()
        });
        let repr = self.s.repr.clone();

        let raw: Vec<(f64, f64)> = chunked_draws(n, seed, move |rng| {
            let w = match (&discrete, &repr) {
                (Some(cum), _) => {
                    let q: f64 = rng.gen();
                    cum.iter().find(|(c, _)| q <= *c).map(|(_, w)| *w).unwrap_or_else(|| {
                        cum.last().map(|(_, w)| *w).unwrap_or(0.0)
                    })
                }
                (None, Representation::Density(fam)) => fam.sample(rng),
                _ => unreachable!("non-density representations are discrete"),
            };
            let r = 1.0 / (1.0 - rng.gen::<f64>());
            (r * w, r * (1.0 - w))
        });

        let accepted: Vec<(f64, f64)> = raw.into_iter().filter(|&(_, y)| y > 1.0).collect();
        let rate = accepted.len() as f64 / n as f64;
        if rate < 1e-4 {
            return Err(SpectralError::AcceptanceTooLow { rate });
        }
        Ok(accepted)
    }
}

/// Deterministic, sorted list of recognized spectral specs.
pub fn list_spectral() -> Vec<&'static str> {
    vec!["atoms:<w>:<m>,...", "invsqrt", "linear:<intercept>,<slope>", "uniform"]
}

/// Parse a spectral spec string; the result is normalized so that
/// \int (1-w) S(dw) = 1.
///
/// Specs: "uniform", "atoms:0.25:1,0.75:1", "linear:1,1", "invsqrt".
pub fn parse_spectral_spec(spec: &str) -> Result<SpectralMeasure, SpectralError> {
    let unknown = || SpectralError::UnknownSpec { spec: spec.to_string() };
    let raw = match spec {
        "uniform" => {
            SpectralMeasure::new(Representation::Density(DensityFamily::Uniform { level: 1.0 }))?
        }
        "invsqrt" => SpectralMeasure::new(Representation::Density(
            DensityFamily::InverseSquareRootTail { scale: 0.5 },
        ))?,
        _ if spec.starts_with("linear:") => {
            let rest = &spec["linear:".len()..];
            let (a, b) = rest.split_once(',').ok_or_else(unknown)?;
            let intercept = a.parse::<f64>().map_err(|_| unknown())?;
            let slope = b.parse::<f64>().map_err(|_| unknown())?;
            SpectralMeasure::new(Representation::Density(DensityFamily::Linear {
                intercept,
                slope,
            }))?
        }
        _ if spec.starts_with("atoms:") => {
            let rest = &spec["atoms:".len()..];
            let mut atoms = Vec::new();
            for part in rest.split(',') {
                let (w, m) = part.split_once(':').ok_or_else(unknown)?;
                atoms.push(Atom {
                    w: w.parse::<f64>().map_err(|_| unknown())?,
                    mass: m.parse::<f64>().map_err(|_| unknown())?,
                });
            }
            SpectralMeasure::new(Representation::Atoms { atoms })?
        }
        _ => return Err(unknown()),
    };
    Ok(validate_normalization(&raw)?.0)
}
