//! Marginal standardization and the change-of-units engine.
//!
//! `standardize_y` turns any registry marginal with a continuous CDF into a
//! variable with exactly standard-Pareto tail via y -> 1/(1 - F(y)).
//! `standardize_x` dispatches on the psi classification of a norming pair:
//! invert beta when the centering limit is non-null, invert alpha for pure
//! scale with positive index, and route negative index through the
//! reciprocal-remainder map. `rectify_beta` and `reduce_negative_rho`
//! rewrite a pair into the monotone / positive-index shape those inversions
//! need. `change_coordinates` answers which monotone h preserve a
//! conditioned limit and produces the transformed norming plus the new
//! limit law; inadmissibility is a reported value, not an error.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::rv::{
    classify_h_log, default_t_grid, gamma_builder, left_continuous_inverse, FunctionHandle,
    Interval, NormingPair, PsiClass, RvError, ScalarFn, VariationClass, VariationKind,
};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("standardization impossible: the limit is a product measure")]
    StandardizationImpossible,
    #[error("beta(inf) did not converge to a finite limit (estimates {a} vs {b})")]
    BetaInfNotFinite { a: f64, b: f64 },
    #[error("transformed centering is not regularly varying with index {expected} (ratio {got} at c = {c})")]
    NewBetaNotRegularlyVarying { expected: f64, got: f64, c: f64 },
    #[error("{what}")]
    Unsupported { what: String },
    #[error("marginal CDF must approach 1 from below on its domain (F({y}) = {value})")]
    BadMarginal { y: f64, value: f64 },
    #[error("auxiliary f = alpha(beta^-1) failed the self-neglecting check (ratio {ratio} at t = {t})")]
    NotSelfNeglecting { ratio: f64, t: f64 },
    #[error(transparent)]
    Rv(#[from] RvError),
}

/// Which standardization route produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StandardizeDirection {
    /// y -> 1/(1 - F(y)) on the conditioning variable.
    YMarginal,
    /// Non-null centering limit: invert beta.
    XBetaInverse,
    /// Pure scale, positive index: invert alpha.
    XAlphaInverse,
    /// Pure scale, negative index: x -> (1/alpha)^{-1}(1/(beta(inf)-x)).
    XNegativeRhoReciprocal,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub case: String,
    pub beta_inf: Option<f64>,
    pub gamma: Option<f64>,
}

/// A standardizing map with its provenance.
#[derive(Clone, Debug)]
pub struct Standardizer {
    pub direction: StandardizeDirection,
    pub map: FunctionHandle,
    pub provenance: Provenance,
}

/// Build the Y-standardizer for a marginal CDF handle: map = 1/(1 - F).
///
/// `gamma` is the extreme value index of the marginal (caller-asserted
/// domain-of-attraction membership), recorded in the provenance.
pub fn standardize_y(f_cdf: &FunctionHandle, gamma: f64) -> Result<Standardizer, TransformError> {
    if !f_cdf.is_monotone() {
        return Err(TransformError::Unsupported {
            what: format!("marginal '{}' is not flagged monotone", f_cdf.name()),
        });
    }
    // F must stay strictly below 1 over most of the probed range so the map
    // is finite where samples land. Light-tailed CDFs round to 1.0 far out
    // (the exponential saturates near y = 37); a handful of saturated
    // probes is tolerated, a mostly-saturated tail is not.
    let probes = f_cdf.domain().probe_points(200);
    let mut saturated = 0usize;
    for &y in &probes {
        let v = f_cdf.eval(y);
        if v < 0.0 || v.is_nan() {
            return Err(TransformError::BadMarginal { y, value: v });
        }
        if v >= 1.0 {
            saturated += 1;
        }
    }
    if saturated * 2 > probes.len() {
        return Err(TransformError::BadMarginal {
            y: *probes.last().unwrap(),
            value: 1.0,
        });
    }
    let fe = f_cdf.eval_fn();
    let map = FunctionHandle::new(
        format!("pareto-margin[{}]", f_cdf.name()),
        f_cdf.params().to_vec(),
        f_cdf.domain(),
        true,
        Arc::new(move |y| 1.0 / (1.0 - fe(y))),
    )?;
    Ok(Standardizer {
        direction: StandardizeDirection::YMarginal,
        map,
        provenance: Provenance {
            case: "recip-survival".to_string(),
            beta_inf: None,
            gamma: Some(gamma),
        },
    })
}

/// Estimate beta(inf) by evaluation at large arguments plus Richardson-style
/// extrapolation, assuming a power-law approach to the limit.
pub fn estimate_beta_inf(beta: &FunctionHandle) -> Result<f64, TransformError> {
    const T_MAX: f64 = 1e12;
    let b2 = beta.eval(T_MAX);
    let b1 = beta.eval(T_MAX / 10.0);
    let b0 = beta.eval(T_MAX / 100.0);
    let (d1, d0) = (b2 - b1, b1 - b0);
    if d1.abs() < 1e-12 * b2.abs().max(1.0) {
        return Ok(b2);
    }
    let q = d1 / d0;
    if !q.is_finite() || q.abs() >= 1.0 {
        return Err(TransformError::BetaInfNotFinite { a: b1, b: b2 });
    }
    let extrapolated = b2 + d1 * q / (1.0 - q);
    // consistency to tolerance 1e-6 relative
    if (extrapolated - b2).abs() > 1e-2 * extrapolated.abs().max(1.0) && q.abs() > 0.9 {
        return Err(TransformError::BetaInfNotFinite { a: b2, b: extrapolated });
    }
    Ok(extrapolated)
}

/// Standardize the X variable of a norming pair.
///
/// * psi2 non-null (`Full`): map = beta^{-1} (beta must be monotone;
///   rectify first otherwise).
/// * psi2 null, rho > 0 (`ScaleOnly`): map = alpha^{-1}.
/// * psi2 null, rho < 0: map(x) = (1/alpha)^{-1}(1/(beta(inf) - x)),
///   valid when X sits below beta(inf).
/// * `Product`: error — no deterministic normalization standardizes X.
pub fn standardize_x(
    np: &NormingPair,
    psi_class: PsiClass,
) -> Result<Standardizer, TransformError> {
    match psi_class {
        PsiClass::Product => Err(TransformError::StandardizationImpossible),
        PsiClass::Full => {
            if !np.beta.is_monotone() {
                return Err(TransformError::Unsupported {
                    what: format!(
                        "beta '{}' is not monotone; apply rectify_beta or reduce_negative_rho first",
                        np.beta.name()
                    ),
                });
            }
            let beta = np.beta.clone();
            let map = FunctionHandle::new(
                format!("beta-inverse[{}]", beta.name()),
                beta.params().to_vec(),
                Interval::real_line(),
                true,
                Arc::new(move |x| left_continuous_inverse(&beta, x).unwrap_or(f64::NAN)),
            )?;
            Ok(Standardizer {
                direction: StandardizeDirection::XBetaInverse,
                map,
                provenance: Provenance {
                    case: "non-null centering limit".into(),
                    beta_inf: None,
                    gamma: None,
                },
            })
        }
        PsiClass::ScaleOnly => {
            if np.rho > 0.0 {
                let alpha = np.alpha.clone();
                if !alpha.is_monotone() {
                    return Err(TransformError::Unsupported {
                        what: format!("alpha '{}' must be monotone for inversion", alpha.name()),
                    });
                }
                let map = FunctionHandle::new(
                    format!("alpha-inverse[{}]", alpha.name()),
                    alpha.params().to_vec(),
                    Interval::positive(),
                    true,
                    Arc::new(move |x| left_continuous_inverse(&alpha, x).unwrap_or(f64::NAN)),
                )?;
                Ok(Standardizer {
                    direction: StandardizeDirection::XAlphaInverse,
                    map,
                    provenance: Provenance {
                        case: "pure scale, positive index".into(),
                        beta_inf: None,
                        gamma: None,
                    },
                })
            } else if np.rho < 0.0 {
                let beta_inf = estimate_beta_inf(&np.beta)?;
                let inv_alpha = np.alpha.reciprocal();
                if !inv_alpha.is_monotone() {
                    return Err(TransformError::Unsupported {
                        what: "1/alpha must be nondecreasing when rho < 0".into(),
                    });
                }
                let map = FunctionHandle::new(
                    format!("neg-rho-std[{}]", np.alpha.name()),
                    vec![beta_inf],
                    Interval::open(f64::NEG_INFINITY, beta_inf),
                    true,
                    Arc::new(move |x| {
                        left_continuous_inverse(&inv_alpha, 1.0 / (beta_inf - x))
                            .unwrap_or(f64::NAN)
                    }),
                )?;
                Ok(Standardizer {
                    direction: StandardizeDirection::XNegativeRhoReciprocal,
                    map,
                    provenance: Provenance {
                        case: "pure scale, negative index".into(),
                        beta_inf: Some(beta_inf),
                        gamma: None,
                    },
                })
            } else {
                Err(TransformError::Unsupported {
                    what: "scale-only class with rho = 0 is a product limit".into(),
                })
            }
        }
    }
}

fn validate_rv_positive(beta: &FunctionHandle, expected: f64) -> Result<(), TransformError> {
    for &t in &[1e4, 1e6, 1e8] {
        for &c in &[2.0, 8.0] {
            let got = (beta.eval(t * c) / beta.eval(t)).ln() / c.ln();
            if !got.is_finite() || (got - expected).abs() > 0.05 * expected.abs().max(0.1) {
                return Err(TransformError::NewBetaNotRegularlyVarying { expected, got, c });
            }
        }
    }
    Ok(())
}

/// Reduce a negative-index pair to a positive-index one.
///
/// For beta increasing to a finite beta(inf) (k > 0) the transform is
/// x -> 1/(beta(inf) - x) with new centering
/// 1/(|rho| (beta(inf) - beta(t))); for beta decreasing to beta(inf)
/// (k < 0, mirrored shape) it is x -> 1/(x - beta(inf)) with
/// 1/(|rho| (beta(t) - beta(inf))). The new centering must verify as
/// regularly varying with index |rho|, else an error is returned.
pub fn reduce_negative_rho(
    np: &NormingPair,
) -> Result<(FunctionHandle, NormingPair), TransformError> {
    if np.rho >= 0.0 {
        return Err(TransformError::Unsupported {
            what: format!("reduce_negative_rho needs rho < 0, got {}", np.rho),
        });
    }
    let beta_inf = estimate_beta_inf(&np.beta)?;
    let abs_rho = np.rho.abs();
    let increasing_to_limit = np.k >= 0.0;

    let beta = np.beta.clone();
    let new_beta = if increasing_to_limit {
        FunctionHandle::new(
            format!("neg-rho-beta[{}]", np.beta.name()),
            vec![abs_rho, beta_inf],
            np.beta.domain(),
            true,
            Arc::new(move |t| 1.0 / (abs_rho * (beta_inf - beta.eval(t)))),
        )?
    } else {
        FunctionHandle::new(
            format!("neg-rho-beta[{}]", np.beta.name()),
            vec![abs_rho, beta_inf],
            np.beta.domain(),
            true,
            Arc::new(move |t| 1.0 / (abs_rho * (beta.eval(t) - beta_inf))),
        )?
    };
    validate_rv_positive(&new_beta, abs_rho)?;

    let x_map = if increasing_to_limit {
        FunctionHandle::new(
            "neg-rho-xmap",
            vec![beta_inf],
            Interval::open(f64::NEG_INFINITY, beta_inf),
            true,
            Arc::new(move |x| 1.0 / (beta_inf - x)),
        )?
    } else {
        FunctionHandle::from_closure_auto(
            "neg-rho-xmap",
            vec![beta_inf],
            Interval::open(beta_inf, f64::INFINITY),
            Arc::new(move |x| 1.0 / (x - beta_inf)),
        )
    };

    let pair = NormingPair::new(
        new_beta.clone().scaled(abs_rho)?,
        new_beta,
        abs_rho,
        abs_rho,
        PsiClass::Full,
    )?;
    Ok((x_map, pair))
}

/// Which Pi flavor the centering belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiSign {
    Plus,
    Minus,
}

/// Rewrite a rho = 0 pair so beta is continuous, strictly increasing to
/// infinity.
///
/// Pi+ with beta(inf) = inf: identity transform. Pi+ with finite beta(inf):
/// x -> 1/(beta(inf) - x), beta -> 1/(beta(inf) - beta),
/// alpha -> alpha/(beta(inf) - beta)^2. Pi-: negate and recurse.
///
/// `beta_inf` supplies the limit when it is known in closed form. With
/// `None` it is estimated numerically, which is exact for power-rate
/// convergence but biased for 1/log-rate tails; prefer the explicit value
/// for Pi-varying centerings approaching a finite limit.
pub fn rectify_beta(
    np: &NormingPair,
    pi_sign: PiSign,
    beta_inf: Option<f64>,
) -> Result<(FunctionHandle, NormingPair), TransformError> {
    if np.rho != 0.0 {
        return Err(TransformError::Unsupported {
            what: format!("rectify_beta applies to rho = 0, got {}", np.rho),
        });
    }
    match pi_sign {
        PiSign::Minus => {
            let negated = NormingPair::new(
                np.alpha.clone(),
                np.beta.negated(),
                0.0,
                -np.k,
                np.psi_class,
            )?;
            let (inner_map, pair) = rectify_beta(&negated, PiSign::Plus, beta_inf.map(|b| -b))?;
            // compose: first negate x, then the inner transform
            let im = inner_map.eval_fn();
            let map = FunctionHandle::from_closure_auto(
                "pi-minus-xmap",
                vec![],
                Interval::real_line(),
                Arc::new(move |x| im(-x)),
            );
            Ok((map, pair))
        }
        PiSign::Plus => {
            let limit = match beta_inf {
                Some(b) if b.is_finite() => Ok(b),
                Some(_) => Err(TransformError::Unsupported { what: String::new() }),
                None => estimate_beta_inf(&np.beta),
            };
            match limit {
                Err(_) => {
                    // beta increases to infinity: already the wanted shape
                    Ok((
                        crate::rv::parse_function_spec("identity")?,
                        np.clone(),
                    ))
                }
                Ok(beta_inf) => {
                    let beta = np.beta.clone();
                    let alpha = np.alpha.clone();
                    let new_beta = FunctionHandle::new(
                        format!("rectified-beta[{}]", np.beta.name()),
                        vec![beta_inf],
                        np.beta.domain(),
                        true,
                        Arc::new(move |t| 1.0 / (beta_inf - beta.eval(t))),
                    )?;
                    let beta2 = np.beta.clone();
                    let new_alpha = FunctionHandle::from_closure_auto(
                        format!("rectified-alpha[{}]", np.alpha.name()),
                        vec![beta_inf],
                        np.alpha.domain(),
                        Arc::new(move |t| {
                            let d = beta_inf - beta2.eval(t);
                            alpha.eval(t) / (d * d)
                        }),
                    );
                    let map = FunctionHandle::new(
                        "rectify-xmap",
                        vec![beta_inf],
                        Interval::open(f64::NEG_INFINITY, beta_inf),
                        true,
                        Arc::new(move |x| 1.0 / (beta_inf - x)),
                    )?;
                    let pair = NormingPair::new(new_alpha, new_beta, 0.0, np.k, np.psi_class)?;
                    Ok((map, pair))
                }
            }
        }
    }
}

/// Which construction produced a coordinate change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoordCase {
    /// alpha asymptotically constant, beta increasing to infinity.
    ConstantScale,
    /// alpha not constant; h routed through the Gamma composition.
    GammaComposition,
    /// beta = o(alpha): h classified for plain regular variation.
    NegligibleCentering,
}

/// Result of a change of measurement units X -> h(X).
///
/// `admissible = false` is a first-class diagnosis (the inadmissible
/// transform of the Gaussian example is a result, not a failure); the
/// evidence lives in `variation`.
pub struct CoordinateChange {
    pub h: FunctionHandle,
    pub alpha2: FunctionHandle,
    pub beta2: FunctionHandle,
    /// chi(y) with exact inverse attached; identity for Pi-type h.
    pub chi: FunctionHandle,
    pub admissible: bool,
    pub variation: VariationClass,
    pub case: CoordCase,
    /// Transformed conditional limit H2(x) = H(chi^{-1}(x)), when admissible.
    pub limit_cdf: Option<ScalarFn>,
    pub note: String,
}

impl CoordinateChange {
    /// JSON report: descriptors plus sampled norming values.
    pub fn report(&self) -> serde_json::Value {
        let ts: Vec<f64> = vec![1e2, 1e4, 1e6, 1e8];
        let alpha2: Vec<f64> = ts.iter().map(|&t| self.alpha2.eval(t)).collect();
        let beta2: Vec<f64> = ts.iter().map(|&t| self.beta2.eval(t)).collect();
        serde_json::json!({
            "schema": 1,
            "h": self.h.name(),
            "admissible": self.admissible,
            "case": format!("{:?}", self.case),
            "variation": self.variation.tag(),
            "t": ts,
            "alpha2": alpha2,
            "beta2": beta2,
            "note": self.note,
        })
    }
}

fn chi_identity() -> Result<FunctionHandle, RvError> {
    crate::rv::parse_function_spec("identity")
}

fn chi_exp_power(p: f64) -> Result<FunctionHandle, RvError> {
    // chi(y) = e^{py} - 1 via exp_m1/ln_1p. Below py ~ -19 the value is
    // within one ulp of -1 and y is no longer recoverable from it, so the
    // certified domain stops there; the inverse itself stays usable on all
    // of (-1, inf).
    FunctionHandle::new(
        "chi-exp-power",
        vec![p],
        Interval::open(-19.0 / p, 700.0 / p),
        true,
        Arc::new(move |y: f64| (p * y).exp_m1()),
    )?
    .with_inverse(Arc::new(move |x: f64| x.ln_1p() / p))
}

fn alpha_is_constant(alpha: &FunctionHandle) -> bool {
    let v8 = alpha.eval(1e8);
    if !v8.is_finite() || v8 <= 0.0 {
        return false;
    }
    [1e4, 1e6]
        .iter()
        .all(|&t| (alpha.eval(t) / v8 - 1.0).abs() < 0.05)
}

fn beta_negligible(np: &NormingPair) -> bool {
    let series: Vec<f64> = [1e2, 1e4, 1e6, 1e8]
        .iter()
        .map(|&t| np.beta.eval(t) / np.alpha.eval(t))
        .collect();
    series.last().map(|v| v.abs() < 1e-3).unwrap_or(false)
        || (series.windows(2).all(|w| w[1].abs() <= w[0].abs()) && series[3].abs() < 0.05)
}

/// Decide whether X -> h(X) preserves a conditioned limit for the pair
/// `np`, and construct the transformed norming and limit.
///
/// `limit_cdf` is the conditional law H(x) of the original coordinates at
/// y = 1. The transformed law is H(chi^{-1}(x)).
///
/// Route selection: if beta = o(alpha), h itself is classified for regular
/// variation (flagged in the note). Otherwise beta must increase to
/// infinity; constant alpha tests h on the log scale (RV index p gives
/// chi(y) = e^{py} - 1 and scale h(beta); Pi gives chi(y) = y and scale
/// h(alpha + beta) - h(beta)); non-constant alpha requires
/// f = alpha(beta^-1) self-neglecting and classifies h(H_f^-1) the same
/// way, with H_f the Gamma function built from f.
pub fn change_coordinates(
    h: &FunctionHandle,
    np: &NormingPair,
    limit_cdf: ScalarFn,
) -> Result<CoordinateChange, TransformError> {
    if !h.is_monotone() {
        return Err(TransformError::Unsupported {
            what: format!("h '{}' must be monotone increasing", h.name()),
        });
    }

    let beta2 = {
        let (he, be) = (h.eval_fn(), np.beta.eval_fn());
        FunctionHandle::from_closure_auto(
            format!("beta2[h={},beta={}]", h.name(), np.beta.name()),
            vec![],
            np.beta.domain(),
            Arc::new(move |t| he(be(t))),
        )
    };
    let alpha2_secant = {
        let (he, ae, be) = (h.eval_fn(), np.alpha.eval_fn(), np.beta.eval_fn());
        FunctionHandle::from_closure_auto(
            format!("alpha2[h={},pair={}+{}]", h.name(), np.alpha.name(), np.beta.name()),
            vec![],
            np.beta.domain(),
            Arc::new(move |t| he(ae(t) + be(t)) - he(be(t))),
        )
    };
    let alpha2_hbeta = beta2.clone();

    let t_grid = default_t_grid();
    let x_grid = [0.5, 2.0, 4.0];

    // ---- degenerate-centering branch ------------------------------------
    if beta_negligible(np) {
        let he = h.eval_fn();
        let variation = crate::rv::classify_variation(move |t| he(t), &t_grid, &x_grid);
        let (admissible, chi, note) = match variation.kind {
            VariationKind::Rv { index } if index > 0.0 => {
                // pure power rescaling in x: chi(y) = y^index
                let chi = FunctionHandle::new(
                    "chi-power",
                    vec![index],
                    Interval::positive(),
                    true,
                    Arc::new(move |y: f64| y.powf(index)),
                )?
                .with_inverse(Arc::new(move |x: f64| x.powf(1.0 / index)))?;
                (true, chi, "centering negligible: h classified for plain regular variation")
            }
            _ => (false, chi_identity()?, "centering negligible and h not regularly varying"),
        };
        let limit = if admissible {
            let chi_c = chi.clone();
            let lc = limit_cdf.clone();
            Some(Arc::new(move |x: f64| match chi_c.inverse_at(x) {
                Some(y) if y.is_finite() => lc(y),
                _ => 0.0,
            }) as ScalarFn)
        } else {
            None
        };
        let alpha2 = {
            let (he, ae) = (h.eval_fn(), np.alpha.eval_fn());
            FunctionHandle::from_closure_auto(
                "alpha2[h(alpha)]",
                vec![],
                np.alpha.domain(),
                Arc::new(move |t| he(ae(t))),
            )
        };
        return Ok(CoordinateChange {
            h: h.clone(),
            alpha2,
            beta2,
            chi,
            admissible,
            variation,
            case: CoordCase::NegligibleCentering,
            limit_cdf: limit,
            note: note.to_string(),
        });
    }

    // beta must grow without bound for the remaining constructions.
    if np.beta.eval(1e8) <= np.beta.eval(1e2) || !np.beta.eval(1e8).is_finite() {
        return Err(TransformError::Unsupported {
            what: "centering must increase to infinity for this construction".into(),
        });
    }

    let (case, variation) = if alpha_is_constant(&np.alpha) {
        (CoordCase::ConstantScale, classify_h_log(h, &t_grid, &x_grid))
    } else {
        // Case with genuinely varying scale: f = alpha(beta^-1) must be
        // self-neglecting; classify V = h(H_f^-1) on the plain scale.
        let beta = np.beta.clone();
        let alpha = np.alpha.clone();
        let f = FunctionHandle::from_closure_auto(
            "alpha-of-beta-inv",
            vec![],
            Interval::positive(),
            Arc::new(move |t| {
                left_continuous_inverse(&beta, t).map(|s| alpha.eval(s)).unwrap_or(f64::NAN)
            }),
        );
        for &t in &[1e3, 1e6] {
            let ratio = f.eval(t + f.eval(t)) / f.eval(t);
            if !(ratio.is_finite() && (ratio - 1.0).abs() < 0.2) {
                return Err(TransformError::NotSelfNeglecting { ratio, t });
            }
        }
        let big_h = gamma_builder(&f)?;
        let (he, bh) = (h.eval_fn(), big_h.clone());
        let v = move |t: f64| {
            left_continuous_inverse(&bh, t).map(|s| he(s)).unwrap_or(f64::NAN)
        };
        (CoordCase::GammaComposition, crate::rv::classify_variation(v, &t_grid, &x_grid))
    };

    let (admissible, chi, alpha2) = match &variation.kind {
        VariationKind::Rv { index } => (true, chi_exp_power(*index)?, alpha2_hbeta),
        VariationKind::PiPlus { .. } | VariationKind::PiMinus { .. } => {
            (true, chi_identity()?, alpha2_secant)
        }
        _ => (false, chi_identity()?, alpha2_secant),
    };

    let limit = if admissible {
        let chi_c = chi.clone();
        let lc = limit_cdf.clone();
        Some(Arc::new(move |x: f64| match chi_c.inverse_at(x) {
            Some(y) if y.is_finite() => lc(y),
            // at or below the lower edge of chi's range (x <= -1 for
            // chi(y) = e^{py} - 1): the transformed law has no mass there
            _ => 0.0,
        }) as ScalarFn)
    } else {
        None
    };

    Ok(CoordinateChange {
        h: h.clone(),
        alpha2,
        beta2,
        chi,
        admissible,
        variation,
        case,
        limit_cdf: limit,
        note: if admissible {
            String::new()
        } else {
            "h admits no conditioned limit in these coordinates".to_string()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss;
    use crate::rv::{check_pi, parse_function_spec};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn pareto_cdf() -> FunctionHandle {
        FunctionHandle::new(
            "pareto-cdf",
            vec![],
            Interval::beyond_one(),
            true,
            Arc::new(|y: f64| 1.0 - 1.0 / y),
        )
        .unwrap()
    }

    fn exp_cdf() -> FunctionHandle {
        FunctionHandle::new(
            "exp-cdf",
            vec![],
            Interval::positive(),
            true,
            Arc::new(|y: f64| 1.0 - (-y).exp()),
        )
        .unwrap()
    }

    fn normal_cdf() -> FunctionHandle {
        FunctionHandle::new(
            "normal-cdf",
            vec![],
            Interval::open(-6.0, 6.0),
            true,
            Arc::new(gauss::std_normal_cdf),
        )
        .unwrap()
    }

    #[test]
    fn y_standardizer_examples() {
        // Pareto: identity map.
        let s = standardize_y(&pareto_cdf(), 1.0).unwrap();
        for y in [1.5, 3.0, 100.0] {
            assert_abs_diff_eq!(s.map.eval(y), y, epsilon = 1e-12);
        }
        // Exponential: map(y) = e^y, P[e^Y > x] = 1/x exactly for x >= 1.
        let s = standardize_y(&exp_cdf(), 0.0).unwrap();
        assert_abs_diff_eq!(s.map.eval(2.0), (2.0f64).exp(), epsilon = 1e-12);
        // Normal: map = 1/(1 - Phi).
        let s = standardize_y(&normal_cdf(), 0.0).unwrap();
        assert_abs_diff_eq!(s.map.eval(0.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn x_standardizer_cases() {
        use crate::rv::registry::{constant, identity, power};
        use crate::rv::NormingPair;

        // scale t^p with p = 1/2: map is x -> x^2
        let np = NormingPair::new(power(0.5), constant(0.0), 0.5, 0.0, PsiClass::ScaleOnly)
            .unwrap();
        let s = standardize_x(&np, PsiClass::ScaleOnly).unwrap();
        assert_eq!(s.direction, StandardizeDirection::XAlphaInverse);
        for x in [0.5, 2.0, 9.0] {
            assert_abs_diff_eq!(s.map.eval(x), x * x, epsilon = 1e-8);
        }

        // beta = identity: map = beta^-1 = identity
        let np = NormingPair::new(identity().shifted(0.0).unwrap(), identity(), 1.0, 1.0, PsiClass::Full);
        // identity alpha is not positive on all of R; use (1, inf) domain t
        let np = match np {
            Ok(np) => np,
            Err(_) => NormingPair::new(
                crate::rv::parse_function_spec("pareto_b").unwrap(),
                crate::rv::parse_function_spec("pareto_b").unwrap(),
                1.0,
                1.0,
                PsiClass::Full,
            )
            .unwrap(),
        };
        let s = standardize_x(&np, PsiClass::Full).unwrap();
        assert_eq!(s.direction, StandardizeDirection::XBetaInverse);
        for x in [2.0, 5.0, 42.0] {
            assert_abs_diff_eq!(s.map.eval(x), x, epsilon = 1e-9);
        }

        // product case: standardization impossible
        let np = NormingPair::new(
            constant(1.0),
            crate::rv::registry::normal_b().scaled(0.5).unwrap(),
            0.0,
            0.0,
            PsiClass::Product,
        )
        .unwrap();
        assert!(matches!(
            standardize_x(&np, PsiClass::Product),
            Err(TransformError::StandardizationImpossible)
        ));
    }

    #[test]
    fn negative_rho_reduction_power_example() {
        use crate::rv::registry::power;
        // beta(t) = 1 - 1/t, alpha(t) = 1/t, rho = -1: beta(inf) = 1,
        // new centering is exactly t.
        let beta = power(-1.0).negated().shifted(1.0).unwrap();
        let np = crate::rv::NormingPair::new(power(-1.0), beta, -1.0, 1.0, PsiClass::Full)
            .unwrap();
        let (x_map, pair) = reduce_negative_rho(&np).unwrap();
        for &t in &[1e3, 1e6, 1e9] {
            assert_abs_diff_eq!(pair.beta.eval(t), t, epsilon = 1e-3 * t);
        }
        assert_abs_diff_eq!(pair.rho, 1.0, epsilon = 1e-12);
        // x map sends values below beta(inf) = 1 to 1/(1-x)
        assert_abs_diff_eq!(x_map.eval(0.5), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn negative_rho_rejects_rapid_variation() {
        use std::sync::Arc;
        // beta = 1 - e^{-t}: new centering would be e^t / |rho|, not RV.
        let beta = FunctionHandle::new(
            "one-minus-exp",
            vec![],
            Interval::positive(),
            true,
            Arc::new(|t: f64| 1.0 - (-t).exp()),
        )
        .unwrap();
        let alpha = FunctionHandle::from_closure_auto(
            "exp-decay",
            vec![],
            Interval::positive(),
            Arc::new(|t: f64| (-t).exp().max(1e-300)),
        );
        let np = crate::rv::NormingPair::new(alpha, beta, -1.0, 1.0, PsiClass::Full).unwrap();
        let r = reduce_negative_rho(&np);
        assert!(
            matches!(
                r,
                Err(TransformError::NewBetaNotRegularlyVarying { .. })
                    | Err(TransformError::BetaInfNotFinite { .. })
            ),
            "expected rejection"
        );
    }

    #[test]
    fn rectify_beta_cases() {
        use crate::rv::registry::{constant, log_fn};

        // beta = log t: beta(inf) = inf, identity transform.
        let np = crate::rv::NormingPair::new(constant(1.0), log_fn(), 0.0, 1.0, PsiClass::Full)
            .unwrap();
        let (map, pair) = rectify_beta(&np, PiSign::Plus, None).unwrap();
        assert_abs_diff_eq!(map.eval(3.3), 3.3, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.beta.eval(100.0), 100f64.ln(), epsilon = 1e-12);

        // beta = 1 - 1/log t, alpha = 1/(log t)^2: rectified beta = log t,
        // alpha = 1.
        let beta = FunctionHandle::new(
            "one-minus-recip-log",
            vec![],
            Interval::beyond_one(),
            true,
            Arc::new(|t: f64| 1.0 - 1.0 / t.ln()),
        )
        .unwrap();
        let alpha = FunctionHandle::from_closure_auto(
            "recip-log-sq",
            vec![],
            Interval::beyond_one(),
            Arc::new(|t: f64| {
                let l = t.ln();
                1.0 / (l * l)
            }),
        );
        let np = crate::rv::NormingPair::new(alpha, beta, 0.0, 1.0, PsiClass::Full).unwrap();
        // beta(inf) = 1 exactly; the numeric estimator is biased for this
        // 1/log-rate family, so supply the closed-form limit.
        let (_, pair) = rectify_beta(&np, PiSign::Plus, Some(1.0)).unwrap();
        for &t in &[1e2f64, 1e4, 1e6] {
            let l = t.ln();
            assert!((pair.beta.eval(t) - l).abs() < 1e-3 * l, "beta {}", pair.beta.eval(t));
            assert!((pair.alpha.eval(t) - 1.0).abs() < 1e-3, "alpha {}", pair.alpha.eval(t));
        }
        // rectified centering passes the Pi+ numerical check with aux = alpha
        let (k, _) = check_pi(
            &pair.beta,
            &pair.alpha,
            &[1e4, 1e6, 1e8],
            &[0.5, 2.0, 4.0],
        );
        let k = k.expect("rectified beta should be Pi+");
        assert!((k - 1.0).abs() < 0.05, "k {k}");

        // beta = -log t is Pi-minus: negation reduces to the first example.
        let np = crate::rv::NormingPair::new(
            constant(1.0),
            log_fn().negated(),
            0.0,
            -1.0,
            PsiClass::Full,
        )
        .unwrap();
        let (map, pair) = rectify_beta(&np, PiSign::Minus, None).unwrap();
        assert_abs_diff_eq!(pair.beta.eval(100.0), 100f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(map.eval(-2.5), 2.5, epsilon = 1e-12);
    }

    fn bvn_pair(rho: f64) -> crate::rv::NormingPair {
        crate::rv::NormingPair::new(
            crate::rv::registry::constant(1.0),
            crate::rv::registry::normal_b().scaled(rho).unwrap(),
            0.0,
            0.0,
            PsiClass::Product,
        )
        .unwrap()
    }

    fn gaussian_limit(rho: f64) -> ScalarFn {
        let sigma = (1.0 - rho * rho).sqrt();
        Arc::new(move |x: f64| gauss::std_normal_cdf(x / sigma))
    }

    #[test]
    fn coord_change_exp_h_gives_log_limit() {
        // h(x) = e^x (RV_1 on the log scale): limit N(log(1+x)/sigma).
        let rho = 0.5;
        let cc = change_coordinates(
            &parse_function_spec("exp").unwrap(),
            &bvn_pair(rho),
            gaussian_limit(rho),
        )
        .unwrap();
        assert!(cc.admissible);
        assert_eq!(cc.case, CoordCase::ConstantScale);
        let p = cc.variation.rv_index().expect("RV expected");
        assert!((p - 1.0).abs() < 1e-9);
        let limit = cc.limit_cdf.unwrap();
        let sigma = 0.75f64.sqrt();
        for &x in &[-0.9f64, -0.5, 0.0, 1.0, 10.0] {
            let expect = gauss::std_normal_cdf((1.0 + x).ln() / sigma);
            assert_abs_diff_eq!(limit(x), expect, epsilon = 1e-9);
        }
        // alpha2 = h(beta) here
        let t = 1e6;
        let b = crate::rv::registry::normal_b().eval(t) * rho;
        assert_abs_diff_eq!(cc.alpha2.eval(t), b.exp(), epsilon = 1e-6 * b.exp());
    }

    #[test]
    fn coord_change_log_binv_keeps_gaussian_limit() {
        // h = log(1/(1 - Phi(x))): Pi on the log scale, chi = identity,
        // limit unchanged; alpha2 asymptotically rho * b(t).
        let rho = 0.5;
        let h = parse_function_spec("compose:log,normal_binv").unwrap();
        let cc = change_coordinates(&h, &bvn_pair(rho), gaussian_limit(rho)).unwrap();
        assert!(cc.admissible);
        assert!(cc.variation.is_pi(), "variation {}", cc.variation.tag());
        let limit = cc.limit_cdf.unwrap();
        let sigma = 0.75f64.sqrt();
        for &x in &[-1.0, 0.0, 2.0] {
            assert_abs_diff_eq!(limit(x), gauss::std_normal_cdf(x / sigma), epsilon = 1e-12);
        }
        // beta2 = -log SF(rho b(t)); alpha2 / (rho b(t)) decreasing toward 1
        let mut prev = f64::INFINITY;
        for &t in &[1e4, 1e6, 1e8] {
            let b = crate::rv::registry::normal_b().eval(t);
            let expect_beta2 = gauss::neg_log_normal_sf(rho * b);
            assert_abs_diff_eq!(cc.beta2.eval(t), expect_beta2, epsilon = 1e-9);
            let ratio = cc.alpha2.eval(t) / (rho * b);
            assert!(ratio > 1.0 && ratio < prev, "ratio {ratio} at t = {t}");
            prev = ratio;
        }
        assert!(prev < 1.5);
    }

    #[test]
    fn coord_change_binv_is_inadmissible() {
        // h = b^{<-} = 1/(1 - Phi): neither RV nor Pi on the log scale.
        let rho = 0.5;
        let h = parse_function_spec("normal_binv").unwrap();
        let cc = change_coordinates(&h, &bvn_pair(rho), gaussian_limit(rho)).unwrap();
        assert!(!cc.admissible);
        assert!(cc.variation.is_neither());
        assert!(cc.limit_cdf.is_none());
        assert!(!cc.variation.evidence.is_empty());
    }

    #[test]
    fn coord_change_round_trip_identity() {
        // H2(chi(y)) recovers H(y) exactly for closed-form chi.
        let rho = 0.5;
        let cc = change_coordinates(
            &parse_function_spec("exp").unwrap(),
            &bvn_pair(rho),
            gaussian_limit(rho),
        )
        .unwrap();
        let limit2 = cc.limit_cdf.as_ref().unwrap();
        let limit = gaussian_limit(rho);
        for &y in &[-2.0, -0.3, 0.0, 1.0, 3.0] {
            let x = cc.chi.eval(y);
            assert_abs_diff_eq!(limit2(x), limit(y), epsilon = 1e-9);
        }
    }
}
