//! Executable conditional models: samplers paired with norming functions
//! and closed-form conditional limit laws, the unit of verification for the
//! Monte Carlo harness.
//!
//! Included: the correlated Gaussian pair (product-form limit), its
//! exponential-margin transform, three heavy-tailed mixtures over a
//! logistic base pair (positive, negative and zero scaling index), the
//! logistic base itself, and synthetic standardized pairs drawn from a
//! spectral measure.

mod logistic;

pub use logistic::{logistic_nu_rect, sample_logistic_pareto, LogisticDependence};

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::gauss;
use crate::rv::{registry, FunctionHandle, Interval, NormingPair, PsiClass, ScalarFn};
use crate::seeding::chunked_draws;
use crate::spectral::{MuStar, SpectralMeasure};
use crate::transforms::{Provenance, StandardizeDirection, Standardizer};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter {name} = {value} violates: {constraint}")]
    InvalidParameter { name: &'static str, value: f64, constraint: &'static str },
    #[error("unknown model spec '{spec}'; known: {known}")]
    UnknownModel { spec: String, known: String },
    #[error("limit CDF failed its proper-CDF check: {reason}")]
    ImproperLimit { reason: String },
    #[error(transparent)]
    Rv(#[from] crate::rv::RvError),
    #[error(transparent)]
    Transform(#[from] crate::transforms::TransformError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}

pub type PairSampler = Arc<dyn Fn(usize, u64) -> Vec<(f64, f64)> + Send + Sync>;
pub type JointDensity = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A sampler of (X, Y) pairs together with its norming pair (in the
/// standardized-Y scale), the Y-standardizing map, and the closed-form
/// conditional limit CDF of the normalized X given Y large.
#[derive(Clone)]
pub struct ConditionalModel {
    pub name: String,
    pub sampler: PairSampler,
    pub norming: NormingPair,
    pub y_standardizer: Standardizer,
    pub limit_cdf: ScalarFn,
    /// Interval on which the limit runs from ~0 to ~1; used for grids.
    pub limit_support: (f64, f64),
    pub degenerate_under_naive_scaling: bool,
    /// Spectral measure of the standardized limit, when the model is
    /// standardized (enables the random-norming comparison against G).
    pub spectral: Option<SpectralMeasure>,
}

impl ConditionalModel {
    pub fn draw(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        (self.sampler)(n, seed)
    }

    /// Verify the limit CDF is a proper distribution function on its
    /// support: monotone on a 1000-point grid and within 1e-6 of 0 and 1 at
    /// the endpoints.
    pub fn validate_limit_cdf(&self) -> Result<(), ModelError> {
        let (lo, hi) = self.limit_support;
        let grid = support_grid(lo, hi, 1000);
        let mut prev = f64::NEG_INFINITY;
        for &x in &grid {
            let v = (self.limit_cdf)(x);
            if !v.is_finite() || v < prev - 1e-12 {
                return Err(ModelError::ImproperLimit {
                    reason: format!("non-monotone or non-finite at x = {x}"),
                });
            }
            prev = v;
        }
        let at_lo = (self.limit_cdf)(lo);
        let at_hi = (self.limit_cdf)(hi);
        if at_lo.abs() > 1e-6 || (at_hi - 1.0).abs() > 1e-6 {
            return Err(ModelError::ImproperLimit {
                reason: format!("endpoints H({lo}) = {at_lo}, H({hi}) = {at_hi}"),
            });
        }
        Ok(())
    }
}

/// Evaluation grid on (lo, hi): geometric when the support is positive and
/// spans decades, linear otherwise.
pub fn support_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let k = (n - 1) as f64;
    if lo > 0.0 && hi / lo > 1e3 {
        let (la, lb) = (lo.ln(), hi.ln());
        (0..n).map(|i| (la + (lb - la) * i as f64 / k).exp()).collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / k).collect()
    }
}

/// Find (lo, hi) with cdf(lo) <= eps and cdf(hi) >= 1 - eps by bisection on
/// a wide bracket; `positive_support` selects the search range.
fn support_from_cdf<F: Fn(f64) -> f64>(cdf: F, positive_support: bool, eps: f64) -> (f64, f64) {
    let (a, b): (f64, f64) = if positive_support { (1e-12, 1e12) } else { (-700.0, 700.0) };
    let mid = |lo: f64, hi: f64| {
        if positive_support {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        }
    };
    // lower endpoint: largest x with cdf(x) <= eps
    let (mut lo_lo, mut lo_hi) = (a, b);
    for _ in 0..200 {
        let m = mid(lo_lo, lo_hi);
        if cdf(m) <= eps {
            lo_lo = m;
        } else {
            lo_hi = m;
        }
    }
    // upper endpoint: smallest x with cdf(x) >= 1 - eps
    let (mut hi_lo, mut hi_hi) = (a, b);
    for _ in 0..200 {
        let m = mid(hi_lo, hi_hi);
        if cdf(m) >= 1.0 - eps {
            hi_hi = m;
        } else {
            hi_lo = m;
        }
    }
    (lo_lo, hi_hi)
}

fn identity_standardizer() -> Standardizer {
    Standardizer {
        direction: StandardizeDirection::YMarginal,
        map: registry::identity(),
        provenance: Provenance {
            case: "already standardized".to_string(),
            beta_inf: None,
            gamma: Some(1.0),
        },
    }
}

fn normal_y_standardizer() -> Standardizer {
    Standardizer {
        direction: StandardizeDirection::YMarginal,
        map: registry::normal_b_inverse(),
        provenance: Provenance {
            case: "recip-survival of the standard normal".to_string(),
            beta_inf: None,
            gamma: Some(0.0),
        },
    }
}

/// n correlated standard Gaussian pairs (X, Y) with correlation `rho`.
pub fn sample_bivariate_normal(
    rho: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, ModelError> {
    if !(rho.abs() < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "rho",
            value: rho,
            constraint: "|rho| < 1",
        });
    }
    let sig = (1.0 - rho * rho).sqrt();
    Ok(chunked_draws(n, seed, move |rng| {
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        (sig * n1 + rho * n2, n2)
    }))
}

/// Correlated Gaussian pair: alpha = 1, beta(t) = rho b(t), product-form
/// limit with conditional law N(x / sqrt(1 - rho^2)).
pub fn bvn_model(rho: f64) -> Result<ConditionalModel, ModelError> {
    if !(rho.abs() < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "rho",
            value: rho,
            constraint: "|rho| < 1",
        });
    }
    let sigma = (1.0 - rho * rho).sqrt();
    let beta = if rho == 0.0 {
        registry::constant(0.0)
    } else if rho > 0.0 {
        registry::normal_b().scaled(rho)?
    } else {
        let r = rho;
        FunctionHandle::from_closure_auto(
            format!("scale:{r},normal_b"),
            vec![r],
            Interval::beyond_one(),
            Arc::new(move |t| r * gauss::normal_b(t)),
        )
    };
    let norming = NormingPair::new(registry::constant(1.0), beta, 0.0, 0.0, PsiClass::Product)?;
    let model = ConditionalModel {
        name: format!("bvn:{rho}"),
        sampler: Arc::new(move |n, seed| {
            sample_bivariate_normal(rho, n, seed).expect("validated rho")
        }),
        norming,
        y_standardizer: normal_y_standardizer(),
        limit_cdf: Arc::new(move |x: f64| gauss::std_normal_cdf(x / sigma)),
        limit_support: (-10.0, 10.0),
        degenerate_under_naive_scaling: false,
        spectral: None,
    };
    model.validate_limit_cdf()?;
    Ok(model)
}

/// Gaussian pair with X transformed to unit-exponential margins,
/// X -> -log(1 - Phi(X)). Same conditional limit as `bvn_model`.
///
/// The scale is the tangent (delta-method) linearization of the transform
/// at rho b(t): alpha(t) = hazard(rho b(t)), which is asymptotically
/// equivalent to rho b(t) but sits much closer to the limit at thresholds
/// reachable by simulation; beta(t) = -log SF(rho b(t)).
pub fn bvn_exponential_margin_model(rho: f64) -> Result<ConditionalModel, ModelError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "rho",
            value: rho,
            constraint: "0 < rho < 1 (the centering must increase to infinity)",
        });
    }
    let sigma = (1.0 - rho * rho).sqrt();
    let alpha = FunctionHandle::from_closure_auto(
        "exp-margin-scale",
        vec![rho],
        Interval::open(2.0, f64::INFINITY),
        Arc::new(move |t| gauss::normal_hazard(rho * gauss::normal_b(t))),
    );
    let beta = FunctionHandle::from_closure_auto(
        "exp-margin-center",
        vec![rho],
        Interval::open(2.0, f64::INFINITY),
        Arc::new(move |t| gauss::neg_log_normal_sf(rho * gauss::normal_b(t))),
    );
    let norming = NormingPair::new(alpha, beta, 0.0, 0.0, PsiClass::Product)?;
    let model = ConditionalModel {
        name: format!("bvn-exp:{rho}"),
        sampler: Arc::new(move |n, seed| {
            let sig = (1.0 - rho * rho).sqrt();
            chunked_draws(n, seed, move |rng| {
                let n1: f64 = rng.sample(StandardNormal);
                let n2: f64 = rng.sample(StandardNormal);
                (gauss::neg_log_normal_sf(sig * n1 + rho * n2), n2)
            })
        }),
        norming,
        y_standardizer: normal_y_standardizer(),
        limit_cdf: Arc::new(move |x: f64| gauss::std_normal_cdf(x / sigma)),
        limit_support: (-10.0, 10.0),
        degenerate_under_naive_scaling: false,
        spectral: None,
    };
    model.validate_limit_cdf()?;
    Ok(model)
}

/// Mixture flavors over the logistic base pair (U, V):
/// a fair coin B picks (U, h(V)) or (h(U), V).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixtureKind {
    /// h(t) = t^p, 0 < p < 1: positive scaling index, X/t^p has the
    /// oracle-normalized logistic limit.
    PowerScale { p: f64 },
    /// Reciprocal of the power mixture (X -> 1/X): negative index -p.
    ReciprocalScale { p: f64 },
    /// h = log, auxiliary 1: zero index, centering log t.
    LogCenter,
}

/// Build a mixture model. All mixtures are standard regularly varying and
/// asymptotically independent, while the base (U, V) is not; conditioning
/// on Y large isolates the h-transformed branch.
///
/// The conditional limits are normalized as genuine conditional laws
/// (the marginal tail constant 1/2 of Y cancels in P[.|Y > t]), verified
/// against the brute-force Monte Carlo conditional CDF.
pub fn mixture_model(kind: MixtureKind, theta: f64) -> Result<ConditionalModel, ModelError> {
    let dep = LogisticDependence::new(theta)?;
    let check_p = |p: f64| {
        if !(p > 0.0 && p < 1.0) {
            Err(ModelError::InvalidParameter {
                name: "p",
                value: p,
                constraint: "0 < p < 1",
            })
        } else {
            Ok(())
        }
    };

    let (name, sampler, norming, limit, positive_support): (
        String,
        PairSampler,
        NormingPair,
        ScalarFn,
        bool,
    ) = match kind {
        MixtureKind::PowerScale { p } => {
            check_p(p)?;
            let sampler: PairSampler = Arc::new(move |n, seed| {
                chunked_draws(n, seed, move |rng| {
                    let coin = rand::Rng::gen_bool(rng, 0.5);
                    let (u, v) = logistic::draw_logistic_pair(rng, theta);
                    if coin {
                        (u, v.powf(p))
                    } else {
                        (u.powf(p), v)
                    }
                })
            });
            let norming = NormingPair::new(
                registry::power(p),
                registry::constant(0.0),
                p,
                0.0,
                PsiClass::ScaleOnly,
            )?;
            let limit: ScalarFn = Arc::new(move |x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    dep.nu_rect(x.powf(1.0 / p), 1.0).min(1.0)
                }
            });
            (format!("mix1:p={p},theta={theta}"), sampler, norming, limit, true)
        }
        MixtureKind::ReciprocalScale { p } => {
            check_p(p)?;
            let sampler: PairSampler = Arc::new(move |n, seed| {
                chunked_draws(n, seed, move |rng| {
                    let coin = rand::Rng::gen_bool(rng, 0.5);
                    let (u, v) = logistic::draw_logistic_pair(rng, theta);
                    if coin {
                        (1.0 / u, v.powf(p))
                    } else {
                        (u.powf(-p), v)
                    }
                })
            });
            let norming = NormingPair::new(
                registry::power(-p),
                registry::constant(0.0),
                -p,
                0.0,
                PsiClass::ScaleOnly,
            )?;
            let limit: ScalarFn = Arc::new(move |x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    (1.0 - dep.nu_rect(x.powf(-1.0 / p), 1.0)).clamp(0.0, 1.0)
                }
            });
            (format!("mix2:p={p},theta={theta}"), sampler, norming, limit, true)
        }
        MixtureKind::LogCenter => {
            let sampler: PairSampler = Arc::new(move |n, seed| {
                chunked_draws(n, seed, move |rng| {
                    let coin = rand::Rng::gen_bool(rng, 0.5);
                    let (u, v) = logistic::draw_logistic_pair(rng, theta);
                    if coin {
                        (u, v.ln())
                    } else {
                        (u.ln(), v)
                    }
                })
            });
            let norming = NormingPair::new(
                registry::constant(1.0),
                registry::log_fn(),
                0.0,
                1.0,
                PsiClass::Full,
            )?;
            let limit: ScalarFn =
                Arc::new(move |x: f64| dep.nu_rect(x.exp().max(1e-300), 1.0).min(1.0));
            (format!("mix3:theta={theta}"), sampler, norming, limit, false)
        }
    };

    let support = support_from_cdf(|x| limit(x), positive_support, 1e-7);
    let model = ConditionalModel {
        name,
        sampler,
        norming,
        y_standardizer: identity_standardizer(),
        limit_cdf: limit,
        limit_support: support,
        degenerate_under_naive_scaling: true,
        spectral: None,
    };
    model.validate_limit_cdf()?;
    Ok(model)
}

/// The logistic base pair itself as a conditional model: X/t has the
/// nondegenerate limit nu([0,x] x (1,inf]) — the required contrast with the
/// asymptotically independent mixtures.
pub fn logistic_base_model(theta: f64) -> Result<ConditionalModel, ModelError> {
    let dep = LogisticDependence::new(theta)?;
    let norming = NormingPair::new(
        registry::pareto_b(),
        registry::constant(0.0),
        1.0,
        0.0,
        PsiClass::ScaleOnly,
    )?;
    let limit: ScalarFn = Arc::new(move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            dep.nu_rect(x, 1.0).min(1.0)
        }
    });
    let support = support_from_cdf(|x| limit(x), true, 1e-7);
    let model = ConditionalModel {
        name: format!("logistic:{theta}"),
        sampler: Arc::new(move |n, seed| {
            sample_logistic_pareto(theta, n, seed).expect("validated theta")
        }),
        norming,
        y_standardizer: identity_standardizer(),
        limit_cdf: limit,
        limit_support: support,
        degenerate_under_naive_scaling: false,
        spectral: None,
    };
    model.validate_limit_cdf()?;
    Ok(model)
}

/// Synthetic standardized pair drawn from mu* for a given spectral measure:
/// the limit CDF is H* itself and the model carries its spectral measure,
/// enabling the random-norming comparison against G.
pub fn mu_star_model(s: SpectralMeasure) -> Result<ConditionalModel, ModelError> {
    let mu = MuStar::new(s.clone());
    let limit_mu = mu.clone();
    let limit: ScalarFn = Arc::new(move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            limit_mu.h_star(x).unwrap_or(f64::NAN)
        }
    });
    let norming = NormingPair::new(
        registry::pareto_b(),
        registry::constant(0.0),
        1.0,
        0.0,
        PsiClass::ScaleOnly,
    )?;
    let sampler_mu = mu.clone();
    Ok(ConditionalModel {
        name: "mustar".to_string(),
        sampler: Arc::new(move |n, seed| sampler_mu.sample(n, seed).unwrap_or_default()),
        norming,
        y_standardizer: identity_standardizer(),
        limit_cdf: limit,
        // H* may have flat pieces for atomic S, so endpoint checks use a
        // generous span; not validated as strictly increasing.
        limit_support: (1e-8, 1e8),
        degenerate_under_naive_scaling: false,
        spectral: Some(s),
    })
}

/// Joint-tail diagnostics: t P[X > t, Y > t] against the marginal tail
/// constants, with t at the (1 - exceed_prob) empirical quantile of Y.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AsympIndepReport {
    pub threshold: f64,
    pub joint_stat: f64,
    pub x_marginal_stat: f64,
    pub y_marginal_stat: f64,
    pub n: usize,
}

pub fn asymptotic_independence_check(
    model: &ConditionalModel,
    exceed_prob: f64,
    n: usize,
    seed: u64,
) -> AsympIndepReport {
    let pairs = model.draw(n, seed);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    ys.sort_by(f64::total_cmp);
    let idx = ((1.0 - exceed_prob) * n as f64).ceil() as usize;
    let t = ys[idx.min(n - 1)];
    let nf = n as f64;
    let joint = pairs.iter().filter(|&&(x, y)| x > t && y > t).count() as f64;
    let xm = pairs.iter().filter(|&&(x, _)| x > t).count() as f64;
    let ym = pairs.iter().filter(|&&(_, y)| y > t).count() as f64;
    AsympIndepReport {
        threshold: t,
        joint_stat: t * joint / nf,
        x_marginal_stat: t * xm / nf,
        y_marginal_stat: t * ym / nf,
        n,
    }
}

/// Joint-density models for the density-scaling check.
#[derive(Clone)]
pub struct DensityModel {
    pub name: String,
    pub density: JointDensity,
    pub norming: NormingPair,
    /// Limit surface g(u, v) of t^2 alpha(t) f(alpha(t) u + beta(t), t v).
    pub limit_density: JointDensity,
}

/// Gaussian dependence with the Y coordinate carried to an exact Pareto(1)
/// margin: f(x, y) = phi((x - rho b(y))/sigma)/sigma * y^{-2} for y > 1.
pub fn bvn_pareto_density_model(rho: f64) -> Result<DensityModel, ModelError> {
    if !(rho.abs() < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "rho",
            value: rho,
            constraint: "|rho| < 1",
        });
    }
    let sigma = (1.0 - rho * rho).sqrt();
    let beta = if rho == 0.0 {
        registry::constant(0.0)
    } else if rho > 0.0 {
        registry::normal_b().scaled(rho)?
    } else {
        let r = rho;
        FunctionHandle::from_closure_auto(
            format!("scale:{r},normal_b"),
            vec![r],
            Interval::beyond_one(),
            Arc::new(move |t| r * gauss::normal_b(t)),
        )
    };
    Ok(DensityModel {
        name: format!("bvn-pareto:{rho}"),
        density: Arc::new(move |x: f64, y: f64| {
            if y <= 1.0 {
                0.0
            } else {
                gauss::phi((x - rho * gauss::normal_b(y)) / sigma) / sigma / (y * y)
            }
        }),
        norming: NormingPair::new(registry::constant(1.0), beta, 0.0, 0.0, PsiClass::Product)?,
        limit_density: Arc::new(move |u: f64, v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                gauss::phi(u / sigma) / sigma / (v * v)
            }
        }),
    })
}

/// Independent toy: X standard normal, Y exact Pareto(1). The scaled
/// density equals its limit at every t.
pub fn product_pareto_density_model() -> Result<DensityModel, ModelError> {
    Ok(DensityModel {
        name: "product-pareto".to_string(),
        density: Arc::new(|x: f64, y: f64| {
            if y <= 1.0 {
                0.0
            } else {
                gauss::phi(x) / (y * y)
            }
        }),
        norming: NormingPair::new(
            registry::constant(1.0),
            registry::constant(0.0),
            0.0,
            0.0,
            PsiClass::Product,
        )?,
        limit_density: Arc::new(|u: f64, v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                gauss::phi(u) / (v * v)
            }
        }),
    })
}

/// Deterministic, sorted list of recognized model specs.
pub fn list_models() -> Vec<&'static str> {
    vec![
        "bvn-exp:<rho>",
        "bvn:<rho>",
        "logistic:<theta>",
        "mix1:p=<p>,theta=<theta>",
        "mix2:p=<p>,theta=<theta>",
        "mix3:theta=<theta>",
        "mustar:<spectral-spec>",
    ]
}

fn parse_kv(rest: &str) -> Vec<(&str, &str)> {
    rest.split(',')
        .filter_map(|part| part.split_once('='))
        .collect()
}

/// Parse a model spec like "bvn:0.5" or "mix1:p=0.5,theta=0.5".
pub fn parse_model_spec(spec: &str) -> Result<ConditionalModel, ModelError> {
    let unknown = || ModelError::UnknownModel {
        spec: spec.to_string(),
        known: list_models().join(", "),
    };
    let (head, rest) = spec.split_once(':').ok_or_else(unknown)?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| unknown());
    match head {
        "bvn" => bvn_model(num(rest)?),
        "bvn-exp" => bvn_exponential_margin_model(num(rest)?),
        "logistic" => logistic_base_model(num(rest)?),
        "mix1" | "mix2" => {
            let kv = parse_kv(rest);
            let get = |key: &str| {
                kv.iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| *v)
                    .ok_or_else(unknown)
                    .and_then(num)
            };
            let p = get("p")?;
            let theta = get("theta")?;
            let kind = if head == "mix1" {
                MixtureKind::PowerScale { p }
            } else {
                MixtureKind::ReciprocalScale { p }
            };
            mixture_model(kind, theta)
        }
        "mix3" => {
            let kv = parse_kv(rest);
            let theta = kv
                .iter()
                .find(|(k, _)| *k == "theta")
                .map(|(_, v)| *v)
                .ok_or_else(unknown)
                .and_then(num)?;
            mixture_model(MixtureKind::LogCenter, theta)
        }
        "mustar" => {
            let s = crate::spectral::parse_spectral_spec(rest)?;
            mu_star_model(s)
        }
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bvn_sampler_moments() {
        let pairs = sample_bivariate_normal(0.0, 100_000, 1).unwrap();
        let r = correlation(&pairs);
        assert!(r.abs() < 0.01, "r = {r}");

        let pairs = sample_bivariate_normal(0.5, 1_000_000, 2).unwrap();
        let r = correlation(&pairs);
        assert!((r - 0.5).abs() < 0.005, "r = {r}");

        // Y marginal is standard normal
        let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        ys.sort_by(f64::total_cmp);
        let n = ys.len() as f64;
        let mut ks = 0.0f64;
        for (i, &y) in ys.iter().enumerate() {
            let f = crate::gauss::std_normal_cdf(y);
            ks = ks.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        }
        assert!(ks < 0.002, "KS {ks}");

        assert!(sample_bivariate_normal(1.0, 10, 1).is_err());
    }

    fn correlation(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len() as f64;
        let (mx, my) = pairs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (mx / n, my / n);
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for &(x, y) in pairs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn bvn_limit_examples() {
        let m = bvn_model(0.7).unwrap();
        assert_abs_diff_eq!((m.limit_cdf)(0.0), 0.5, epsilon = 1e-12);
        let m = bvn_model(0.5).unwrap();
        let sigma = 0.75f64.sqrt();
        for &x in &[-1.0, 0.3, 2.0] {
            assert_abs_diff_eq!(
                (m.limit_cdf)(x),
                crate::gauss::std_normal_cdf(x / sigma),
                epsilon = 1e-12
            );
        }
        // rho = 0: exact independence, standard normal limit
        let m = bvn_model(0.0).unwrap();
        assert_abs_diff_eq!(
            (m.limit_cdf)(1.0),
            crate::gauss::std_normal_cdf(1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bvn_exp_margin_model_properties() {
        let m = bvn_exponential_margin_model(0.5).unwrap();
        let b = bvn_model(0.5).unwrap();
        for &x in &[-1.0, 0.0, 1.5] {
            assert_abs_diff_eq!((m.limit_cdf)(x), (b.limit_cdf)(x), epsilon = 1e-12);
        }
        assert!(bvn_exponential_margin_model(-0.3).is_err());
        assert!(bvn_exponential_margin_model(0.0).is_err());

        // Pi property of V(t) = -log SF(log t) with auxiliary log t
        let l = |t: f64| crate::gauss::neg_log_normal_sf(t.ln());
        let t = 1e8f64;
        let x = 2.0f64;
        let lhs = (l(t * x) - l(t)) / t.ln();
        assert!((lhs - x.ln()).abs() < 5e-2, "lhs {lhs}");

        // psi2 of the norming vanishes along the grid
        let est = crate::rv::estimate_psi_limits(
            &m.norming,
            2.0,
            &crate::rv::default_t_grid(),
        )
        .unwrap();
        let series: Vec<f64> = est.series.iter().map(|r| r.2).collect();
        assert!(
            series.windows(2).all(|w| w[1].abs() <= w[0].abs() * 1.01),
            "psi2 {series:?}"
        );
        assert!(est.psi2.abs() < 0.2, "psi2 {}", est.psi2);

        // tangent scale is asymptotically rho b(t), approached from above
        let mut prev = f64::INFINITY;
        for &t in &[1e4, 1e6, 1e8, 1e10] {
            let ratio = m.norming.alpha.eval(t) / (0.5 * crate::gauss::normal_b(t));
            assert!(ratio > 1.0 && ratio < prev, "ratio {ratio} at {t}");
            prev = ratio;
        }
    }

    #[test]
    fn mixture_limits_are_proper() {
        for kind in [
            MixtureKind::PowerScale { p: 0.5 },
            MixtureKind::ReciprocalScale { p: 0.5 },
            MixtureKind::LogCenter,
        ] {
            let m = mixture_model(kind, 0.5).unwrap();
            m.validate_limit_cdf().unwrap();
            assert!(m.degenerate_under_naive_scaling);
        }
        assert!(mixture_model(MixtureKind::PowerScale { p: 1.5 }, 0.5).is_err());
        assert!(mixture_model(MixtureKind::PowerScale { p: 0.5 }, 1.2).is_err());
    }

    #[test]
    fn power_mixture_limit_value() {
        // p = 1/2, theta = 1/2, x: H(x) = nu([0, x^2] x (1, inf])
        let m = mixture_model(MixtureKind::PowerScale { p: 0.5 }, 0.5).unwrap();
        let dep = LogisticDependence::new(0.5).unwrap();
        for &x in &[0.3, 1.0, 4.0] {
            assert_abs_diff_eq!((m.limit_cdf)(x), dep.nu_rect(x * x, 1.0), epsilon = 1e-14);
        }
        // limit tends to 1
        assert!((m.limit_cdf)(1e6) > 1.0 - 1e-6);
    }

    #[test]
    fn asymptotic_independence_dichotomy() {
        // mixture: joint statistic vanishes, marginals carry constant 1/2
        let m = mixture_model(MixtureKind::PowerScale { p: 0.5 }, 0.5).unwrap();
        let rep = asymptotic_independence_check(&m, 1e-3, 2_000_000, 9);
        assert!(rep.joint_stat < 0.05, "joint {}", rep.joint_stat);
        assert!((rep.y_marginal_stat - 0.5).abs() < 0.05, "ym {}", rep.y_marginal_stat);
        assert!((rep.x_marginal_stat - 0.5).abs() < 0.05, "xm {}", rep.x_marginal_stat);

        // logistic base: joint statistic near 2 - 2^theta
        let base = logistic_base_model(0.5).unwrap();
        let rep = asymptotic_independence_check(&base, 1e-3, 2_000_000, 9);
        let expect = 2.0 - 2f64.sqrt();
        assert!((rep.joint_stat - expect).abs() < 0.05, "joint {}", rep.joint_stat);
    }

    #[test]
    fn registry_specs() {
        for spec in ["bvn:0.5", "bvn-exp:0.5", "logistic:0.5", "mix1:p=0.5,theta=0.5",
                     "mix2:p=0.5,theta=0.5", "mix3:theta=0.5", "mustar:uniform"] {
            parse_model_spec(spec).unwrap();
        }
        assert!(parse_model_spec("nope:1").is_err());
        assert!(parse_model_spec("mix1:theta=0.5").is_err());
    }

    #[test]
    fn density_models_evaluate() {
        let dm = bvn_pareto_density_model(0.5).unwrap();
        // marginal in y is exactly Pareto: integral over x of f(., y) = y^-2
        let y = 3.0;
        let total = crate::quad::integrate(|x| (dm.density)(x, y), -30.0, 30.0, 1e-10).unwrap();
        assert_abs_diff_eq!(total, 1.0 / (y * y), epsilon = 1e-9);

        let pm = product_pareto_density_model().unwrap();
        // scaled density equals the limit at every t for the product toy
        for &(t, u, v) in &[(10.0, 0.3, 1.5), (100.0, -1.0, 2.0)] {
            let scaled = t * t * 1.0 * (pm.density)(u, t * v);
            assert_abs_diff_eq!(scaled, (pm.limit_density)(u, v), epsilon = 1e-12);
        }
    }

    #[test]
    fn bvn_rectangle_factorizes() {
        // product-form rectangle H(x) / y against the empirical joint
        // measure t P[X - beta(t) <= x, Y* / t > y]
        let m = bvn_model(0.5).unwrap();
        let n = 2_000_000usize;
        let pairs = m.draw(n, 4);
        let t = 1e2; // modest threshold keeps counting error small
        let beta_t = m.norming.beta.eval(t);
        for &(x, y) in &[(0.0, 1.0), (1.0, 2.0)] {
            let count = pairs
                .iter()
                .filter(|&&(xx, yy)| {
                    let ystar = 1.0 / crate::gauss::std_normal_sf(yy);
                    xx - beta_t <= x && ystar / t > y
                })
                .count() as f64;
            let emp = t * count / n as f64;
            let limit = (m.limit_cdf)(x) / y;
            // Gaussian-tail convergence is logarithmic; 0.1 is the
            // tolerance band used for this family throughout.
            assert!((emp - limit).abs() < 0.1, "emp {emp} vs {limit} at ({x},{y})");
        }
    }
}
