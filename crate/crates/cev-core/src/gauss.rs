//! Standard normal helpers used throughout the crate.
//!
//! Everything funnels through `erfc` so tail quantities stay accurate far
//! into the tail (survival values are representable down to ~1e-300).

use statrs::function::erf::erfc;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal survival function P[N > x].
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// -log P[N > x], computed without cancellation for x far in the left tail.
pub fn neg_log_normal_sf(x: f64) -> f64 {
    if x < -1.0 {
        // P[N > x] = 1 - P[N <= x]; ln(1 - p) via ln_1p keeps monotonicity.
        -(-std_normal_cdf(x)).ln_1p()
    } else {
        -std_normal_sf(x).ln()
    }
}

/// Upper-tail quantile: the x with P[N > x] = q, for q in (0, 1).
///
/// Solved by bisection on the survival function, which is monotone and
/// accurate wherever `erfc` is; robust for q down to ~1e-300.
pub fn std_normal_sf_inv(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "quantile level must be in (0,1), got {q}");
    let mut lo = -42.0;
    let mut hi = 42.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if std_normal_sf(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The norming function b(t) of the standard normal: the upper 1/t quantile.
pub fn normal_b(t: f64) -> f64 {
    assert!(t > 1.0, "normal norming b(t) needs t > 1, got {t}");
    std_normal_sf_inv(1.0 / t)
}

/// Hazard rate phi(x) / P[N > x].
pub fn normal_hazard(x: f64) -> f64 {
    phi(x) / std_normal_sf(x)
}
