//! Left-continuous generalized inverse of a nondecreasing function:
//! inf { y : u(y) >= t }.

use super::{FunctionHandle, RvError};

const BISECT_TOL: f64 = 1e-12;

/// Compute inf{ y : u(y) >= t }.
///
/// Uses the attached exact inverse when present, otherwise brackets the
/// target with geometrically grown steps from the domain interior and
/// bisects to absolute tolerance 1e-12 in y. Returns an error when `u` is
/// not flagged monotone or `t` lies above the supremum of the range.
pub fn left_continuous_inverse(u: &FunctionHandle, t: f64) -> Result<f64, RvError> {
    if !u.is_monotone() {
        return Err(RvError::NotMonotone { name: u.name().to_string() });
    }
    if let Some(y) = u.inverse_at(t) {
        if y.is_finite() && u.domain().contains(y) {
            return Ok(y);
        }
        // fall through: target outside the comfortable range of the exact
        // inverse; handled by the generic path below.
    }

    let dom = u.domain();
    // Interior start point.
    let x = if dom.lo.is_finite() && dom.hi.is_finite() {
        0.5 * (dom.lo + dom.hi)
    } else if dom.lo.is_finite() {
        dom.lo + dom.lo.abs().max(1.0)
    } else if dom.hi.is_finite() {
        dom.hi - dom.hi.abs().max(1.0)
    } else {
        0.0
    };

    let f = |y: f64| u.eval(y);

    // Grow upward until u(hi) >= t (or the domain/f64 range is exhausted).
    let mut hi = x;
    if !(f(hi) >= t) {
        let mut step = hi.abs().max(1.0);
        let mut bracketed = false;
        for _ in 0..1100 {
            hi = if dom.hi.is_finite() { dom.hi - (dom.hi - hi) * 0.5 } else { hi + step };
            step *= 2.0;
            if !hi.is_finite() || !step.is_finite() {
                break;
            }
            if f(hi) >= t {
                bracketed = true;
                break;
            }
        }
        if !bracketed {
            return Err(RvError::InverseAboveRange { t });
        }
    }

    // Grow downward until u(lo) < t, or conclude every point satisfies u >= t.
    let mut lo = x;
    if f(lo) >= t {
        let mut step = lo.abs().max(1.0);
        let mut bracketed = false;
        for _ in 0..1100 {
            lo = if dom.lo.is_finite() { dom.lo + (lo - dom.lo) * 0.5 } else { lo - step };
            step *= 2.0;
            if !lo.is_finite() || !step.is_finite() {
                break;
            }
            if !(f(lo) >= t) {
                bracketed = true;
                break;
            }
        }
        if !bracketed {
            // u >= t everywhere we can look: the infimum is the lower end.
            return if dom.lo.is_finite() { Ok(dom.lo) } else { Err(RvError::BracketFailed { t }) };
        }
    }
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }

    let mut iter = 0;
    while hi - lo > BISECT_TOL && iter < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= t {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rv::{parse_function_spec, Interval};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn identity_case() {
        let id = parse_function_spec("identity").unwrap();
        assert_abs_diff_eq!(left_continuous_inverse(&id, 3.7).unwrap(), 3.7, epsilon = 1e-11);
    }

    #[test]
    fn pareto_norming_is_identity() {
        // u(y) = 1/(1-F(y)) for standard Pareto F(y) = 1 - 1/y is u(y) = y,
        // so b(t) = t.
        let u = FunctionHandle::new(
            "pareto-recip-survival",
            vec![],
            Interval::beyond_one(),
            true,
            Arc::new(|y: f64| 1.0 / (1.0 - (1.0 - 1.0 / y))),
        )
        .unwrap();
        for t in [1.5, 10.0, 1234.5] {
            assert_abs_diff_eq!(left_continuous_inverse(&u, t).unwrap(), t, epsilon = 1e-9);
        }
    }

    #[test]
    fn normal_norming_matches_tail_expansion() {
        // u(y) = 1/(1 - Phi(y)); b(t) = sqrt(2 log t) - ((1/2)(log log t + log 4 pi)) / sqrt(2 log t)
        // up to o(a(t)). The remainder is ~1.3e-2 at t = 1e6 and shrinks
        // below 1e-2 by t = 1e8.
        let u = parse_function_spec("normal_binv").unwrap();
        let expansion = |t: f64| {
            let s = (2.0 * t.ln()).sqrt();
            s - 0.5 * ((t.ln()).ln() + (4.0 * std::f64::consts::PI).ln()) / s
        };
        let b6 = left_continuous_inverse(&u, 1e6).unwrap();
        assert!((b6 - expansion(1e6)).abs() < 0.02, "gap {}", (b6 - expansion(1e6)).abs());
        let b8 = left_continuous_inverse(&u, 1e8).unwrap();
        assert!((b8 - expansion(1e8)).abs() < 0.01, "gap {}", (b8 - expansion(1e8)).abs());
    }

    #[test]
    fn bisection_agrees_with_exact_inverse() {
        let exact = parse_function_spec("pow:0.5").unwrap();
        // Same map, no inverse attached: forces bisection.
        let blind = FunctionHandle::new(
            "pow-no-inverse",
            vec![0.5],
            Interval::positive(),
            true,
            Arc::new(|t: f64| t.sqrt()),
        )
        .unwrap();
        for t in [0.3, 1.0, 7.5, 123.0] {
            let a = left_continuous_inverse(&exact, t).unwrap();
            let b = left_continuous_inverse(&blind, t).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn error_above_range() {
        // u bounded above by 1.
        let u = FunctionHandle::new(
            "bounded",
            vec![],
            Interval::positive(),
            true,
            Arc::new(|t: f64| t / (1.0 + t)),
        )
        .unwrap();
        assert!(matches!(
            left_continuous_inverse(&u, 2.0),
            Err(RvError::InverseAboveRange { .. })
        ));
    }

    #[test]
    fn error_not_monotone() {
        let u = FunctionHandle::from_closure_auto(
            "hump",
            vec![],
            Interval::positive(),
            Arc::new(|t: f64| -(t - 1.0) * (t - 1.0)),
        );
        assert!(matches!(
            left_continuous_inverse(&u, 0.5),
            Err(RvError::NotMonotone { .. })
        ));
    }
}
