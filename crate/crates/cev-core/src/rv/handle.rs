//! First-class scalar functions with declared domains and optional exact
//! inverses. Handles are immutable after construction and cheap to clone;
//! evaluation is pure, so they are safe to share across threads.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::RvError;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An interval with open/closed endpoint flags; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: true, hi_open: true }
    }

    pub fn closed_lo(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: false, hi_open: true }
    }

    /// (0, inf)
    pub fn positive() -> Self {
        Interval::open(0.0, f64::INFINITY)
    }

    /// (1, inf)
    pub fn beyond_one() -> Self {
        Interval::open(1.0, f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Interval::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, t: f64) -> bool {
        let lo_ok = if self.lo_open { t > self.lo } else { t >= self.lo };
        let hi_ok = if self.hi_open { t < self.hi } else { t <= self.hi };
        lo_ok && hi_ok
    }

    /// Interior probe grid used by construction-time spot checks.
    ///
    /// Infinite ends are clipped: geometric spacing reaching ~1e8 above a
    /// finite lower end, symmetric +-600 on the whole line (so exp stays
    /// finite).
    pub fn probe_points(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        let k = n as f64 - 1.0;
        if self.lo.is_finite() && self.hi.is_finite() {
            let margin = (self.hi - self.lo) * 1e-9;
            let (a, b) = (self.lo + margin, self.hi - margin);
            (0..n).map(|i| a + (b - a) * i as f64 / k).collect()
        } else if self.lo.is_finite() {
            // lo + geometric offsets in [1e-9, 1e8], scaled by the magnitude of lo.
            let unit = self.lo.abs().max(1.0);
            (0..n)
                .map(|i| self.lo + unit * 1e-9 * (1e17f64).powf(i as f64 / k))
                .collect()
        } else if self.hi.is_finite() {
            let unit = self.hi.abs().max(1.0);
            let mut pts: Vec<f64> = (0..n)
                .map(|i| self.hi - unit * 1e-9 * (1e17f64).powf(i as f64 / k))
                .collect();
            pts.reverse();
            pts
        } else {
            (0..n).map(|i| -600.0 + 1200.0 * i as f64 / k).collect()
        }
    }
}

/// A named, parameterized scalar function with declared domain, optional
/// exact inverse and optional derivative.
///
/// Flagged-monotone means nondecreasing on the domain; this is spot-checked
/// on a 1000-point grid at construction. When an inverse is attached, the
/// round trip |inverse(eval(t)) - t| <= 1e-9 * max(1, |t|) is spot-checked on
/// interior points.
#[derive(Clone)]
pub struct FunctionHandle {
    name: String,
    params: Vec<f64>,
    domain: Interval,
    monotone: bool,
    eval_fn: ScalarFn,
    inverse_fn: Option<ScalarFn>,
    derivative_fn: Option<ScalarFn>,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("monotone", &self.monotone)
            .field("has_inverse", &self.inverse_fn.is_some())
            .finish()
    }
}

const PROBE_POINTS: usize = 1000;

impl FunctionHandle {
    pub fn new(
        name: impl Into<String>,
        params: Vec<f64>,
        domain: Interval,
        monotone: bool,
        eval_fn: ScalarFn,
    ) -> Result<Self, RvError> {
        let handle = FunctionHandle {
            name: name.into(),
            params,
            domain,
            monotone,
            eval_fn,
            inverse_fn: None,
            derivative_fn: None,
        };
        if monotone {
            handle.check_monotone()?;
        }
        Ok(handle)
    }

    /// Build from a closure, probing monotonicity instead of asserting it.
    pub fn from_closure_auto(
        name: impl Into<String>,
        params: Vec<f64>,
        domain: Interval,
        eval_fn: ScalarFn,
    ) -> Self {
        let name = name.into();
        match FunctionHandle::new(name.clone(), params.clone(), domain, true, eval_fn.clone()) {
            Ok(h) => h,
            Err(_) => FunctionHandle {
                name,
                params,
                domain,
                monotone: false,
                eval_fn,
                inverse_fn: None,
                derivative_fn: None,
            },
        }
    }

    fn check_monotone(&self) -> Result<(), RvError> {
        let pts = self.domain.probe_points(PROBE_POINTS);
        let mut prev: Option<(f64, f64)> = None;
        for &t in &pts {
            let v = (self.eval_fn)(t);
            if v.is_nan() {
                return Err(RvError::NonFiniteEval { name: self.name.clone(), t });
            }
            if let Some((_, pv)) = prev {
                if v < pv - 1e-12 * pv.abs().max(1.0) {
                    return Err(RvError::MonotoneCheckFailed { name: self.name.clone(), t });
                }
            }
            prev = Some((t, v));
        }
        Ok(())
    }

    /// Attach an exact inverse, spot-checking the round trip.
    pub fn with_inverse(mut self, inverse_fn: ScalarFn) -> Result<Self, RvError> {
        let pts = self.domain.probe_points(PROBE_POINTS);
        let mut checked = 0usize;
        for &t in &pts {
            let y = (self.eval_fn)(t);
            if !y.is_finite() {
                continue;
            }
            let back = inverse_fn(y);
            if !back.is_finite() {
                continue;
            }
            let err = (back - t).abs();
            if err > 1e-9 * t.abs().max(1.0) {
                return Err(RvError::InverseRoundTripFailed { name: self.name.clone(), t, err });
            }
            checked += 1;
        }
        if checked < PROBE_POINTS / 10 {
            return Err(RvError::InverseRoundTripFailed {
                name: self.name.clone(),
                t: f64::NAN,
                err: f64::NAN,
            });
        }
        self.inverse_fn = Some(inverse_fn);
        Ok(self)
    }

    pub fn with_derivative(mut self, derivative_fn: ScalarFn) -> Self {
        self.derivative_fn = Some(derivative_fn);
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval_fn)(t)
    }

    pub fn eval_fn(&self) -> ScalarFn {
        self.eval_fn.clone()
    }

    /// Exact inverse at `y`, if one is attached.
    pub fn inverse_at(&self, y: f64) -> Option<f64> {
        self.inverse_fn.as_ref().map(|f| f(y))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse_fn.is_some()
    }

    pub fn derivative_at(&self, t: f64) -> Option<f64> {
        self.derivative_fn.as_ref().map(|f| f(t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// outer(inner(t)). Domain is the inner domain; monotone when both are.
    /// The exact inverse (inner^-1 of outer^-1) is attached when both exist.
    pub fn compose(outer: &FunctionHandle, inner: &FunctionHandle) -> Result<Self, RvError> {
        let name = format!("compose:{},{}", outer.name, inner.name);
        let mut params = outer.params.clone();
        params.extend_from_slice(&inner.params);
        let (of, inf) = (outer.eval_fn.clone(), inner.eval_fn.clone());
        let eval: ScalarFn = Arc::new(move |t| of(inf(t)));
        let h = FunctionHandle::new(
            name,
            params,
            inner.domain,
            outer.monotone && inner.monotone,
            eval,
        )?;
        match (outer.inverse_fn.clone(), inner.inverse_fn.clone()) {
            (Some(oi), Some(ii)) => h.with_inverse(Arc::new(move |y| ii(oi(y)))),
            _ => Ok(h),
        }
    }

    /// c * f for c > 0 (keeps monotonicity and the inverse).
    pub fn scaled(&self, c: f64) -> Result<Self, RvError> {
        assert!(c > 0.0, "scaled() needs a positive factor");
        let f = self.eval_fn.clone();
        let eval: ScalarFn = Arc::new(move |t| c * f(t));
        let h = FunctionHandle::new(
            format!("scale:{c},{}", self.name),
            self.params.clone(),
            self.domain,
            self.monotone,
            eval,
        )?;
        match self.inverse_fn.clone() {
            Some(inv) => h.with_inverse(Arc::new(move |y| inv(y / c))),
            None => Ok(h),
        }
    }

    /// f + c (keeps monotonicity and the inverse).
    pub fn shifted(&self, c: f64) -> Result<Self, RvError> {
        let f = self.eval_fn.clone();
        let eval: ScalarFn = Arc::new(move |t| f(t) + c);
        let h = FunctionHandle::new(
            format!("shift:{c},{}", self.name),
            self.params.clone(),
            self.domain,
            self.monotone,
            eval,
        )?;
        match self.inverse_fn.clone() {
            Some(inv) => h.with_inverse(Arc::new(move |y| inv(y - c))),
            None => Ok(h),
        }
    }

    /// -f; monotonicity of the result is re-probed, not assumed.
    pub fn negated(&self) -> Self {
        let f = self.eval_fn.clone();
        FunctionHandle::from_closure_auto(
            format!("neg:{}", self.name),
            self.params.clone(),
            self.domain,
            Arc::new(move |t| -f(t)),
        )
    }

    /// 1/f; monotonicity re-probed.
    pub fn reciprocal(&self) -> Self {
        let f = self.eval_fn.clone();
        FunctionHandle::from_closure_auto(
            format!("recip:{}", self.name),
            self.params.clone(),
            self.domain,
            Arc::new(move |t| 1.0 / f(t)),
        )
    }
}
