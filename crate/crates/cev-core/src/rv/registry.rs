//! Named parametric function families, addressable by string spec.
//!
//! Specs: `identity`, `const:c`, `pow:p`, `log`, `exp`, `loglog`,
//! `logpow:p`, `pareto_b`, `exp_b`, `normal_b`, `normal_binv`,
//! `scale:c,<spec>`, `shift:c,<spec>`, `compose:<spec>,<spec>`.

use std::sync::Arc;

use crate::gauss;

use super::{FunctionHandle, Interval, RvError};

pub fn identity() -> FunctionHandle {
    FunctionHandle::new("identity", vec![], Interval::real_line(), true, Arc::new(|t| t))
        .and_then(|h| h.with_inverse(Arc::new(|y| y)))
        .expect("identity is monotone")
}

pub fn constant(c: f64) -> FunctionHandle {
    FunctionHandle::new("const", vec![c], Interval::real_line(), true, Arc::new(move |_| c))
        .expect("constants are nondecreasing")
}

/// t^p on (0, inf). Monotone (with exact inverse) only for p > 0.
pub fn power(p: f64) -> FunctionHandle {
    let h = FunctionHandle::from_closure_auto(
        "pow",
        vec![p],
        Interval::positive(),
        Arc::new(move |t: f64| t.powf(p)),
    );
    if p > 0.0 {
        h.with_inverse(Arc::new(move |y: f64| y.powf(1.0 / p)))
            .expect("power inverse round-trips")
    } else {
        h
    }
}

pub fn log_fn() -> FunctionHandle {
    FunctionHandle::new("log", vec![], Interval::positive(), true, Arc::new(|t: f64| t.ln()))
        .and_then(|h| h.with_inverse(Arc::new(|y: f64| y.exp())))
        .expect("log is monotone")
}

pub fn exp_fn() -> FunctionHandle {
    FunctionHandle::new("exp", vec![], Interval::real_line(), true, Arc::new(|t: f64| t.exp()))
        .and_then(|h| h.with_inverse(Arc::new(|y: f64| y.ln())))
        .expect("exp is monotone")
}

/// log log t on (1, inf).
pub fn log_log() -> FunctionHandle {
    FunctionHandle::new(
        "loglog",
        vec![],
        Interval::beyond_one(),
        true,
        Arc::new(|t: f64| t.ln().ln()),
    )
    .and_then(|h| h.with_inverse(Arc::new(|y: f64| (y.exp()).exp())))
    .expect("loglog is monotone")
}

/// (log t)^p on (1, inf), p > 0.
pub fn log_power(p: f64) -> FunctionHandle {
    assert!(p > 0.0, "logpow needs p > 0");
    FunctionHandle::new(
        "logpow",
        vec![p],
        Interval::beyond_one(),
        true,
        Arc::new(move |t: f64| t.ln().powf(p)),
    )
    .and_then(|h| h.with_inverse(Arc::new(move |y: f64| (y.powf(1.0 / p)).exp())))
    .expect("logpow is monotone")
}

/// Norming b(t) = t for the standard Pareto marginal, on (1, inf).
pub fn pareto_b() -> FunctionHandle {
    FunctionHandle::new("pareto_b", vec![], Interval::beyond_one(), true, Arc::new(|t| t))
        .and_then(|h| h.with_inverse(Arc::new(|y| y)))
        .expect("pareto_b is monotone")
}

/// Norming b(t) = log t for the unit exponential marginal, on (1, inf).
pub fn exponential_b() -> FunctionHandle {
    FunctionHandle::new(
        "exp_b",
        vec![],
        Interval::beyond_one(),
        true,
        Arc::new(|t: f64| t.ln()),
    )
    .and_then(|h| h.with_inverse(Arc::new(|y: f64| y.exp())))
    .expect("exp_b is monotone")
}

/// Standard normal norming b(t): the upper 1/t quantile, on (1, inf).
pub fn normal_b() -> FunctionHandle {
    FunctionHandle::new(
        "normal_b",
        vec![],
        Interval::beyond_one(),
        true,
        Arc::new(|t: f64| gauss::normal_b(t)),
    )
    .and_then(|h| h.with_inverse(Arc::new(|y: f64| 1.0 / gauss::std_normal_sf(y))))
    .expect("normal_b is monotone")
    .with_derivative(Arc::new(|t: f64| {
        // d/dt SF^{-1}(1/t) = 1 / (t^2 phi(b(t)))
        let b = gauss::normal_b(t);
        1.0 / (t * t * gauss::phi(b))
    }))
}

/// b^{<-} for the standard normal: y -> 1/(1 - Phi(y)).
///
/// Domain is clipped to (-5.5, 36): outside it the survival value is no
/// longer distinguishable from 1 (left) or underflows (right) in f64, and
/// the exact inverse round trip would be meaningless.
pub fn normal_b_inverse() -> FunctionHandle {
    FunctionHandle::new(
        "normal_binv",
        vec![],
        Interval::open(-5.5, 36.0),
        true,
        Arc::new(|y: f64| 1.0 / gauss::std_normal_sf(y)),
    )
    .and_then(|h| h.with_inverse(Arc::new(|t: f64| gauss::normal_b(t))))
    .expect("normal_binv is monotone")
    .with_derivative(Arc::new(|y: f64| {
        let sf = gauss::std_normal_sf(y);
        gauss::phi(y) / (sf * sf)
    }))
}

fn parse_param(name: &str, s: &str) -> Result<f64, RvError> {
    s.parse::<f64>().map_err(|_| RvError::UnknownFunction {
        spec: format!("{name}:{s}"),
        known: known_list(),
    })
}

fn known_list() -> String {
    list_functions().join(", ")
}

/// Deterministic, sorted list of recognized function specs.
pub fn list_functions() -> Vec<&'static str> {
    vec![
        "compose:<f>,<g>",
        "const:<c>",
        "exp",
        "exp_b",
        "identity",
        "log",
        "loglog",
        "logpow:<p>",
        "normal_b",
        "normal_binv",
        "pareto_b",
        "pow:<p>",
        "scale:<c>,<f>",
        "shift:<c>,<f>",
    ]
}

/// Parse a function spec string like "pow:0.5" or "compose:log,normal_binv".
pub fn parse_function_spec(spec: &str) -> Result<FunctionHandle, RvError> {
    let unknown = || RvError::UnknownFunction { spec: spec.to_string(), known: known_list() };
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    match (head, rest) {
        ("identity" | "id", None) => Ok(identity()),
        ("const", Some(r)) => Ok(constant(parse_param("const", r)?)),
        ("pow", Some(r)) => Ok(power(parse_param("pow", r)?)),
        ("log", None) => Ok(log_fn()),
        ("exp", None) => Ok(exp_fn()),
        ("loglog", None) => Ok(log_log()),
        ("logpow", Some(r)) => {
            let p = parse_param("logpow", r)?;
            if p <= 0.0 {
                return Err(unknown());
            }
            Ok(log_power(p))
        }
        ("pareto_b", None) => Ok(pareto_b()),
        ("exp_b", None) => Ok(exponential_b()),
        ("normal_b", None) => Ok(normal_b()),
        ("normal_binv", None) => Ok(normal_b_inverse()),
        ("scale", Some(r)) => {
            let (c, inner) = r.split_once(',').ok_or_else(unknown)?;
            let c = parse_param("scale", c)?;
            if c <= 0.0 {
                return Err(unknown());
            }
            parse_function_spec(inner)?.scaled(c)
        }
        ("shift", Some(r)) => {
            let (c, inner) = r.split_once(',').ok_or_else(unknown)?;
            let c = parse_param("shift", c)?;
            parse_function_spec(inner)?.shifted(c)
        }
        ("compose", Some(r)) => {
            let (outer, inner) = r.split_once(',').ok_or_else(unknown)?;
            FunctionHandle::compose(&parse_function_spec(outer)?, &parse_function_spec(inner)?)
        }
        _ => Err(unknown()),
    }
}
