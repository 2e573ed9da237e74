//! Logistic (Gumbel-copula) dependent pair with exact standard Pareto(1)
//! margins.
//!
//! The dependence parameter theta lies strictly in (0,1); theta -> 0 is
//! complete dependence and theta -> 1 would concentrate the exponent
//! measure on the axes (asymptotic independence), which this family
//! excludes by construction. The exponent function is
//! V(x, y) = (x^{-1/theta} + y^{-1/theta})^theta.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::seeding::chunked_draws;

use super::ModelError;

/// Dependence structure of the logistic max-stable family.
#[derive(Clone, Copy, Debug)]
pub struct LogisticDependence {
    theta: f64,
}

impl LogisticDependence {
    pub fn new(theta: f64) -> Result<Self, ModelError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "theta",
                value: theta,
                constraint: "strictly inside (0, 1)",
            });
        }
        Ok(LogisticDependence { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Exponent function V(x, y) = (x^{-1/theta} + y^{-1/theta})^theta.
    pub fn exponent(&self, x: f64, y: f64) -> f64 {
        let a = x.powf(-1.0 / self.theta);
        let b = y.powf(-1.0 / self.theta);
        (a + b).powf(self.theta)
    }

    /// nu([0, x] x (y, inf]) = V(x, y) - 1/x, by inclusion-exclusion on the
    /// exponent measure of the standardized pair.
    pub fn nu_rect(&self, x: f64, y: f64) -> f64 {
        assert!(x > 0.0 && y > 0.0);
        (self.exponent(x, y) - 1.0 / x).max(0.0)
    }

    /// Limiting joint-tail constant lim t P[U > t, V > t] = 2 - 2^theta.
    pub fn joint_tail_constant(&self) -> f64 {
        2.0 - 2f64.powf(self.theta)
    }
}

/// nu([0,x] x (y,inf]) for the logistic exponent measure.
pub fn logistic_nu_rect(theta: f64, x: f64, y: f64) -> Result<f64, ModelError> {
    Ok(LogisticDependence::new(theta)?.nu_rect(x, y))
}

/// Positive alpha-stable draw (Laplace transform e^{-s^alpha}), 0 < alpha < 1,
/// by the Kanter representation.
fn positive_stable<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    let u = loop {
        let v: f64 = rng.gen();
        if v > 0.0 && v < 1.0 {
            break v;
        }
    };
    let w = std::f64::consts::PI * u;
    let e: f64 = rng.sample(Exp1);
    let num = ((1.0 - alpha) * w).sin();
    (num / e).powf((1.0 - alpha) / alpha) * (alpha * w).sin() / w.sin().powf(1.0 / alpha)
}

/// One (U, V) draw: Gumbel copula via the Marshall–Olkin frailty
/// construction, then the exact probability integral transform to
/// Pareto(1) margins. Survival values use exp_m1 so the margins are exact
/// in floating point.
pub(super) fn draw_logistic_pair(rng: &mut ChaCha8Rng, theta: f64) -> (f64, f64) {
    let m = positive_stable(rng, theta);
    let e1: f64 = rng.sample(Exp1);
    let e2: f64 = rng.sample(Exp1);
    let q1 = (e1 / m).powf(theta);
    let q2 = (e2 / m).powf(theta);
    // U = 1/(1 - exp(-q)) computed without cancellation
    let u = 1.0 / (-(-q1).exp_m1());
    let v = 1.0 / (-(-q2).exp_m1());
    (u, v)
}

/// n i.i.d. draws of the logistic pair, chunk-deterministic in (n, seed).
pub fn sample_logistic_pareto(
    theta: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, ModelError> {
    let dep = LogisticDependence::new(theta)?;
    let th = dep.theta();
    Ok(chunked_draws(n, seed, move |rng| draw_logistic_pair(rng, th)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nu_rect_reference_values() {
        // theta = 1/2, x = y = 1: sqrt(2) - 1
        let v = logistic_nu_rect(0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::SQRT_2 - 1.0, epsilon = 1e-15);
        // x -> inf: V(inf, y) = 1/y
        let v = logistic_nu_rect(0.5, 1e12, 2.0).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-6);
        // theta -> 1: additive exponent, rectangle tends to 1/y for all x
        let v = logistic_nu_rect(0.999999, 0.3, 2.0).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn nu_rect_monotonicity_and_homogeneity() {
        let dep = LogisticDependence::new(0.5).unwrap();
        let mut prev = 0.0;
        for i in 1..50 {
            let v = dep.nu_rect(0.2 * i as f64, 1.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        for i in 1..50 {
            let v = dep.nu_rect(1.0, 0.2 * i as f64);
            assert!(v <= dep.nu_rect(1.0, 0.2 * (i - 1).max(1) as f64) + 1e-12);
        }
        for &c in &[0.5, 2.0, 10.0] {
            let lhs = dep.nu_rect(c * 1.3, c * 0.8);
            let rhs = dep.nu_rect(1.3, 0.8) / c;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_domain_enforced() {
        assert!(LogisticDependence::new(0.0).is_err());
        assert!(LogisticDependence::new(1.0).is_err());
        assert!(LogisticDependence::new(-0.2).is_err());
        assert!(LogisticDependence::new(0.5).is_ok());
    }

    #[test]
    fn margins_are_exact_pareto() {
        let pairs = sample_logistic_pareto(0.5, 1_000_000, 11).unwrap();
        let mut us: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        us.sort_by(f64::total_cmp);
        let n = us.len() as f64;
        let mut ks = 0.0f64;
        for (i, &u) in us.iter().enumerate() {
            let f = 1.0 - 1.0 / u;
            ks = ks.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        }
        assert!(ks < 0.002, "KS {ks}");
    }

    #[test]
    fn joint_tail_matches_exponent() {
        // strong dependence: t P[U > t, V > t] close to 2 - 2^theta
        let theta = 0.1;
        let n = 1_000_000;
        let pairs = sample_logistic_pareto(theta, n, 5).unwrap();
        let t = n as f64 * 1e-3;
        let joint = pairs.iter().filter(|&&(u, v)| u > t && v > t).count() as f64;
        let stat = t * joint / n as f64;
        let expect = 2.0 - 2f64.powf(theta);
        assert!((stat - expect).abs() < 0.1, "stat {stat} vs {expect}");
    }

    #[test]
    fn exchangeable_construction() {
        // two-sample KS between the U and V margins stays below the 1%
        // critical value (the construction is symmetric in distribution)
        let pairs = sample_logistic_pareto(0.5, 100_000, 3).unwrap();
        let mut us: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        us.sort_by(f64::total_cmp);
        vs.sort_by(f64::total_cmp);
        let n = us.len() as f64;
        // evaluate both empirical CDFs on the merged grid
        let mut all = us.clone();
        all.extend_from_slice(&vs);
        all.sort_by(f64::total_cmp);
        let mut iu = 0usize;
        let mut iv = 0usize;
        let mut ks = 0.0f64;
        for &x in &all {
            while iu < us.len() && us[iu] <= x {
                iu += 1;
            }
            while iv < vs.len() && vs[iv] <= x {
                iv += 1;
            }
            ks = ks.max((iu as f64 / n - iv as f64 / n).abs());
        }
        let crit = 1.63 * (2.0 / n).sqrt();
        assert!(ks < crit, "KS {ks} vs {crit}");
    }
}
