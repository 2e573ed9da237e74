//! Monte Carlo checks of the standardization machinery: tail behavior of
//! the Y-standardizing maps, the homogeneity signature of standardized
//! pairs, and the negative-index reduction applied to the reciprocal
//! mixture.

use std::sync::Arc;

use cev_core::gauss;
use cev_core::models::{logistic_nu_rect, mixture_model, MixtureKind};
use cev_core::rv::{registry, FunctionHandle, Interval, NormingPair, PsiClass};
use cev_core::seeding::chunked_draws;
use cev_core::transforms::{reduce_negative_rho, standardize_x, standardize_y};

use rand::Rng;
use rand_distr::StandardNormal;

/// For each registry marginal in a domain of attraction, the standardized
/// variable has t P[map(Y) > t] -> 1; checked at t = n * 1e-3 with n = 1e6.
#[test]
fn y_standardizer_tail_is_standard() {
    let n = 1_000_000usize;
    let t = n as f64 * 1e-3;

    let pareto_cdf = FunctionHandle::new(
        "pareto-cdf",
        vec![],
        Interval::beyond_one(),
        true,
        Arc::new(|y: f64| 1.0 - 1.0 / y),
    )
    .unwrap();
    let exp_cdf = FunctionHandle::new(
        "exp-cdf",
        vec![],
        Interval::positive(),
        true,
        Arc::new(|y: f64| 1.0 - (-y).exp()),
    )
    .unwrap();
    let normal_cdf = FunctionHandle::new(
        "normal-cdf",
        vec![],
        Interval::open(-6.0, 6.0),
        true,
        Arc::new(gauss::std_normal_cdf),
    )
    .unwrap();

    type Draw = Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync>;
    let cases: Vec<(&str, FunctionHandle, f64, Draw)> = vec![
        (
            "pareto",
            pareto_cdf,
            1.0,
            Box::new(|rng: &mut rand_chacha::ChaCha8Rng| 1.0 / (1.0 - rng.gen::<f64>())),
        ),
        (
            "exponential",
            exp_cdf,
            0.0,
            Box::new(|rng: &mut rand_chacha::ChaCha8Rng| -(1.0 - rng.gen::<f64>()).ln()),
        ),
        (
            "normal",
            normal_cdf,
            0.0,
            Box::new(|rng: &mut rand_chacha::ChaCha8Rng| rng.sample(StandardNormal)),
        ),
    ];

    for (name, cdf, gamma, draw) in cases {
        let s = standardize_y(&cdf, gamma).unwrap();
        let ys = chunked_draws(n, 90, |rng| draw(rng));
        let count = ys.iter().filter(|&&y| s.map.eval(y) > t).count() as f64;
        let stat = t * count / n as f64;
        assert!(
            (stat - 1.0).abs() <= 0.1,
            "{name}: t P[map(Y) > t] = {stat}"
        );
    }
}

/// After standardizing the X coordinate of the power mixture, the empirical
/// joint measure scales like 1/c under (x, y) -> (cx, cy).
#[test]
fn standardized_pair_is_homogeneous() {
    let p = 0.5;
    let model = mixture_model(MixtureKind::PowerScale { p }, 0.5).unwrap();
    let s = standardize_x(&model.norming, PsiClass::ScaleOnly).unwrap();

    let n = 2_000_000usize;
    let pairs = model.draw(n, 91);
    let std_pairs: Vec<(f64, f64)> =
        pairs.iter().map(|&(x, y)| (s.map.eval(x), y)).collect();

    let t = 200.0;
    let rect = |x: f64, y: f64| {
        let count = std_pairs
            .iter()
            .filter(|&&(xs, ys)| xs <= x * t && ys > y * t)
            .count() as f64;
        t * count / n as f64
    };
    for &(x, y) in &[(1.0, 1.0), (2.0, 0.5)] {
        let base = rect(x, y);
        for &c in &[0.5, 2.0] {
            let scaled = rect(c * x, c * y);
            // Monte Carlo tolerance: a few standard errors of the counts
            assert!(
                (scaled - base / c).abs() <= 0.08,
                "rect({x},{y}): {base} vs c-scaled {scaled} at c = {c}"
            );
        }
    }
}

/// Reducing the reciprocal mixture (negative index) yields a positive-index
/// pair whose Monte Carlo conditional law matches the transformed closed
/// form.
#[test]
fn negative_rho_reduction_matches_reciprocal_mixture() {
    let p = 0.5;
    let theta = 0.5;
    let model = mixture_model(MixtureKind::ReciprocalScale { p }, theta).unwrap();

    // The reciprocal mixture's centering has the mirrored (k < 0) shape:
    // beta = t^{-p} decreasing to 0.
    let np = NormingPair::new(
        registry::power(-p),
        registry::power(-p),
        -p,
        -p,
        PsiClass::Full,
    )
    .unwrap();
    let (x_map, reduced) = reduce_negative_rho(&np).unwrap();
    // new centering is t^p / p
    for &t in &[1e2f64, 1e4] {
        let expect = t.powf(p) / p;
        assert!(
            (reduced.beta.eval(t) - expect).abs() <= 1e-6 * expect,
            "beta~({t}) = {}",
            reduced.beta.eval(t)
        );
    }

    // Monte Carlo: P[x_map(X~)/beta~(t) <= x | Y > t] -> nu([0,(x/p)^(1/p)] x (1,inf])
    let n = 2_000_000usize;
    let pairs = model.draw(n, 92);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    ys.sort_by(f64::total_cmp);
    let t = ys[((1.0 - 1e-3) * n as f64) as usize];
    let bt = reduced.beta.eval(t);
    let mut z: Vec<f64> = pairs
        .iter()
        .filter(|&&(_, y)| y > t)
        .map(|&(x, _)| x_map.eval(x) / bt)
        .collect();
    z.sort_by(f64::total_cmp);
    let ks = cev_core::montecarlo::ks_exact(&z, |x| {
        if x <= 0.0 {
            0.0
        } else {
            logistic_nu_rect(theta, (x / p).powf(1.0 / p), 1.0).unwrap().min(1.0)
        }
    });
    assert!(ks <= 0.05, "KS {ks} with {} exceedances", z.len());
}

/// The log-centered mixture's limit is the exponent rectangle evaluated at
/// e^x, and the mixture factorizes under random norming.
#[test]
fn log_center_limit_and_mixture_factorization() {
    let theta = 0.5;
    let m3 = mixture_model(MixtureKind::LogCenter, theta).unwrap();
    for &x in &[-2.0f64, 0.0, 1.5] {
        let expect = logistic_nu_rect(theta, x.exp(), 1.0).unwrap();
        let got = (m3.limit_cdf)(x);
        assert!((got - expect).abs() <= 1e-12, "limit({x}) = {got} vs {expect}");
    }

    // factorization of the randomly normed X for the power mixture: the
    // convergence study computes the bin-wise statistic on (x - b(y))/a(y),
    // a monotone function of X*/Y, so the statistic transfers.
    let m1 = mixture_model(MixtureKind::PowerScale { p: 0.5 }, theta).unwrap();
    let rep =
        cev_core::montecarlo::convergence_study(&m1, &[1e-2, 1e-3], 2_000_000, 93).unwrap();
    let min_bin = rep.exceed_counts.last().unwrap() / 4;
    let bound = 4.0 * (1.0 / min_bin as f64).sqrt();
    assert!(
        rep.factorization_stat < bound,
        "stat {} vs bound {bound}",
        rep.factorization_stat
    );
}
