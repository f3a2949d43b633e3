use lifespan_core::gpd::{self, density, quantile, sample_truncated, survival, GpdParams};
use lifespan_core::rng::{substream, Purpose};
use proptest::prelude::*;
use rand::Rng;

fn params(sigma: f64, xi: f64) -> GpdParams {
    GpdParams::new(sigma, xi).unwrap()
}

/// Composite Simpson rule with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        acc += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// ∫ f(y) dy over the support, substituting y = σ(eˢ − 1).
fn density_mass(p: &GpdParams) -> f64 {
    let (sigma, xi) = (p.sigma(), p.xi());
    let s_max = if xi < 0.0 {
        (1.0 - 1.0 / xi).ln()
    } else {
        // push the cutoff out until the closed-form tail mass is negligible
        let mut s = 1.0_f64;
        while (1.0 + xi * (s.exp() - 1.0)).powf(-1.0 / xi) > 1e-9 {
            s += 0.5;
        }
        s
    };
    simpson(|s| density(sigma * (s.exp() - 1.0), p) * sigma * s.exp(), 0.0, s_max, 100_000)
}

#[test]
fn density_integrates_to_one() {
    let mut rng = substream(2024, Purpose::Test, 0);
    for _ in 0..50 {
        let p = params(rng.gen_range(0.2..5.0), rng.gen_range(-0.5..0.5));
        let mass = density_mass(&p);
        assert!((mass - 1.0).abs() < 1e-6, "σ={} ξ={} mass={mass}", p.sigma(), p.xi());
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
fn ks(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

#[test]
fn sampler_matches_closed_form() {
    let p = params(2.0, -0.1);
    let mut rng = substream(7, Purpose::Test, 1);
    let draws: Vec<f64> = (0..1_000_000).map(|_| sample_truncated(0.0, &p, &mut rng).unwrap()).collect();
    let d = ks(draws, |y| 1.0 - survival(y, &p));
    assert!(d < 0.002, "KS = {d}");
}

#[test]
fn sampler_exponential_mean() {
    let p = params(1.0, 0.0);
    let mut rng = substream(8, Purpose::Test, 2);
    let n = 1_000_000;
    let mean = (0..n).map(|_| sample_truncated(0.0, &p, &mut rng).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean = {mean}");
}

#[test]
fn truncated_sampler_follows_survival_ratio() {
    let p = params(2.1, -0.134);
    let a = 5.0;
    let mut rng = substream(9, Purpose::Test, 3);
    let draws: Vec<f64> = (0..200_000).map(|_| sample_truncated(a, &p, &mut rng).unwrap()).collect();
    let end = p.upper_endpoint().unwrap();
    assert!(draws.iter().all(|&y| y > a && y < end));
    let d = ks(draws, |y| 1.0 - survival(y, &p) / survival(a, &p));
    // 1% critical value of the one-sample KS statistic
    assert!(d < 1.63 / (200_000f64).sqrt(), "KS = {d}");
}

#[test]
fn endpoint_containment_of_negative_shape_samples() {
    let mut rng = substream(10, Purpose::Test, 4);
    for _ in 0..200 {
        let p = params(rng.gen_range(0.5..4.0), rng.gen_range(-0.6..-0.01));
        let end = p.upper_endpoint().unwrap();
        let a = rng.gen_range(0.0..0.9) * end;
        for _ in 0..200 {
            let y = sample_truncated(a, &p, &mut rng).unwrap();
            assert!(y >= a && y <= end, "y={y} a={a} end={end}");
        }
    }
}

#[test]
fn out_of_support_entry_is_rejected() {
    let p = params(2.1, -0.134);
    let mut rng = substream(1, Purpose::Test, 5);
    assert!(sample_truncated(16.0, &p, &mut rng).is_err());
    assert!(sample_truncated(-1.0, &p, &mut rng).is_err());
}

fn grid() -> Vec<f64> {
    (0..=200).map(|k| k as f64 * 0.05).collect()
}

proptest! {
    #[test]
    fn survival_is_non_increasing(sigma in 0.05f64..20.0, xi in -1.5f64..1.5, y in 0.0f64..50.0, dy in 0.0f64..10.0) {
        let p = params(sigma, xi);
        prop_assert!(survival(y + dy, &p) <= survival(y, &p));
        let s = survival(y, &p);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn quantile_inverts_survival(sigma in 0.05f64..20.0, xi in -1.0f64..1.0) {
        let p = params(sigma, xi);
        for k in 1..1000 {
            let q = k as f64 / 1000.0;
            let y = quantile(q, &p).unwrap();
            prop_assert!((1.0 - survival(y, &p) - q).abs() < 1e-10, "q={} y={}", q, y);
        }
    }

    #[test]
    fn shape_branches_join_continuously(sigma in 0.1f64..10.0, sign in prop::bool::ANY) {
        let xi = if sign { 1e-9 } else { -1e-9 };
        let (near, limit) = (params(sigma, xi), params(sigma, 0.0));
        for y in grid() {
            prop_assert!((survival(y, &near) - survival(y, &limit)).abs() < 1e-7);
            prop_assert!((density(y, &near) - density(y, &limit)).abs() < 1e-7);
        }
        for k in 1..1000 {
            let q = k as f64 / 1000.0;
            prop_assert!((quantile(q, &near).unwrap() - quantile(q, &limit).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn cdf_complements_survival(sigma in 0.1f64..10.0, xi in -1.0f64..1.0, y in 0.0f64..30.0) {
        let p = params(sigma, xi);
        prop_assert_eq!(gpd::cdf(y, &p), 1.0 - survival(y, &p));
    }
}
