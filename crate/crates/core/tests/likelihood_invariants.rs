mod common;

use lifespan_core::design::{Exceedance, ExceedanceSet};
use lifespan_core::gpd::{density, survival, GpdParams};
use lifespan_core::likelihood::{feasible, gradient, log_likelihood, ParamVector};
use lifespan_core::rng::{substream, Purpose};
use rand::Rng;

fn row(male: bool) -> Vec<f64> {
    vec![1.0, if male { 1.0 } else { 0.0 }]
}

fn gpd_at(theta: &ParamVector, z: &[f64]) -> GpdParams {
    GpdParams::new(theta.scale(z), theta.xi).unwrap()
}

/// `Σ δ log f + (1−δ) log S − log S(a)` straight from the distribution kernel.
fn ratio_form(theta: &ParamVector, data: &[Exceedance]) -> f64 {
    data.iter()
        .map(|e| {
            let p = gpd_at(theta, &e.design_row);
            let top = if e.event { density(e.y, &p).ln() } else { survival(e.y, &p).ln() };
            top - survival(e.a, &p).ln()
        })
        .sum()
}

fn random_records(n: usize, truncated: bool, seed: u64) -> Vec<Exceedance> {
    let mut rng = substream(seed, Purpose::Test, 0);
    (0..n)
        .map(|_| {
            let a = if truncated { rng.gen_range(0.0..3.0) } else { 0.0 };
            Exceedance {
                y: a + rng.gen_range(0.05..7.0),
                a,
                event: rng.gen_bool(0.8),
                design_row: row(rng.gen_bool(0.4)),
            }
        })
        .collect()
}

#[test]
fn reduces_to_density_and_survival_without_truncation() {
    let data = random_records(300, false, 1);
    for theta in [
        ParamVector::new(vec![0.74, -0.2], -0.13),
        ParamVector::new(vec![0.3, 0.4], 0.2),
        ParamVector::new(vec![0.5, 0.1], 0.0),
    ] {
        let l = log_likelihood(&theta, &data);
        assert!((l - ratio_form(&theta, &data)).abs() < 1e-10 * l.abs().max(1.0), "{l}");
    }
}

#[test]
fn truncation_term_is_a_survival_ratio() {
    let data = random_records(200, true, 2);
    let theta = ParamVector::new(vec![0.74, -0.2], -0.13);
    for e in &data {
        let one = [e.clone()];
        let untruncated = [Exceedance { a: 0.0, ..e.clone() }];
        let p = gpd_at(&theta, &e.design_row);
        let split = log_likelihood(&theta, &untruncated) - survival(e.a, &p).ln();
        assert!((log_likelihood(&theta, &one) - split).abs() < 1e-10);
    }
}

#[test]
fn shape_limit_branch_is_continuous() {
    let data = random_records(100, true, 3);
    let at = |xi: f64| log_likelihood(&ParamVector::new(vec![0.6, 0.1], xi), &data);
    assert!((at(1e-9) - at(0.0)).abs() < 1e-6);
    assert!((at(-1e-9) - at(0.0)).abs() < 1e-6);
}

fn random_feasible_point(rng: &mut impl Rng, data: &[Exceedance]) -> ParamVector {
    loop {
        let theta = ParamVector::new(
            vec![rng.gen_range(0.3..1.3), rng.gen_range(-0.5..0.5)],
            rng.gen_range(-0.3..0.3),
        );
        if feasible(&theta, data) {
            return theta;
        }
    }
}

/// Largest component-wise `|analytic − numeric| / max(1, |numeric|)` with
/// central differences of step `1e−6·max(1, |θ_j|)`.
pub fn max_gradient_error(theta: &ParamVector, data: &[Exceedance]) -> f64 {
    let g = gradient(theta, data).unwrap();
    let x = theta.to_vec();
    (0..x.len())
        .map(|j| {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut up = x.clone();
            let mut down = x.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (log_likelihood(&ParamVector::from_slice(&up), data)
                - log_likelihood(&ParamVector::from_slice(&down), data))
                / (2.0 * h);
            (g[j] - fd).abs() / fd.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn gradient_matches_finite_differences() {
    let data = random_records(500, true, 4);
    let mut rng = substream(5, Purpose::Test, 1);
    for _ in 0..50 {
        let theta = random_feasible_point(&mut rng, &data);
        let err = max_gradient_error(&theta, &data);
        assert!(err < 1e-6, "{theta:?}: {err}");
    }
}

#[test]
fn two_death_score_matches_hand_derivation() {
    // no truncation, all deaths, one binary covariate:
    // ∂ℓ/∂β = Σ z_i [−1 + (1+ξ) t_i/(1+ξ t_i)],  t_i = y_i e^{−β·z_i}
    let data = vec![
        Exceedance { y: 1.5, a: 0.0, event: true, design_row: row(false) },
        Exceedance { y: 2.5, a: 0.0, event: true, design_row: row(true) },
    ];
    let theta = ParamVector::new(vec![0.7, -0.3], -0.15);
    let g = gradient(&theta, &data).unwrap();
    let mut expect = [0.0; 2];
    for e in &data {
        let t = e.y * (-theta.beta[0] - theta.beta[1] * e.design_row[1]).exp();
        let c = -1.0 + (1.0 + theta.xi) * t / (1.0 + theta.xi * t);
        expect[0] += c;
        expect[1] += c * e.design_row[1];
    }
    assert!((g[0] - expect[0]).abs() < 1e-12 && (g[1] - expect[1]).abs() < 1e-12, "{g:?} {expect:?}");
}

#[test]
fn infeasible_points() {
    let one = |y: f64, event: bool| {
        vec![Exceedance { y, a: 0.0, event, design_row: vec![1.0] }]
    };
    let sigma_one = |xi: f64| ParamVector::new(vec![0.0], xi);
    assert!(feasible(&sigma_one(0.1), &one(1e6, true)));
    assert!(!feasible(&sigma_one(-0.5), &one(3.0, true)));
    assert!(!feasible(&sigma_one(-0.5), &one(2.0, true)));
    assert!(!feasible(&sigma_one(-0.5), &one(2.5, false)));
    assert_eq!(log_likelihood(&sigma_one(-0.5), &one(3.0, true)), f64::NEG_INFINITY);
    assert!(gradient(&sigma_one(-0.5), &one(3.0, true)).is_err());
}

#[test]
fn simulated_registry_data_is_feasible_at_truth() {
    let cfg = common::registry_scenario(5_000, 3);
    let data: ExceedanceSet = common::exceedances_of(&cfg);
    assert!(feasible(&cfg.truth, &data.records));
    assert!(max_gradient_error(&cfg.truth, &data.records) < 1e-6);
}
