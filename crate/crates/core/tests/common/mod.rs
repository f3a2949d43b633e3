#![allow(dead_code)]

use lifespan_core::design::{
    to_exceedances, CovariateDecl, CovariateSchema, ExceedanceSet, ModelSpec, Profile,
};
use lifespan_core::likelihood::ParamVector;
use lifespan_core::simulate::{simulate_population, EntryDistribution, ScenarioConfig};

pub fn decl(name: &str, cats: &[&str], reference: Option<usize>) -> CovariateDecl {
    CovariateDecl {
        name: name.into(),
        categories: cats.iter().map(|c| c.to_string()).collect(),
        reference,
    }
}

pub fn sex_schema() -> CovariateSchema {
    CovariateSchema::new(vec![decl("sex", &["female", "male"], Some(0))]).unwrap()
}

pub fn two_covariate_schema() -> CovariateSchema {
    CovariateSchema::new(vec![
        decl("sex", &["female", "male"], Some(0)),
        decl("hht", &["collective", "single", "couple"], Some(0)),
    ])
    .unwrap()
}

pub fn intercept_schema() -> CovariateSchema {
    CovariateSchema::new(vec![]).unwrap()
}

pub fn paper_schema() -> CovariateSchema {
    CovariateSchema::new(vec![
        decl("civ", &["widowed", "unmarried", "married", "divorced"], Some(0)),
        decl("edu", &["primary", "secondary", "tertiary", "unobserved"], Some(0)),
        decl("hht", &["collective", "single", "couple", "family", "other"], Some(0)),
        decl("org", &["native", "west-europe", "other"], Some(0)),
        decl("sex", &["female", "male"], Some(0)),
    ])
    .unwrap()
}

/// Lifetimes in the registry regime: σ ≈ 2.1, ξ = −0.13, delayed entry up to
/// three years past the threshold and roughly one fifth censored.
pub fn registry_scenario(n: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        truth: ParamVector::new(vec![0.74, -0.2], -0.13),
        threshold_u: 100.0,
        n_individuals: n,
        schema: sex_schema(),
        profile_weights: vec![(Profile(vec![0]), 0.7), (Profile(vec![1]), 0.3)],
        entry: EntryDistribution::Uniform { max_entry: 3.0 },
        censor_age: 108.0,
        random_censor_rate: Some(0.12),
        seed,
    }
}

pub fn exceedances_of(cfg: &ScenarioConfig) -> ExceedanceSet {
    let records = simulate_population(cfg).unwrap();
    to_exceedances(&records, &ModelSpec::new(cfg.threshold_u, cfg.schema.clone()).unwrap())
        .unwrap()
        .data
}

/// Intercept-only data without truncation or censoring.
pub fn plain_gpd(n: usize, log_sigma: f64, xi: f64, seed: u64) -> ExceedanceSet {
    let cfg = ScenarioConfig {
        truth: ParamVector::new(vec![log_sigma], xi),
        threshold_u: 100.0,
        n_individuals: n,
        schema: intercept_schema(),
        profile_weights: vec![(Profile(vec![]), 1.0)],
        entry: EntryDistribution::AtThreshold,
        censor_age: 1.0e6,
        random_censor_rate: None,
        seed,
    };
    exceedances_of(&cfg)
}
