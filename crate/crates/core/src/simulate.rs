//! Synthetic populations observed the way registry data are: lifetimes
//! beyond a threshold drawn from the covariate GPD, delayed entry (left
//! truncation) and right censoring.

use alloc::format;
use alloc::vec::Vec;

use rand::distributions::Open01;
use rand::Rng;

use crate::design::{to_exceedances, CovariateSchema, IndividualRecord, ModelSpec, Profile};
use crate::fit::{fit_mle, FitOptions};
use crate::gpd::{self, GpdParams};
use crate::likelihood::ParamVector;
use crate::rng::{substream, Purpose};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryDistribution {
    /// Everyone is observed from the threshold age on.
    AtThreshold,
    /// Entry age `u + U(0, max_entry)`.
    Uniform { max_entry: f64 },
}

impl EntryDistribution {
    fn max_exceedance(&self) -> f64 {
        match *self {
            EntryDistribution::AtThreshold => 0.0,
            EntryDistribution::Uniform { max_entry } => max_entry,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub truth: ParamVector,
    pub threshold_u: f64,
    pub n_individuals: usize,
    pub schema: CovariateSchema,
    pub profile_weights: Vec<(Profile, f64)>,
    pub entry: EntryDistribution,
    /// Administrative censoring age (end of study).
    pub censor_age: f64,
    /// Optional per-individual censoring: `entry + Exp(rate)` years, on top
    /// of the administrative cutoff.
    pub random_censor_rate: Option<f64>,
    pub seed: u64,
}

/// Equal weight on every profile of the schema.
pub fn uniform_weights(schema: &CovariateSchema) -> Vec<(Profile, f64)> {
    let all = schema.all_profiles();
    let w = 1.0 / all.len() as f64;
    all.into_iter().map(|p| (p, w)).collect()
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidInput(msg));
        if !(self.threshold_u > 0.0) {
            return bad(format!("threshold must be positive, got {}", self.threshold_u));
        }
        if self.truth.beta.len() != self.schema.design_len() {
            return bad(format!(
                "true coefficient vector has {} entries, design has {}",
                self.truth.beta.len(),
                self.schema.design_len()
            ));
        }
        if self.profile_weights.is_empty() {
            return bad("no profile weights".into());
        }
        let total: f64 = self.profile_weights.iter().map(|(_, w)| w).sum();
        if libm::fabs(total - 1.0) > 1e-12 || self.profile_weights.iter().any(|(_, w)| !(*w >= 0.0)) {
            return bad(format!("profile weights must be non-negative and sum to 1, got {total}"));
        }
        if !(self.censor_age > self.threshold_u) {
            return bad(format!(
                "censoring age {} must exceed the threshold {}",
                self.censor_age, self.threshold_u
            ));
        }
        let max_entry = self.entry.max_exceedance();
        if !(max_entry >= 0.0) || self.threshold_u + max_entry >= self.censor_age {
            return bad("entry ages must stay below the censoring age".into());
        }
        if let Some(rate) = self.random_censor_rate {
            if !(rate > 0.0) || !rate.is_finite() {
                return bad(format!("censoring rate must be positive, got {rate}"));
            }
        }
        for (profile, w) in &self.profile_weights {
            let row = self.schema.encode(profile)?;
            let p = GpdParams::new(self.truth.scale(&row), self.truth.xi)?;
            if let Some(end) = p.upper_endpoint() {
                if *w > 0.0 && max_entry >= end {
                    return bad(format!(
                        "entry exceedances up to {max_entry} reach beyond the endpoint {end} of profile {:?}",
                        self.schema.labels(profile)
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.threshold_u, self.schema.clone())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Draws the population. Identical configurations give identical records.
pub fn simulate_population(cfg: &ScenarioConfig) -> Result<Vec<IndividualRecord>> {
    cfg.validate()?;
    let u = cfg.threshold_u;
    let params: Vec<GpdParams> = cfg
        .profile_weights
        .iter()
        .map(|(p, _)| {
            let row = cfg.schema.encode(p)?;
            GpdParams::new(cfg.truth.scale(&row), cfg.truth.xi)
        })
        .collect::<Result<_>>()?;
    let mut cumulative = Vec::with_capacity(params.len());
    let mut acc = 0.0;
    for (_, w) in &cfg.profile_weights {
        acc += w;
        cumulative.push(acc);
    }

    let mut rng = substream(cfg.seed, Purpose::Simulation, 0);
    let admin = cfg.censor_age - u;
    let mut out = Vec::with_capacity(cfg.n_individuals);
    for _ in 0..cfg.n_individuals {
        let draw: f64 = rng.gen();
        let k = cumulative
            .iter()
            .position(|&c| draw < c)
            .unwrap_or(cumulative.len() - 1);
        let a = match cfg.entry {
            EntryDistribution::AtThreshold => 0.0,
            EntryDistribution::Uniform { max_entry } => max_entry * rng.gen::<f64>(),
        };
        let y = gpd::sample_truncated(a, &params[k], &mut rng)?;
        let mut censor = admin;
        if let Some(rate) = cfg.random_censor_rate {
            let v: f64 = rng.sample(Open01);
            censor = censor.min(a - libm::log(v) / rate);
        }
        let (exit, event) = if y <= censor { (y, true) } else { (censor, false) };
        out.push(IndividualRecord::new(
            u + a,
            u + exit,
            event,
            cfg.profile_weights[k].0.clone(),
        )?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Likelihood with the delayed-entry denominator.
    Corrected,
    /// Same likelihood with every entry exceedance forced to zero.
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub replicate: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub estimate: ParamVector,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveComparison {
    pub truth: ParamVector,
    /// Two rows per replicate, corrected first.
    pub rows: Vec<ComparisonRow>,
}

impl NaiveComparison {
    fn rows_of(&self, est: Estimator) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(move |r| r.estimator == est)
    }

    /// Mean `(β̂ − β, ξ̂ − ξ)` over replicates, flattened `(β…, ξ)`.
    pub fn mean_bias(&self, est: Estimator) -> Vec<f64> {
        let truth = self.truth.to_vec();
        let mut sum = alloc::vec![0.0; truth.len()];
        let mut count = 0usize;
        for r in self.rows_of(est) {
            for (s, (e, t)) in sum.iter_mut().zip(r.estimate.to_vec().iter().zip(&truth)) {
                *s += e - t;
            }
            count += 1;
        }
        sum.iter().map(|s| s / count.max(1) as f64).collect()
    }

    /// Fraction of replicates where the corrected `|ξ̂ − ξ|` is strictly
    /// smaller than the naive one.
    pub fn corrected_shape_win_rate(&self) -> f64 {
        let corrected: Vec<_> = self.rows_of(Estimator::Corrected).collect();
        let naive: Vec<_> = self.rows_of(Estimator::Naive).collect();
        let wins = corrected
            .iter()
            .zip(&naive)
            .filter(|(c, n)| {
                libm::fabs(c.estimate.xi - self.truth.xi) < libm::fabs(n.estimate.xi - self.truth.xi)
            })
            .count();
        wins as f64 / corrected.len().max(1) as f64
    }
}

/// Fits the corrected and the naive (entry-ignoring) likelihood on
/// `replicates` populations drawn with seeds `cfg.seed + r`.
pub fn naive_vs_corrected(
    cfg: &ScenarioConfig,
    replicates: usize,
    options: &FitOptions,
) -> Result<NaiveComparison> {
    let spec = cfg.model_spec()?;
    let mut rows = Vec::with_capacity(2 * replicates);
    for r in 0..replicates {
        let seed = cfg.seed.wrapping_add(r as u64);
        let records = simulate_population(&cfg.with_seed(seed))?;
        let data = to_exceedances(&records, &spec)?.data;
        for (estimator, set) in [
            (Estimator::Corrected, data.clone()),
            (Estimator::Naive, data.without_truncation()),
        ] {
            let fit = fit_mle(&set, None, options)?;
            rows.push(ComparisonRow {
                replicate: r,
                seed,
                estimator,
                estimate: fit.theta_hat,
                converged: fit.converged,
            });
        }
    }
    Ok(NaiveComparison {
        truth: cfg.truth.clone(),
        rows,
    })
}
