//! Goodness-of-fit and robustness tooling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::design::{profile_frequencies, to_exceedances, CovariateSchema, ExceedanceSet, IndividualRecord, ModelSpec, Profile};
use crate::fit::{fit_mle, wald_intervals, FitOptions, FitResult};
use crate::gpd::{self, GpdParams};
use crate::inference::{endpoint_delta, EndpointEstimate};
use crate::likelihood::ParamVector;
use crate::math::{sorted_quantile, Matrix};
use crate::{Error, Result};

/// Fewer observed deaths than this flags a Q-Q grid as unreliable.
pub const QQ_MIN_DEATHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QqGrid {
    pub probs: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
    /// Scale of the reference GPD.
    pub sigma: f64,
    pub deaths: usize,
    pub few_deaths: bool,
}

impl QqGrid {
    pub fn max_abs_gap(&self) -> f64 {
        self.theoretical
            .iter()
            .zip(&self.empirical)
            .fold(0.0, |m, (t, e)| m.max(libm::fabs(t - e)))
    }
}

/// `0.001, 0.002, …, 0.999`
pub fn default_qq_probs() -> Vec<f64> {
    (1..1000).map(|k| k as f64 / 1000.0).collect()
}

fn qq_from(sigma: f64, xi: f64, mut deaths: Vec<f64>, probs: Option<&[f64]>) -> Result<QqGrid> {
    let probs = probs.map(<[f64]>::to_vec).unwrap_or_else(default_qq_probs);
    if probs.is_empty() || probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || probs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "Q-Q probabilities must be strictly increasing inside (0, 1)".into(),
        ));
    }
    if deaths.is_empty() {
        return Err(Error::InvalidInput("no observed deaths for empirical quantiles".into()));
    }
    deaths.sort_by(f64::total_cmp);
    let params = GpdParams::new(sigma, xi)?;
    let theoretical = probs
        .iter()
        .map(|&p| gpd::quantile(p, &params))
        .collect::<Result<Vec<_>>>()?;
    let empirical = probs.iter().map(|&p| sorted_quantile(&deaths, p)).collect();
    Ok(QqGrid {
        sigma,
        deaths: deaths.len(),
        few_deaths: deaths.len() < QQ_MIN_DEATHS,
        probs,
        theoretical,
        empirical,
    })
}

fn require_converged(result: &FitResult) -> Result<()> {
    if result.converged {
        Ok(())
    } else {
        Err(Error::InvalidInput("diagnostics need a converged fit".into()))
    }
}

/// Pooled Q-Q grid: observed death exceedances against the GPD whose scale
/// is the mean fitted scale over all exceedances. Censored records are left
/// out of the empirical quantiles, and delayed entry is not adjusted for.
pub fn qq_grid(result: &FitResult, data: &ExceedanceSet, probs: Option<&[f64]>) -> Result<QqGrid> {
    require_converged(result)?;
    if data.is_empty() {
        return Err(Error::InvalidInput("no exceedances".into()));
    }
    let theta = &result.theta_hat;
    let sigma = data.records.iter().map(|e| theta.scale(&e.design_row)).sum::<f64>() / data.len() as f64;
    let deaths = data.records.iter().filter(|e| e.event).map(|e| e.y).collect();
    qq_from(sigma, theta.xi, deaths, probs)
}

/// Q-Q grid restricted to one profile, which is homogeneous under the model.
pub fn qq_grid_profile(
    result: &FitResult,
    data: &ExceedanceSet,
    profile_row: &[f64],
    probs: Option<&[f64]>,
) -> Result<QqGrid> {
    require_converged(result)?;
    let deaths = data
        .records
        .iter()
        .filter(|e| e.event && e.design_row == profile_row)
        .map(|e| e.y)
        .collect();
    qq_from(result.theta_hat.scale(profile_row), result.theta_hat.xi, deaths, probs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub n_exceedances: usize,
    pub converged: bool,
    pub estimate: Option<ParamVector>,
    /// Wald intervals in `(β…, ξ)` order.
    pub intervals: Option<Vec<(f64, f64)>>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn xi_interval(&self) -> Option<(f64, f64)> {
        self.intervals.as_ref().and_then(|v| v.last().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Full refit at threshold `u`. Failures are recorded in the row.
pub fn sweep_row(
    records: &[IndividualRecord],
    schema: &CovariateSchema,
    u: f64,
    options: &FitOptions,
    level: f64,
) -> SweepRow {
    let mut row = SweepRow {
        threshold: u,
        n_exceedances: 0,
        converged: false,
        estimate: None,
        intervals: None,
        error: None,
    };
    let attempt = || -> Result<(usize, FitResult)> {
        let spec = ModelSpec::new(u, schema.clone())?;
        let data = to_exceedances(records, &spec)?.data;
        let n = data.len();
        Ok((n, fit_mle(&data, None, options)?))
    };
    match attempt() {
        Ok((n, fit)) => {
            row.n_exceedances = n;
            row.converged = fit.converged;
            if fit.converged {
                row.intervals = wald_intervals(&fit, level).ok();
            } else {
                row.error = Some("did not converge".into());
            }
            row.estimate = Some(fit.theta_hat);
        }
        Err(e) => {
            let spec_n = ModelSpec::new(u, schema.clone())
                .and_then(|s| to_exceedances(records, &s))
                .map(|x| x.kept)
                .unwrap_or(0);
            row.n_exceedances = spec_n;
            row.error = Some(e.to_string());
        }
    }
    row
}

pub fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("thresholds must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

/// Refits the model at each threshold; rows are in threshold order.
pub fn threshold_sweep(
    records: &[IndividualRecord],
    schema: &CovariateSchema,
    thresholds: &[f64],
    options: &FitOptions,
    level: f64,
) -> Result<SweepResult> {
    check_thresholds(thresholds)?;
    Ok(SweepResult {
        columns: schema.column_names(),
        rows: thresholds
            .iter()
            .map(|&u| sweep_row(records, schema, u, options, level))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEndpointRow {
    pub profile: Profile,
    pub labels: Vec<String>,
    pub frequency: usize,
    pub estimate: EndpointEstimate,
}

/// Endpoint and delta-method interval for every profile observed more than
/// `min_frequency` times among the exceedances, most frequent first.
pub fn profile_endpoint_table(
    theta: &ParamVector,
    covariance: &Matrix,
    schema: &CovariateSchema,
    data: &ExceedanceSet,
    u: f64,
    min_frequency: usize,
    level: f64,
) -> Result<Vec<ProfileEndpointRow>> {
    if !(theta.xi < 0.0) {
        return Err(Error::NoFiniteEndpoint(theta.xi));
    }
    let mut rows = Vec::new();
    for (profile, frequency) in profile_frequencies(data, schema)? {
        if frequency <= min_frequency {
            continue;
        }
        let row = schema.encode(&profile)?;
        let estimate = endpoint_delta(theta, covariance, &row, u, level)?;
        rows.push(ProfileEndpointRow {
            labels: schema.labels(&profile).iter().map(|s| s.to_string()).collect(),
            profile,
            frequency,
            estimate,
        });
    }
    rows.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.profile.cmp(&b.profile)));
    Ok(rows)
}

/// Formats a profile as `name=label` pairs.
pub fn describe_profile(schema: &CovariateSchema, profile: &Profile) -> String {
    schema
        .covariates()
        .iter()
        .zip(schema.labels(profile))
        .map(|(c, l)| format!("{}={}", c.name(), l))
        .collect::<Vec<_>>()
        .join(",")
}
