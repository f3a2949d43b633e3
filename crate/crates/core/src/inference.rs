//! Upper endpoint (maximum lifespan) of a covariate profile and its
//! uncertainty: delta method, covariate contrasts and a nonparametric
//! bootstrap over exceedance records.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::design::{CovariateSchema, ExceedanceSet, Profile};
use crate::fit::{fit_mle, FitOptions, FitResult};
use crate::likelihood::ParamVector;
use crate::math::{sorted_quantile, two_sided_z, Matrix};
use crate::rng::{substream, Purpose};
use crate::{Error, Result};

/// `x* = u − exp(β·z)/ξ`, defined for ξ < 0 only.
pub fn endpoint(theta: &ParamVector, profile_row: &[f64], u: f64) -> Result<f64> {
    if !(theta.xi < 0.0) {
        return Err(Error::NoFiniteEndpoint(theta.xi));
    }
    Ok(u - theta.scale(profile_row) / theta.xi)
}

/// Gradient of the endpoint in `(β…, ξ)`:
/// `∂/∂β = −(e^{β·z}/ξ) z`, `∂/∂ξ = e^{β·z}/ξ²`.
pub fn endpoint_gradient(theta: &ParamVector, profile_row: &[f64]) -> Result<Vec<f64>> {
    if !(theta.xi < 0.0) {
        return Err(Error::NoFiniteEndpoint(theta.xi));
    }
    let sigma = theta.scale(profile_row);
    let mut g: Vec<f64> = profile_row.iter().map(|z| -sigma / theta.xi * z).collect();
    g.push(sigma / (theta.xi * theta.xi));
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointMethod {
    FisherDelta,
    BootstrapPercentile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointEstimate {
    pub profile: Vec<f64>,
    pub x_star: f64,
    pub se: f64,
    pub ci: (f64, f64),
    pub method: EndpointMethod,
}

fn delta_se(gradient: &[f64], covariance: &Matrix) -> Result<f64> {
    if covariance.dim() != gradient.len() {
        return Err(Error::InvalidInput(format!(
            "covariance is {0}x{0}, gradient has {1} entries",
            covariance.dim(),
            gradient.len()
        )));
    }
    let var = covariance.quad_form(gradient);
    if var < 0.0 || var.is_nan() {
        return Err(Error::Numerical(format!("delta-method variance is {var}")));
    }
    Ok(libm::sqrt(var))
}

/// Endpoint with a delta-method interval from explicit estimates.
pub fn endpoint_delta(
    theta: &ParamVector,
    covariance: &Matrix,
    profile_row: &[f64],
    u: f64,
    level: f64,
) -> Result<EndpointEstimate> {
    let x_star = endpoint(theta, profile_row, u)?;
    let se = delta_se(&endpoint_gradient(theta, profile_row)?, covariance)?;
    let z = two_sided_z(level)?;
    Ok(EndpointEstimate {
        profile: profile_row.to_vec(),
        x_star,
        se,
        ci: (x_star - z * se, x_star + z * se),
        method: EndpointMethod::FisherDelta,
    })
}

pub fn endpoint_delta_ci(
    result: &FitResult,
    profile_row: &[f64],
    u: f64,
    level: f64,
) -> Result<EndpointEstimate> {
    let cov = match (&result.covariance, result.converged) {
        (Some(c), true) => c,
        _ => return Err(Error::InvalidInput("delta method needs a converged fit".into())),
    };
    endpoint_delta(&result.theta_hat, cov, profile_row, u, level)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    pub covariate: String,
    pub level: String,
    /// `x*(swapped) − x*(base)`
    pub delta: f64,
    /// Delta-method standard error and interval, when a covariance is given.
    pub se: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

/// Endpoint change when covariate `covariate` of `base` is set to `level`.
pub fn contrast(
    theta: &ParamVector,
    schema: &CovariateSchema,
    base: &Profile,
    covariate: usize,
    level: usize,
    u: f64,
) -> Result<f64> {
    let mut swapped = base.clone();
    swapped.0[covariate] = level;
    Ok(endpoint(theta, &schema.encode(&swapped)?, u)? - endpoint(theta, &schema.encode(base)?, u)?)
}

/// One row per covariate level that differs from the base profile's level,
/// in schema order.
pub fn contrast_table(
    theta: &ParamVector,
    covariance: Option<&Matrix>,
    schema: &CovariateSchema,
    base: &Profile,
    u: f64,
    level: f64,
) -> Result<Vec<Contrast>> {
    schema.check_profile(base)?;
    let base_row = schema.encode(base)?;
    let base_x = endpoint(theta, &base_row, u)?;
    let base_grad = endpoint_gradient(theta, &base_row)?;
    let z = two_sided_z(level)?;
    let mut rows = Vec::new();
    for (k, cov) in schema.covariates().iter().enumerate() {
        for (l, label) in cov.categories().iter().enumerate() {
            if l == base.0[k] {
                continue;
            }
            let mut swapped = base.clone();
            swapped.0[k] = l;
            let row = schema.encode(&swapped)?;
            let delta = endpoint(theta, &row, u)? - base_x;
            let (se, ci) = match covariance {
                Some(c) => {
                    let g: Vec<f64> = endpoint_gradient(theta, &row)?
                        .iter()
                        .zip(&base_grad)
                        .map(|(a, b)| a - b)
                        .collect();
                    let se = delta_se(&g, c)?;
                    (Some(se), Some((delta - z * se, delta + z * se)))
                }
                None => (None, None),
            };
            rows.push(Contrast {
                covariate: cov.name().to_string(),
                level: label.clone(),
                delta,
                se,
                ci,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// `n` draws with replacement from the exceedance records.
    WithReplacement,
    /// Keeps the data as is; a test hook for the refit path.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub fit: FitOptions,
    pub resampling: Resampling,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            replicates: 1000,
            seed: 1,
            fit: FitOptions::default(),
            resampling: Resampling::WithReplacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub index: usize,
    pub estimate: ParamVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub replicates: usize,
    pub seed: u64,
    /// Converged replicate estimates, ordered by replicate index.
    pub estimates: Vec<Replicate>,
    /// Indices of replicates whose refit failed or did not converge.
    pub failed: Vec<usize>,
}

impl BootstrapRun {
    /// Orders per-replicate outcomes by index; `None` marks a failure.
    pub fn assemble(replicates: usize, seed: u64, mut outcomes: Vec<(usize, Option<ParamVector>)>) -> Self {
        outcomes.sort_by_key(|(i, _)| *i);
        let mut estimates = Vec::new();
        let mut failed = Vec::new();
        for (index, outcome) in outcomes {
            match outcome {
                Some(estimate) => estimates.push(Replicate { index, estimate }),
                None => failed.push(index),
            }
        }
        Self {
            replicates,
            seed,
            estimates,
            failed,
        }
    }

    pub fn failures(&self) -> usize {
        self.failed.len()
    }

    /// More than 10% of the replicates failed.
    pub fn flagged(&self) -> bool {
        self.failures() * 10 > self.replicates
    }
}

/// Refits replicate `index`, initialized at `original`. Returns `None` when
/// the refit errors or does not converge.
pub fn bootstrap_replicate(
    data: &ExceedanceSet,
    original: &ParamVector,
    index: usize,
    opts: &BootstrapOptions,
) -> Option<ParamVector> {
    let sample = match opts.resampling {
        Resampling::Identity => data.clone(),
        Resampling::WithReplacement => {
            let mut rng = substream(opts.seed, Purpose::Bootstrap, index as u64);
            let n = data.len();
            ExceedanceSet {
                columns: data.columns.clone(),
                records: (0..n).map(|_| data.records[rng.gen_range(0..n)].clone()).collect(),
            }
        }
    };
    match fit_mle(&sample, Some(original), &opts.fit) {
        Ok(fit) if fit.converged => Some(fit.theta_hat),
        _ => None,
    }
}

/// Sequential bootstrap; see the `lifespan` crate for a threaded runner
/// producing identical output.
pub fn bootstrap(data: &ExceedanceSet, original: &ParamVector, opts: &BootstrapOptions) -> Result<BootstrapRun> {
    if opts.replicates == 0 {
        return Err(Error::InvalidInput("need at least one bootstrap replicate".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("no exceedances to resample".into()));
    }
    let outcomes = (0..opts.replicates)
        .map(|i| (i, bootstrap_replicate(data, original, i, opts)))
        .collect();
    Ok(BootstrapRun::assemble(opts.replicates, opts.seed, outcomes))
}

/// Minimum number of converged replicates for a percentile interval.
pub const MIN_PERCENTILE_REPLICATES: usize = 100;

/// Empirical `α/2` and `1−α/2` quantiles of `values`.
pub fn percentile_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no values".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("functional produced NaN".into()));
    }
    if !(0.0..1.0).contains(&level) {
        return Err(Error::Domain(format!("confidence level must lie in [0, 1), got {level}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok((
        sorted_quantile(&sorted, alpha / 2.0),
        sorted_quantile(&sorted, 1.0 - alpha / 2.0),
    ))
}

pub fn bootstrap_percentile_ci<F>(run: &BootstrapRun, functional: F, level: f64) -> Result<(f64, f64)>
where
    F: Fn(&ParamVector) -> f64,
{
    if run.estimates.len() < MIN_PERCENTILE_REPLICATES {
        return Err(Error::TooFewReplicates {
            needed: MIN_PERCENTILE_REPLICATES,
            have: run.estimates.len(),
        });
    }
    let values: Vec<f64> = run.estimates.iter().map(|r| functional(&r.estimate)).collect();
    percentile_interval(&values, level)
}

/// Percentile interval for a profile endpoint; `se` is the standard
/// deviation of the replicate endpoints. Replicates with ξ̂ ≥ 0 count as an
/// infinite endpoint.
pub fn endpoint_bootstrap_ci(
    run: &BootstrapRun,
    original: &ParamVector,
    profile_row: &[f64],
    u: f64,
    level: f64,
) -> Result<EndpointEstimate> {
    let x_star = endpoint(original, profile_row, u)?;
    let f = |t: &ParamVector| endpoint(t, profile_row, u).unwrap_or(f64::INFINITY);
    let ci = bootstrap_percentile_ci(run, f, level)?;
    let values: Vec<f64> = run.estimates.iter().map(|r| f(&r.estimate)).collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
    Ok(EndpointEstimate {
        profile: profile_row.to_vec(),
        x_star,
        se: libm::sqrt(var),
        ci,
        method: EndpointMethod::BootstrapPercentile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::tests::paper_schema;
    use alloc::vec;

    fn be_theta() -> ParamVector {
        // intercept, civ(unmarried, married, divorced), edu(secondary, tertiary, unobserved),
        // hht(single, couple, family, other), org(west-europe, other), sex(male)
        ParamVector::new(
            vec![0.742, 0.108, 0.098, 0.067, 0.021, 0.068, -0.007, 0.279, 0.135, 0.181, 0.136, 0.164, 0.905, -0.202],
            -0.1340,
        )
    }

    #[test]
    fn endpoint_requires_negative_shape() {
        let t = ParamVector::new(vec![0.0], 0.0);
        assert_eq!(endpoint(&t, &[1.0], 100.0), Err(Error::NoFiniteEndpoint(0.0)));
        assert!(endpoint(&ParamVector::new(vec![0.0], 0.2), &[1.0], 100.0).is_err());
    }

    #[test]
    fn reference_profile_endpoint() {
        let s = paper_schema();
        let row = s.encode(&s.reference_profile()).unwrap();
        let x = endpoint(&be_theta(), &row, 100.0).unwrap();
        assert!((x - 115.67).abs() < 0.05);
    }

    #[test]
    fn zero_covariance_gives_degenerate_interval() {
        let s = paper_schema();
        let row = s.encode(&s.reference_profile()).unwrap();
        let est = endpoint_delta(&be_theta(), &Matrix::zeros(15), &row, 100.0, 0.95).unwrap();
        assert_eq!(est.se, 0.0);
        assert_eq!(est.ci, (est.x_star, est.x_star));
    }

    #[test]
    fn delta_interval_width_identity() {
        let s = paper_schema();
        let row = s.encode(&s.reference_profile()).unwrap();
        let mut cov = Matrix::identity(15);
        cov.scale(1e-4);
        let est = endpoint_delta(&be_theta(), &cov, &row, 100.0, 0.95).unwrap();
        let width = est.ci.1 - est.ci.0;
        assert!((width - 2.0 * 1.959_963_984_540_054 * est.se).abs() < 1e-9);
        assert!(est.ci.0 <= est.x_star && est.x_star <= est.ci.1);
    }

    #[test]
    fn negative_variance_is_reported() {
        let mut cov = Matrix::zeros(2);
        cov[(0, 0)] = -1.0;
        let t = ParamVector::new(vec![0.5], -0.1);
        assert!(matches!(
            endpoint_delta(&t, &cov, &[1.0], 100.0, 0.95),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn swap_to_own_level_is_zero() {
        let s = paper_schema();
        let base = s.reference_profile();
        for k in 0..5 {
            assert_eq!(contrast(&be_theta(), &s, &base, k, base.0[k], 100.0).unwrap(), 0.0);
        }
        let table = contrast_table(&be_theta(), None, &s, &base, 100.0, 0.95).unwrap();
        assert_eq!(table.len(), 3 + 3 + 4 + 2 + 1);
    }

    #[test]
    fn percentile_of_constant_is_degenerate() {
        let run = BootstrapRun::assemble(
            150,
            0,
            (0..150).map(|i| (i, Some(ParamVector::new(vec![1.0], -0.1)))).collect(),
        );
        assert_eq!(bootstrap_percentile_ci(&run, |_| 3.5, 0.95).unwrap(), (3.5, 3.5));
    }

    #[test]
    fn too_few_replicates() {
        let run = BootstrapRun::assemble(
            50,
            0,
            (0..50).map(|i| (i, Some(ParamVector::new(vec![1.0], -0.1)))).collect(),
        );
        assert_eq!(
            bootstrap_percentile_ci(&run, |t| t.xi, 0.95),
            Err(Error::TooFewReplicates { needed: 100, have: 50 })
        );
    }

    #[test]
    fn assemble_orders_and_flags() {
        let run = BootstrapRun::assemble(
            10,
            3,
            vec![(2, None), (0, Some(ParamVector::new(vec![0.0], -0.1))), (1, None)],
        );
        assert_eq!(run.estimates[0].index, 0);
        assert_eq!(run.failed, vec![1, 2]);
        assert!(run.flagged());
    }
}
