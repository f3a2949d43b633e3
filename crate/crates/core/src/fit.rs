//! Maximum-likelihood fitting and observed-information covariance.

use alloc::format;
use alloc::vec::Vec;

use crate::design::ExceedanceSet;
use crate::likelihood::{self, ParamVector};
use crate::math::{two_sided_z, Matrix};
use crate::optim::{self, BfgsOptions, Objective, Termination};
use crate::{Error, Result};

/// Optimizer settings.
pub type FitOptions = BfgsOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    pub loglik: f64,
    /// Inverse observed information, `(|β|+1)²`, ordered `(β…, ξ)`.
    /// Always present for converged fits.
    pub covariance: Option<Matrix>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the log-likelihood gradient at `theta_hat`.
    pub gradient_norm: f64,
    pub termination: Termination,
}

impl FitResult {
    /// Square roots of the covariance diagonal.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| c.diagonal().iter().map(|v| libm::sqrt(v.max(0.0))).collect())
    }
}

struct NegLogLik<'a> {
    data: &'a ExceedanceSet,
}

impl Objective for NegLogLik<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        -likelihood::log_likelihood(&ParamVector::from_slice(x), &self.data.records)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = likelihood::gradient(&ParamVector::from_slice(x), &self.data.records)?;
        g.iter_mut().for_each(|v| *v = -*v);
        Ok(g)
    }
}

fn check_identifiable(data: &ExceedanceSet) -> Result<()> {
    let p = data.columns.len();
    if data.is_empty() {
        return Err(Error::InvalidInput("no exceedances to fit".into()));
    }
    if data.records.iter().any(|e| e.design_row.len() != p) {
        return Err(Error::InvalidInput(format!(
            "design rows must have {p} columns"
        )));
    }
    let deaths = data.deaths();
    if deaths < p + 1 {
        return Err(Error::InvalidInput(format!(
            "need at least {} observed deaths for {} parameters, have {deaths}",
            p + 1,
            p + 1
        )));
    }
    for j in 1..p {
        let first = data.records[0].design_row[j];
        if data.records.iter().all(|e| e.design_row[j] == 0.0) {
            return Err(Error::RankDeficient(data.columns[j].clone()));
        }
        if first == 1.0 && data.records.iter().all(|e| e.design_row[j] == 1.0) {
            // indistinguishable from the intercept
            return Err(Error::RankDeficient(data.columns[j].clone()));
        }
    }
    Ok(())
}

/// Starting point: ξ₀ = −0.1, intercept `log(mean death exceedance)`, other
/// coefficients zero. Falls back to ξ₀ = 0 when that point is infeasible.
pub fn default_init(data: &ExceedanceSet) -> ParamVector {
    let (sum, count) = data
        .records
        .iter()
        .filter(|e| e.event)
        .fold((0.0, 0usize), |(s, c), e| (s + e.y, c + 1));
    let mean = if count > 0 { sum / count as f64 } else { 1.0 };
    let mut beta = alloc::vec![0.0; data.columns.len()];
    beta[0] = libm::log(mean);
    let theta = ParamVector::new(beta, -0.1);
    if likelihood::feasible(&theta, &data.records) {
        theta
    } else {
        ParamVector { xi: 0.0, ..theta }
    }
}

pub fn fit_mle(
    data: &ExceedanceSet,
    init: Option<&ParamVector>,
    options: &FitOptions,
) -> Result<FitResult> {
    check_identifiable(data)?;
    let start = match init {
        Some(t) => {
            if t.beta.len() != data.columns.len() {
                return Err(Error::InvalidInput(format!(
                    "initial value has {} coefficients, design has {}",
                    t.beta.len(),
                    data.columns.len()
                )));
            }
            if !likelihood::feasible(t, &data.records) {
                return Err(Error::Infeasible);
            }
            t.clone()
        }
        None => default_init(data),
    };
    let out = optim::minimize(&NegLogLik { data }, &start.to_vec(), options)?;
    let theta_hat = ParamVector::from_slice(&out.x);
    let covariance = match observed_fisher(&theta_hat, data) {
        Ok(c) => Some(c),
        Err(e) if out.converged => return Err(e),
        Err(_) => None,
    };
    Ok(FitResult {
        theta_hat,
        loglik: -out.value,
        covariance,
        converged: out.converged,
        iterations: out.iterations,
        gradient_norm: out.gradient.iter().fold(0.0, |m, g| m.max(libm::fabs(*g))),
        termination: out.termination,
    })
}

/// Covariance estimate: inverse negative Hessian of the log-likelihood at
/// `theta_hat`.
pub fn observed_fisher(theta_hat: &ParamVector, data: &ExceedanceSet) -> Result<Matrix> {
    covariance_from_gradient(&theta_hat.to_vec(), |x| {
        likelihood::gradient(&ParamVector::from_slice(x), &data.records)
    })
}

/// Inverse of `−H`, where `H` comes from central differences of the
/// log-likelihood gradient `grad` with per-coordinate step
/// `max(1e−5, 1e−5·|θ_j|)`, symmetrized before inversion.
pub fn covariance_from_gradient<F>(theta: &[f64], grad: F) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = theta.len();
    let mut neg_hessian = Matrix::zeros(n);
    let mut x = theta.to_vec();
    for j in 0..n {
        let h = (1e-5 * libm::fabs(theta[j])).max(1e-5);
        x[j] = theta[j] + h;
        let up = grad(&x)?;
        x[j] = theta[j] - h;
        let down = grad(&x)?;
        x[j] = theta[j];
        for i in 0..n {
            neg_hessian[(i, j)] = -(up[i] - down[i]) / (2.0 * h);
        }
    }
    neg_hessian.symmetrize();
    neg_hessian.spd_inverse()
}

/// `θ̂ ± z_{α/2}·se`
pub fn wald_interval(estimate: f64, se: f64, level: f64) -> Result<(f64, f64)> {
    let z = two_sided_z(level)?;
    Ok((estimate - z * se, estimate + z * se))
}

/// Per-parameter Wald intervals in `(β…, ξ)` order.
pub fn wald_intervals(result: &FitResult, level: f64) -> Result<Vec<(f64, f64)>> {
    let cov = match (&result.covariance, result.converged) {
        (Some(c), true) => c,
        _ => {
            return Err(Error::InvalidInput(
                "Wald intervals need a converged fit with a covariance".into(),
            ))
        }
    };
    let z = two_sided_z(level)?;
    result
        .theta_hat
        .to_vec()
        .iter()
        .zip(cov.diagonal())
        .map(|(&est, var)| {
            if var < 0.0 {
                return Err(Error::Numerical(format!("negative variance {var}")));
            }
            let se = libm::sqrt(var);
            Ok((est - z * se, est + z * se))
        })
        .collect()
}
