//! Log-likelihood of the covariate GPD model under left truncation and
//! right censoring, with its analytic gradient.
//!
//! With `η = β·z`, `s = e^{−η}`, each exceedance contributes
//!
//! ```text
//! −δη − (1/ξ + δ) log(1 + ξ y s) + (1/ξ) log(1 + ξ a s)
//! ```
//!
//! i.e. `log f(y)/S(a)` for a death and `log S(y)/S(a)` for a censored
//! record. Sums use compensated accumulation in data order.

use alloc::vec;
use alloc::vec::Vec;

use crate::design::Exceedance;
use crate::math::{dot, CompensatedSum};
use crate::{Error, Result, XI_ZERO_TOL};

/// `(β, ξ)`: scale coefficients in design-column order and the common shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub beta: Vec<f64>,
    pub xi: f64,
}

impl ParamVector {
    pub fn new(beta: Vec<f64>, xi: f64) -> Self {
        Self { beta, xi }
    }

    /// Number of free parameters, `|β| + 1`.
    pub fn len(&self) -> usize {
        self.beta.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat layout `(β…, ξ)` used by the optimizer.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.push(self.xi);
        v
    }

    pub fn from_slice(flat: &[f64]) -> Self {
        let (beta, xi) = flat.split_at(flat.len() - 1);
        Self {
            beta: beta.to_vec(),
            xi: xi[0],
        }
    }

    /// Fitted scale `exp(β·z)` for a design row.
    pub fn scale(&self, design_row: &[f64]) -> f64 {
        libm::exp(dot(&self.beta, design_row))
    }
}

/// `log(1+t)/t`, continuous through `t = 0`.
#[inline]
fn log1p_ratio(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        libm::log1p(t) / t
    }
}

/// `h(x) = log(1+ξx)/ξ² − x/(ξ(1+ξx))`, the ξ-derivative kernel.
/// Near `ξx = 0` the two terms cancel, so a power series is used there:
/// `h(x) = x² Σ_k (−1)^k (k+1)/(k+2) (ξx)^k`.
#[inline]
fn shape_kernel(x: f64, xi: f64) -> f64 {
    let t = xi * x;
    if libm::fabs(t) < 1e-2 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for k in 0..12 {
            let coef = (k + 1) as f64 / (k + 2) as f64;
            acc += if k % 2 == 0 { coef * pow } else { -coef * pow };
            pow *= t;
        }
        x * x * acc
    } else {
        libm::log1p(t) / (xi * xi) - x / (xi * (1.0 + t))
    }
}

#[inline]
fn record_feasible(e: &Exceedance, s: f64, xi: f64) -> bool {
    let ty = 1.0 + xi * e.y * s;
    let ta = 1.0 + xi * e.a * s;
    ty > 0.0 && ta > 0.0 && ty.is_finite() && ta.is_finite()
}

/// Whether every record lies strictly inside the support implied by
/// `theta`, for deaths and censored records alike.
pub fn feasible(theta: &ParamVector, data: &[Exceedance]) -> bool {
    if !theta.xi.is_finite() || theta.beta.iter().any(|b| !b.is_finite()) {
        return false;
    }
    if theta.xi >= 0.0 {
        return true;
    }
    data.iter().all(|e| {
        let s = libm::exp(-dot(&theta.beta, &e.design_row));
        record_feasible(e, s, theta.xi)
    })
}

/// Log-likelihood, or `−∞` when `theta` is infeasible for the data.
pub fn log_likelihood(theta: &ParamVector, data: &[Exceedance]) -> f64 {
    let xi = theta.xi;
    if !xi.is_finite() {
        return f64::NEG_INFINITY;
    }
    let limit = libm::fabs(xi) < XI_ZERO_TOL;
    let mut acc = CompensatedSum::new();
    for e in data {
        let eta = dot(&theta.beta, &e.design_row);
        let s = libm::exp(-eta);
        if !record_feasible(e, s, xi) {
            return f64::NEG_INFINITY;
        }
        let ys = e.y * s;
        let as_ = e.a * s;
        let d = if e.event { 1.0 } else { 0.0 };
        let term = if limit {
            // first order in ξ around the exponential limit
            -d * eta - d * xi * ys - ys * (1.0 - 0.5 * xi * ys) + as_ * (1.0 - 0.5 * xi * as_)
        } else {
            -d * eta - d * libm::log1p(xi * ys) - ys * log1p_ratio(xi * ys)
                + as_ * log1p_ratio(xi * as_)
        };
        acc.add(term);
    }
    let v = acc.value();
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// `(∂ℓ/∂β, ∂ℓ/∂ξ)` flattened as `(β…, ξ)`.
pub fn gradient(theta: &ParamVector, data: &[Exceedance]) -> Result<Vec<f64>> {
    let xi = theta.xi;
    let p = theta.beta.len();
    let mut acc = vec![CompensatedSum::new(); p + 1];
    for e in data {
        if e.design_row.len() != p {
            return Err(Error::InvalidInput(alloc::format!(
                "design row has {} columns, parameter vector {p}",
                e.design_row.len()
            )));
        }
        let s = libm::exp(-dot(&theta.beta, &e.design_row));
        if !record_feasible(e, s, xi) {
            return Err(Error::Infeasible);
        }
        let ys = e.y * s;
        let as_ = e.a * s;
        let d = if e.event { 1.0 } else { 0.0 };
        let ty = 1.0 + xi * ys;
        let ta = 1.0 + xi * as_;
        let c = -d + (1.0 + d * xi) * ys / ty - as_ / ta;
        for (j, &z) in e.design_row.iter().enumerate() {
            if z != 0.0 {
                acc[j].add(c * z);
            }
        }
        acc[p].add(shape_kernel(ys, xi) - shape_kernel(as_, xi) - d * ys / ty);
    }
    Ok(acc.iter().map(CompensatedSum::value).collect())
}
