//! Generalized Pareto distribution of threshold exceedances.
//!
//! `S(y) = (1 + ξ y/σ)₊^(−1/ξ)` for ξ ≠ 0 and `exp(−y/σ)` in the ξ → 0 limit.
//! For ξ < 0 the support is closed at `y_max = −σ/ξ`: survival and density
//! are exactly zero from the endpoint on.

use rand::distributions::Open01;
use rand::Rng;

use crate::{Error, Result, XI_ZERO_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdParams {
    sigma: f64,
    xi: f64,
}

impl GpdParams {
    pub fn new(sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(alloc::format!("scale must be positive, got {sigma}")));
        }
        if !xi.is_finite() {
            return Err(Error::Domain(alloc::format!("shape must be finite, got {xi}")));
        }
        Ok(Self { sigma, xi })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    #[inline]
    fn is_limit(&self) -> bool {
        libm::fabs(self.xi) < XI_ZERO_TOL
    }

    /// Finite upper endpoint `−σ/ξ`, present only for ξ < 0 outside the
    /// exponential-limit band.
    pub fn upper_endpoint(&self) -> Option<f64> {
        if self.xi < 0.0 && !self.is_limit() {
            Some(-self.sigma / self.xi)
        } else {
            None
        }
    }

    #[inline]
    fn beyond_support(&self, y: f64) -> bool {
        matches!(self.upper_endpoint(), Some(end) if y >= end)
    }
}

pub fn survival(y: f64, p: &GpdParams) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if p.is_limit() {
        return libm::exp(-y / p.sigma);
    }
    if p.beyond_support(y) {
        return 0.0;
    }
    libm::exp(-libm::log1p(p.xi * y / p.sigma) / p.xi)
}

pub fn cdf(y: f64, p: &GpdParams) -> f64 {
    1.0 - survival(y, p)
}

pub fn density(y: f64, p: &GpdParams) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    if p.is_limit() {
        return libm::exp(-y / p.sigma) / p.sigma;
    }
    if p.beyond_support(y) {
        return 0.0;
    }
    libm::exp(-(1.0 / p.xi + 1.0) * libm::log1p(p.xi * y / p.sigma)) / p.sigma
}

/// `y` with `S(y) = 1 − prob`.
pub fn quantile(prob: f64, p: &GpdParams) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain(alloc::format!(
            "quantile probability must lie in (0, 1), got {prob}"
        )));
    }
    Ok(quantile_from_log_survival(libm::log1p(-prob), p))
}

/// Quantile expressed through `log S(y)` (negative).
#[inline]
fn quantile_from_log_survival(log_s: f64, p: &GpdParams) -> f64 {
    if p.is_limit() {
        -p.sigma * log_s
    } else {
        p.sigma / p.xi * libm::expm1(-p.xi * log_s)
    }
}

/// Draws an exceedance conditional on exceeding `a` by inverse transform of
/// `S(y)/S(a)`. The residual over `a` is again generalized Pareto with scale
/// `σ + ξa`, which keeps the transform free of cancellation.
pub fn sample_truncated<R: Rng + ?Sized>(a: f64, p: &GpdParams, rng: &mut R) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "truncation point must be finite and non-negative, got {a}"
        )));
    }
    if p.beyond_support(a) {
        return Err(Error::Domain(alloc::format!(
            "truncation point {a} lies beyond the upper endpoint {}",
            -p.sigma / p.xi
        )));
    }
    let residual = GpdParams {
        sigma: if p.is_limit() { p.sigma } else { p.sigma + p.xi * a },
        xi: p.xi,
    };
    let v: f64 = rng.sample(Open01);
    Ok(a + quantile_from_log_survival(libm::log(v), &residual))
}
