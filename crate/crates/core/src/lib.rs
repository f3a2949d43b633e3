//! Generalized Pareto threshold-exceedance models with a log-linear,
//! covariate-dependent scale and a common shape parameter, fitted to
//! lifetimes observed under left truncation and right censoring.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! runners and the command-line tool live in the companion `lifespan` crate.
//!
//! Module map:
//!
//! - [`gpd`]: distribution kernel (survival, density, quantile, truncated sampling)
//! - [`design`]: records, covariate schema, dummy encoding, exceedance extraction
//! - [`likelihood`]: truncated/censored log-likelihood and analytic gradient
//! - [`optim`]: BFGS with a strong-Wolfe line search
//! - [`fit`]: maximum likelihood, observed-information covariance, Wald intervals
//! - [`inference`]: upper endpoint, delta method, contrasts, bootstrap
//! - [`simulate`]: synthetic populations reproducing the observation scheme
//! - [`diagnostics`]: Q-Q grids, threshold sweeps, per-profile endpoint tables

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod design;
pub mod diagnostics;
mod error;
pub mod fit;
pub mod gpd;
pub mod inference;
pub mod likelihood;
pub mod math;
pub mod optim;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};

/// Below this magnitude the shape parameter is treated as zero and the
/// exponential-limit expressions are used.
pub const XI_ZERO_TOL: f64 = 1e-8;
