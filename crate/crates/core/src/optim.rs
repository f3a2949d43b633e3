//! BFGS quasi-Newton minimizer with a strong-Wolfe line search.
//!
//! The objective may return `+∞` for infeasible points; the line search
//! treats such trial steps as overshooting and shrinks back into the
//! feasible region. Gradients are only requested at finite points.

use alloc::vec::Vec;

use crate::math::{dot, Matrix};
use crate::{Error, Result};

pub trait Objective {
    /// Value to minimize, `+∞` outside the feasible region.
    fn value(&self, x: &[f64]) -> f64;
    /// Gradient at a point where `value` is finite.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged when `‖∇f‖∞ < grad_tol · max(1, |f|)` ...
    pub grad_tol: f64,
    /// ... and the last step moved every coordinate by less than
    /// `step_tol · max(1, |x_j|)`.
    pub step_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            step_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No acceptable step could be found along the search direction,
    /// usually because the iterate sits at the optimum to machine precision.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    /// Whether the gradient criterion holds at `x`.
    pub converged: bool,
    pub termination: Termination,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_SEARCH: usize = 60;
const FIRST_STEP_MAX: f64 = 0.1;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

struct LinePoint {
    alpha: f64,
    x: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
}

struct LineSearch<'a, O: Objective + ?Sized> {
    obj: &'a O,
    x0: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
}

impl<O: Objective + ?Sized> LineSearch<'_, O> {
    fn armijo_ok(&self, alpha: f64, f: f64) -> bool {
        f.is_finite() && f <= self.f0 + C1 * alpha * self.slope0
    }

    fn eval(&self, alpha: f64) -> (Vec<f64>, f64) {
        let x = axpy(self.x0, alpha, self.d);
        let f = self.obj.value(&x);
        (x, if f.is_nan() { f64::INFINITY } else { f })
    }

    fn run(&self, alpha_init: f64) -> Result<Option<LinePoint>> {
        let mut prev = (0.0, self.f0, self.slope0);
        let mut alpha = alpha_init;
        for i in 0..MAX_LINE_SEARCH {
            let (x, f) = self.eval(alpha);
            if !self.armijo_ok(alpha, f) || (i > 0 && f >= prev.1) {
                return self.zoom(prev, (alpha, f));
            }
            let g = self.obj.gradient(&x)?;
            let slope = dot(&g, self.d);
            if libm::fabs(slope) <= -C2 * self.slope0 {
                return Ok(Some(LinePoint { alpha, x, value: f, gradient: g }));
            }
            if slope >= 0.0 {
                return self.zoom((alpha, f, slope), (prev.0, prev.1));
            }
            prev = (alpha, f, slope);
            alpha *= 2.0;
        }
        Ok(None)
    }

    /// `lo` satisfies sufficient decrease with known slope; the minimizer
    /// along the ray is bracketed between `lo` and `hi`.
    fn zoom(&self, mut lo: (f64, f64, f64), mut hi: (f64, f64)) -> Result<Option<LinePoint>> {
        for _ in 0..MAX_LINE_SEARCH {
            let width = hi.0 - lo.0;
            let mut alpha = lo.0 + 0.5 * width;
            if hi.1.is_finite() {
                // quadratic through φ(lo), φ'(lo), φ(hi)
                let denom = 2.0 * (hi.1 - lo.1 - lo.2 * width);
                if denom != 0.0 {
                    let cand = lo.0 - lo.2 * width * width / denom;
                    let (a, b) = if width > 0.0 {
                        (lo.0 + 0.1 * width, hi.0 - 0.1 * width)
                    } else {
                        (hi.0 - 0.1 * width, lo.0 + 0.1 * width)
                    };
                    if cand.is_finite() {
                        alpha = cand.clamp(a.min(b), a.max(b));
                    }
                }
            }
            if libm::fabs(width) <= 1e-16 * libm::fabs(lo.0).max(1e-3) {
                break;
            }
            let (x, f) = self.eval(alpha);
            if !self.armijo_ok(alpha, f) || f >= lo.1 {
                hi = (alpha, f);
                continue;
            }
            let g = self.obj.gradient(&x)?;
            let slope = dot(&g, self.d);
            if libm::fabs(slope) <= -C2 * self.slope0 {
                return Ok(Some(LinePoint { alpha, x, value: f, gradient: g }));
            }
            if slope * (hi.0 - lo.0) >= 0.0 {
                hi = (lo.0, lo.1);
            }
            lo = (alpha, f, slope);
        }
        // Curvature condition unmet; accept the best decrease point if any.
        if lo.0 > 0.0 {
            let x = axpy(self.x0, lo.0, self.d);
            let gradient = self.obj.gradient(&x)?;
            return Ok(Some(LinePoint { alpha: lo.0, x, value: lo.1, gradient }));
        }
        Ok(None)
    }
}

/// Minimizes `obj` from `x0`, which must be feasible.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    if !f.is_finite() {
        return Err(Error::Infeasible);
    }
    let mut g = obj.gradient(&x)?;
    let mut h = Matrix::identity(n);
    let mut h_is_identity = true;
    let mut scaled = false;
    let mut step_small = false;
    let grad_ok = |g: &[f64], f: f64| max_abs(g) < opts.grad_tol * libm::fabs(f).max(1.0);

    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    while iterations < opts.max_iter {
        if max_abs(&g) == 0.0 || (grad_ok(&g, f) && step_small) {
            termination = Termination::Converged;
            break;
        }
        let mut d: Vec<f64> = h.mul_vec(&g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h = Matrix::identity(n);
            h_is_identity = true;
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let alpha0 = if h_is_identity {
            (FIRST_STEP_MAX / max_abs(&d)).min(1.0)
        } else {
            1.0
        };
        let ls = LineSearch { obj, x0: &x, d: &d, f0: f, slope0: slope };
        let point = match ls.run(alpha0)? {
            Some(p) => p,
            None if !h_is_identity => {
                // stale curvature model; restart from steepest descent
                h = Matrix::identity(n);
                h_is_identity = true;
                scaled = false;
                continue;
            }
            None => {
                termination = Termination::LineSearchStalled;
                break;
            }
        };
        iterations += 1;

        let s: Vec<f64> = d.iter().map(|di| point.alpha * di).collect();
        let y: Vec<f64> = point.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
        step_small = s
            .iter()
            .zip(&x)
            .all(|(si, xi)| libm::fabs(*si) < opts.step_tol * libm::fabs(*xi).max(1.0));
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * libm::sqrt(dot(&s, &s) * yy) && sy > 0.0 {
            if !scaled {
                h = Matrix::identity(n);
                h.scale(sy / yy);
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = h.mul_vec(&y);
            let yhy = dot(&y, &hy);
            let coef = rho * rho * yhy + rho;
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j];
                }
            }
            h_is_identity = false;
        }
        x = point.x;
        f = point.value;
        g = point.gradient;
    }
    Ok(BfgsOutcome {
        converged: grad_ok(&g, f) || max_abs(&g) == 0.0,
        x,
        value: f,
        gradient: g,
        iterations,
        termination,
    })
}
