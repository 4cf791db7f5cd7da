//! Adaptive Simpson quadrature.
//!
//! The integrands in this crate are smooth on each subinterval between
//! breakpoints (the callers split there), so plain bisection-refined Simpson
//! with Richardson correction converges quickly. The refinement cap of 2^20
//! subintervals corresponds to a maximum recursion depth of 20.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 20;

/// ∫_a^b f(x) dx to relative tolerance `rel_tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    assert!(b > a, "integrate: reversed interval");
    let whole = simpson(f, a, b);
    // Absolute budget from a first-pass scale estimate; floored so that an
    // integrand that is identically zero terminates immediately.
    let eps = rel_tol * whole.abs().max(1e-300);
    let mut converged = true;
    let v = adapt(f, a, b, whole, eps, MAX_DEPTH, &mut converged);
    if converged {
        Ok(v)
    } else {
        Err(Error::QuadratureNonConvergence)
    }
}

/// Improper integral ∫_a^∞ f(x) dx for integrands decaying at least
/// exponentially: integrates blocks of fixed width until a block contributes
/// less than `rel_tol` of the accumulated value.
pub fn integrate_to_infinity(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    block: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut lo = a;
    for _ in 0..256 {
        let piece = integrate(f, lo, lo + block, rel_tol)?;
        acc += piece;
        lo += block;
        if piece.abs() <= rel_tol * acc.abs().max(1e-300) {
            return Ok(acc);
        }
    }
    Err(Error::QuadratureNonConvergence)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    converged: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *converged = false;
        return left + right;
    }
    adapt(f, a, m, left, 0.5 * eps, depth - 1, converged)
        + adapt(f, m, b, right, 0.5 * eps, depth - 1, converged)
}
