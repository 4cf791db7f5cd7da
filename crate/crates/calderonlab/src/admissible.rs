//! The power-log family of admissible functions and the calculus around it:
//! slope bounds, two-sided integral comparisons, thresholds and the
//! infimum/supremum envelopes used by the rearrangement estimates.
//!
//! φ(x) = x^γ · Π_k (log_(k) x)^{β_k}  on [1, ∞), with
//! log_(1) x = 1 + log x and log_(k) x = 1 + log(log_(k-1) x).
//! Every such φ satisfies φ(1) = 1, is log-concave, and its logarithmic
//! derivative is pinched between γ/x and (γ + Σ β_k)/x.

use crate::error::{Error, Result};
use crate::grid::{grid_max, grid_min, log_grid};
use crate::quad;

/// φ(x) = x^gamma Π (log_(k) x)^{betas[k]}.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleFunction {
    gamma: f64,
    betas: Vec<f64>,
}

/// Validated bounds γ/x ≤ φ'(x)/φ(x) ≤ β/x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeBounds {
    pub gamma_lo: f64,
    pub beta_hi: f64,
}

impl AdmissibleFunction {
    pub fn new(gamma: f64, betas: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput("gamma must be positive".to_string()));
        }
        if betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::InvalidInput("betas must be nonnegative".to_string()));
        }
        Ok(AdmissibleFunction { gamma, betas })
    }

    /// Pure power x^gamma.
    pub fn power(gamma: f64) -> Self {
        AdmissibleFunction::new(gamma, Vec::new()).unwrap()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Is this a pure power x^gamma (no logarithmic factors)?
    pub fn is_pure_power(&self) -> bool {
        self.betas.iter().all(|b| *b == 0.0)
    }

    /// Upper slope candidate β = γ + Σ β_k.
    pub fn beta_candidate(&self) -> f64 {
        self.gamma + self.betas.iter().sum::<f64>()
    }

    pub fn eval(&self, x: f64) -> f64 {
        assert!(x >= 1.0, "admissible functions live on [1, ∞)");
        let mut log_phi = self.gamma * x.ln();
        let mut level = x;
        for &b in &self.betas {
            level = 1.0 + level.ln();
            log_phi += b * level.ln();
        }
        log_phi.exp()
    }

    /// Short textual form, also accepted by the CLI parser.
    pub fn describe(&self) -> String {
        if self.betas.is_empty() {
            format!("gamma={}", self.gamma)
        } else {
            let betas: Vec<String> = self.betas.iter().map(|b| b.to_string()).collect();
            format!("gamma={};betas={}", self.gamma, betas.join(","))
        }
    }
}

/// Evaluation entry point matching the operation vocabulary.
pub fn phi_eval(phi: &AdmissibleFunction, x: f64) -> f64 {
    phi.eval(x)
}

/// Slope bounds (γ, γ + Σ β_k), validated against a finite-difference
/// logarithmic derivative on a log-spaced grid of [1, 10^6].
pub fn slope_bounds(phi: &AdmissibleFunction) -> Result<SlopeBounds> {
    let gamma = phi.gamma();
    let beta = phi.beta_candidate();
    let slack = 1e-6;
    for x in log_grid(1.0 + 1e-4, 1e6, 2000) {
        let h = 1e-6 * x;
        let d = (phi.eval(x + h).ln() - phi.eval(x - h).ln()) / (2.0 * h);
        let lo = gamma / x;
        let hi = beta / x;
        if d < lo * (1.0 - slack) - 1e-12 || d > hi * (1.0 + slack) + 1e-12 {
            return Err(Error::SlopeBoundViolation(format!(
                "phi'(x)/phi(x) = {d} at x = {x} escapes [{lo}, {hi}]"
            )));
        }
    }
    Ok(SlopeBounds {
        gamma_lo: gamma,
        beta_hi: beta,
    })
}

/// Both sides of the integral comparison
///   ∫_1^r φ(1+log s) s^{1/q - 1} ds ≍ φ(1+log r) r^{1/q} - 1      (q < ∞)
///   ∫_1^r (1+log s)^{-1} φ(1+log s) ds/s ≍ φ(1+log r) - 1          (q = ∞)
/// as `(lhs, rhs)`; the caller asserts the equivalence with the slope
/// constants. Pass `q = f64::INFINITY` for the second form.
pub fn comparables_ratio(phi: &AdmissibleFunction, q: f64, r: f64) -> Result<(f64, f64)> {
    assert!(r >= 1.0, "comparables_ratio requires r >= 1");
    assert!(q > 0.0);
    if r == 1.0 {
        return Ok((0.0, 0.0));
    }
    let top = r.ln();
    let (lhs, rhs) = if q.is_infinite() {
        let lhs = quad::integrate(&|u| phi.eval(1.0 + u) / (1.0 + u), 0.0, top, 1e-10)?;
        (lhs, phi.eval(1.0 + top) - 1.0)
    } else {
        let lhs = quad::integrate(&|u| phi.eval(1.0 + u) * (u / q).exp(), 0.0, top, 1e-10)?;
        (lhs, phi.eval(1.0 + top) * r.powf(1.0 / q) - 1.0)
    };
    Ok((lhs, rhs))
}

/// Smallest λ > 1 on a search grid such that for all r ≥ λt the derivative
/// of the truncated-tail antiderivative g_q stays within a factor 2 of its
/// asymptotic multiple of the tail integrand (scale invariant; probed at
/// t = 1). Exhaustion beyond λ = 10^6 signals a non-admissible shape.
pub fn lambda_threshold(phi: &AdmissibleFunction, q2: f64) -> Result<f64> {
    assert!(q2 > 1.0);
    // g and the tail integrand at t = 1
    let g = |r: f64| -> f64 {
        let l = 1.0 + r.ln();
        if q2.is_infinite() {
            -phi.eval(l) / (l * r)
        } else {
            -phi.eval(l) * r.powf(1.0 / q2 - 1.0)
        }
    };
    let integrand = |r: f64| -> f64 {
        let l = 1.0 + r.ln();
        if q2.is_infinite() {
            phi.eval(l) / (l * r * r)
        } else {
            phi.eval(l) * r.powf(1.0 / q2 - 2.0)
        }
    };
    let asymptote = if q2.is_infinite() { 1.0 } else { 1.0 - 1.0 / q2 };
    let within = |r: f64| -> bool {
        // keep the stencil inside the domain (1 + ln of the lower point
        // must stay ≥ 1)
        let h = (1e-6 * r).min(0.5 * (r - 1.0));
        if h <= 0.0 {
            return false;
        }
        let d = (g(r + h) - g(r - h)) / (2.0 * h);
        let ratio = d / (asymptote * integrand(r));
        (0.5..=2.0).contains(&ratio)
    };
    // every probe beyond the search window must already be in regime
    if !log_grid(1e6, 1e9, 40).into_iter().all(within) {
        return Err(Error::SearchExhausted(
            "no threshold below 1e6; parametrization is not admissible".to_string(),
        ));
    }
    let grid = log_grid(1.0 + 1e-6, 1e6, 2000);
    // smallest grid point from which the condition holds on the whole suffix
    let mut first_ok = grid.len();
    for i in (0..grid.len()).rev() {
        if within(grid[i]) {
            first_ok = i;
        } else {
            break;
        }
    }
    if first_ok == grid.len() {
        return Err(Error::SearchExhausted(
            "threshold condition fails up to 1e6".to_string(),
        ));
    }
    Ok(grid[first_ok])
}

/// (numeric infimum over y ∈ (0, μ] of φ(y⁻¹) e^{yx}, analytic envelope):
/// envelope e^{μx} for x ≤ 0 and φ((1+x)/μ) for x > 0. The numeric value
/// is below a fixed multiple of the envelope; the multiple depends on φ and
/// on how small μ is allowed to get, and is reported rather than hidden.
pub fn inf_bound(phi: &AdmissibleFunction, x: f64, mu: f64) -> (f64, f64) {
    assert!(mu > 0.0 && mu <= 1.0);
    let target = |y: f64| phi.eval(1.0 / y) * (y * x).exp();
    let grid = log_grid(mu * 1e-8, mu, 10_000);
    let (_, numeric) = grid_min(target, &grid);
    let bound = if x <= 0.0 {
        (mu * x).exp()
    } else {
        phi.eval((1.0 + x) / mu)
    };
    (numeric, bound)
}

/// (numeric supremum over x ≥ 1 of φ(x) e^{-x/y}, analytic bound
/// max{1, β^β e^{-β}}·φ(y)). The supremum sits at x ≈ βy, so the grid
/// covers [1, 50βy].
pub fn sup_bound(phi: &AdmissibleFunction, y: f64) -> (f64, f64) {
    assert!(y >= 1.0);
    let beta = phi.beta_candidate();
    let target = |x: f64| phi.eval(x) * (-x / y).exp();
    let hi = (50.0 * beta * y).max(10.0);
    let grid = log_grid(1.0, hi, 10_000);
    let (_, numeric) = grid_max(target, &grid);
    let bound = (beta.powf(beta) * (-beta).exp()).max(1.0) * phi.eval(y);
    (numeric, bound)
}

/// The (p0, α) transform of an admissible function:
/// tilde(x) = φ(x^{p0/α}) for α < 1 and x⁻¹φ(x) for α = 1;
/// overline(x) = φ(x^{p0/α}) for α < 1 and φ(x) for α = 1.
#[derive(Debug, Clone)]
pub struct TildeTransform {
    base: AdmissibleFunction,
    p0: f64,
    alpha: f64,
}

pub fn transform_tilde(phi: &AdmissibleFunction, p0: f64, alpha: f64) -> TildeTransform {
    assert!(p0 >= 1.0, "p0 must be at least 1");
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    TildeTransform {
        base: phi.clone(),
        p0,
        alpha,
    }
}

impl TildeTransform {
    pub fn tilde(&self, x: f64) -> f64 {
        assert!(x >= 1.0);
        if self.alpha < 1.0 {
            self.base.eval(x.powf(self.p0 / self.alpha))
        } else {
            self.base.eval(x) / x
        }
    }

    pub fn overline(&self, x: f64) -> f64 {
        assert!(x >= 1.0);
        if self.alpha < 1.0 {
            self.base.eval(x.powf(self.p0 / self.alpha))
        } else {
            self.base.eval(x)
        }
    }

    /// The transform of a pure power is again a pure power when its exponent
    /// stays positive.
    pub fn to_admissible(&self) -> Option<AdmissibleFunction> {
        if !self.base.is_pure_power() {
            return None;
        }
        let g = if self.alpha < 1.0 {
            self.base.gamma() * self.p0 / self.alpha
        } else {
            self.base.gamma() - 1.0
        };
        AdmissibleFunction::new(g, Vec::new()).ok()
    }
}
