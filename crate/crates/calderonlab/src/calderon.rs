//! The Calderón-type operators P_{q1}, Q_{q2,φ} and S = P + Q, the kernel
//! primitive ∫_0^r k(t,s) ds, the norm functional A_k, and weighted Lorentz
//! quasi-norms.
//!
//! P-integrals are closed-form per piece. Q-integrals substitute
//! u = log(s/t), which turns each piece into a smooth bounded integrand
//! handled by adaptive quadrature at relative tolerance 1e-9; closed forms
//! for φ(x) = x^m live in the tests as oracles, never as the evaluation
//! path.

use crate::admissible::AdmissibleFunction;
use crate::error::{Error, Result};
use crate::grid::{grid_max, log_grid};
use crate::quad;
use crate::stepfn::{RunningAverage, StepFunction};
use crate::weights::{w_eval, weight_grid, Weight};

pub const Q_REL_TOL: f64 = 1e-9;

/// Parameter triple (q1, q2, φ) with 1 ≤ q1 < q2 ≤ ∞; pass
/// `q2 = f64::INFINITY` for the logarithmic endpoint form.
#[derive(Debug, Clone, PartialEq)]
pub struct CalderonParams {
    pub q1: f64,
    pub q2: f64,
    pub phi: AdmissibleFunction,
}

impl CalderonParams {
    pub fn new(q1: f64, q2: f64, phi: AdmissibleFunction) -> Result<Self> {
        if !(q1 >= 1.0) || !q1.is_finite() || !(q2 > q1) {
            return Err(Error::InvalidInput(format!(
                "need 1 <= q1 < q2 <= inf, got q1={q1}, q2={q2}"
            )));
        }
        Ok(CalderonParams { q1, q2, phi })
    }
}

/// A function on (0, ∞) that is (v + d/s) between consecutive knots. Both
/// step functions (d = 0 everywhere) and running averages f** (d = running
/// integral offset) fit, which lets P and Q treat f* and f** uniformly.
pub trait Curve {
    /// Ascending, starting at 0.
    fn knots(&self) -> &[f64];
    /// (v, d) on [knots()[i], knots()[i+1]).
    fn piece(&self, i: usize) -> (f64, f64);
    /// (v, d) on [knots().last(), ∞).
    fn tail_piece(&self) -> (f64, f64);

    fn eval_at(&self, s: f64) -> f64 {
        assert!(s > 0.0);
        let ks = self.knots();
        let (v, d) = match ks.partition_point(|&k| k <= s) {
            i if i >= ks.len() => self.tail_piece(),
            i => self.piece(i - 1),
        };
        v + d / s
    }
}

impl Curve for StepFunction {
    fn knots(&self) -> &[f64] {
        self.breakpoints()
    }
    fn piece(&self, i: usize) -> (f64, f64) {
        (self.piece_values()[i], 0.0)
    }
    fn tail_piece(&self) -> (f64, f64) {
        (self.tail_value(), 0.0)
    }
}

impl Curve for RunningAverage {
    fn knots(&self) -> &[f64] {
        self.fstar().breakpoints()
    }
    fn piece(&self, i: usize) -> (f64, f64) {
        let a = self.fstar().breakpoints()[i];
        let v = self.fstar().piece_values()[i];
        (v, self.fstar().integral_to(a) - v * a)
    }
    fn tail_piece(&self) -> (f64, f64) {
        (0.0, self.total())
    }
}

/// Exact ∫_lo^hi (v + d/s) s^e ds on one smooth region. Needs e > -1 when
/// lo = 0 (always true here: e = 1/q1 - 1 with q1 < ∞), and d = 0 on the
/// region touching 0 (guaranteed by the curve types).
fn region_moment(v: f64, d: f64, lo: f64, hi: f64, e: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut acc = 0.0;
    if v != 0.0 {
        // e + 1 > 0 for every q1 in [1, ∞)
        acc += v * (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0);
    }
    if d != 0.0 {
        debug_assert!(lo > 0.0, "1/s piece cannot touch the origin");
        acc += if e == 0.0 {
            d * (hi / lo).ln()
        } else {
            d * (hi.powf(e) - lo.powf(e)) / e
        };
    }
    acc
}

/// Exact ∫_a^b c(s) s^e ds, splitting at the curve's knots.
fn moment(c: &dyn Curve, a: f64, b: f64, e: f64) -> f64 {
    let ks = c.knots();
    let mut acc = 0.0;
    for i in 0..ks.len().saturating_sub(1) {
        let (v, d) = c.piece(i);
        acc += region_moment(v, d, ks[i].max(a), ks[i + 1].min(b), e);
    }
    let end = *ks.last().unwrap();
    if b > end {
        let (v, d) = c.tail_piece();
        acc += region_moment(v, d, end.max(a), b, e);
    }
    acc
}

/// P_{q1}c(t) = t^{-1/q1} ∫_0^t c(s) s^{1/q1 - 1} ds, exact.
pub fn p_op_curve(q1: f64, c: &dyn Curve, t: f64) -> f64 {
    assert!(q1 >= 1.0 && t > 0.0);
    t.powf(-1.0 / q1) * moment(c, 0.0, t, 1.0 / q1 - 1.0)
}

pub fn p_op(q1: f64, f: &StepFunction, t: f64) -> f64 {
    p_op_curve(q1, f, t)
}

/// Q_{q2,φ}c(t), via u = log(s/t):
///   q2 < ∞: ∫_0^∞ φ(1+u) c(t e^u) e^{u/q2} du
///   q2 = ∞: ∫_0^∞ φ(1+u)(1+u)^{-1} c(t e^u) du
/// Requires the curve to vanish (up to a d/s tail) at infinity.
pub fn q_op_curve(
    q2: f64,
    phi: &AdmissibleFunction,
    c: &dyn Curve,
    t: f64,
) -> Result<f64> {
    assert!(q2 > 1.0 && t > 0.0);
    let (tv, td) = c.tail_piece();
    if tv != 0.0 {
        return Err(Error::InvalidInput(
            "Q requires a function vanishing at infinity".to_string(),
        ));
    }
    let weight = |u: f64| -> f64 {
        if q2.is_infinite() {
            phi.eval(1.0 + u) / (1.0 + u)
        } else {
            phi.eval(1.0 + u) * (u / q2).exp()
        }
    };
    // integrate region by region: on each one the curve is v + d/s, so the
    // integrand is smooth and the breakpoint jumps never land inside a
    // quadrature interval
    let ks = c.knots();
    let mut acc = 0.0;
    let mut last_u = 0.0;
    for i in 0..ks.len().saturating_sub(1) {
        let hi = ks[i + 1];
        if hi <= t {
            continue;
        }
        let (v, d) = c.piece(i);
        let a = (ks[i].max(t) / t).ln();
        let b = (hi / t).ln();
        last_u = b;
        if v == 0.0 && d == 0.0 {
            continue;
        }
        acc += quad::integrate(&|u| weight(u) * (v + d / (t * u.exp())), a, b, Q_REL_TOL)?;
    }
    if td != 0.0 {
        // beyond the last knot c(s) = d/s, so the integrand decays like
        // e^{-(1 - 1/q2)u} against the polylog growth of φ
        let start = last_u.max((ks.last().copied().unwrap_or(t).max(t) / t).ln());
        let rate = if q2.is_infinite() { 1.0 } else { 1.0 - 1.0 / q2 };
        let g = |u: f64| weight(u) * td / (t * u.exp());
        acc += quad::integrate_to_infinity(&g, start, (4.0 / rate).min(64.0), Q_REL_TOL)?;
    }
    Ok(acc)
}

pub fn q_op(q2: f64, phi: &AdmissibleFunction, f: &StepFunction, t: f64) -> Result<f64> {
    q_op_curve(q2, phi, f, t)
}

/// S_{q1,q2,φ} = P_{q1} + Q_{q2,φ}.
pub fn s_op_curve(params: &CalderonParams, c: &dyn Curve, t: f64) -> Result<f64> {
    Ok(p_op_curve(params.q1, c, t) + q_op_curve(params.q2, &params.phi, c, t)?)
}

pub fn s_op(params: &CalderonParams, f: &StepFunction, t: f64) -> Result<f64> {
    s_op_curve(params, f, t)
}

/// ∫_0^r k(t,s) ds for the sufficiency-proof kernel: (r/t)^{1/q1} for
/// r ≤ t, and 1 plus the Q-kernel integral ∫_0^{log(r/t)} of φ(1+u)e^{u/q2}
/// (resp. φ(1+u)/(1+u) at q2 = ∞) for r > t.
pub fn kernel_primitive(params: &CalderonParams, t: f64, r: f64) -> Result<f64> {
    assert!(t > 0.0 && r > 0.0);
    if r <= t {
        return Ok((r / t).powf(1.0 / params.q1));
    }
    let top = (r / t).ln();
    let q2 = params.q2;
    let phi = params.phi.clone();
    let tail = if q2.is_infinite() {
        quad::integrate(&|u| phi.eval(1.0 + u) / (1.0 + u), 0.0, top, Q_REL_TOL)?
    } else {
        quad::integrate(&|u| phi.eval(1.0 + u) * (u / q2).exp(), 0.0, top, Q_REL_TOL)?
    };
    Ok(1.0 + tail)
}

/// A_k = sup_t [sup_r (∫_0^r k(t,s) ds) / W(r)] · W(t). Scale invariance
/// collapses power weights to a one-dimensional supremum over ρ = r/t;
/// step weights go through a shared log grid where the kernel value only
/// depends on the index difference.
pub fn ak_norm(params: &CalderonParams, w: &Weight) -> Result<f64> {
    match w {
        Weight::Power { tau } => {
            // r → 0: (r/t)^{1/q1} / W(r) ~ r^{1/q1 - τ}
            if *tau > 1.0 / params.q1 {
                return Ok(f64::INFINITY);
            }
            // r → ∞: kernel grows like φ(1+log ρ)ρ^{1/q2} against ρ^τ
            if params.q2.is_finite() && *tau <= 1.0 / params.q2 {
                return Ok(f64::INFINITY);
            }
            let g = log_grid(1e-6, 1e6, 10_000);
            let (_, sup) = grid_max(
                |rho| {
                    let k = kernel_primitive(params, 1.0, rho)
                        .expect("kernel quadrature on a smooth bounded integrand");
                    k * rho.powf(-tau)
                },
                &g,
            );
            Ok(sup)
        }
        Weight::Step { body } => {
            let v0 = body.piece_values().first().copied().unwrap_or(body.tail_value());
            // locally-constant weights behave like τ = 1 at both ends:
            // q1 > 1 diverges at r → 0, finite mass diverges at r → ∞,
            // and a weight vanishing near 0 diverges against the kernel
            if params.q1 > 1.0 || body.tail_value() == 0.0 || v0 == 0.0 {
                return Ok(f64::INFINITY);
            }
            let grid = weight_grid(w, 100);
            let wv: Vec<f64> = grid.iter().map(|&t| w_eval(w, t)).collect();
            // kernel value by index difference on the uniform log grid
            let n = grid.len();
            let mut kern = vec![0.0; 2 * n - 1];
            for (d, k) in kern.iter_mut().enumerate() {
                let rho = (grid[1] / grid[0]).powi(d as i32 - (n as i32 - 1));
                *k = kernel_primitive(params, 1.0, rho)?;
            }
            let mut best = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if wv[j] == 0.0 {
                        continue;
                    }
                    let v = kern[j + n - 1 - i] * wv[i] / wv[j];
                    if v > best {
                        best = v;
                    }
                }
            }
            Ok(best)
        }
    }
}

/// ‖f‖_{Λ^{p,q}(ω)} for a step function f:
///   q < ∞: (∫_0^∞ f*(s)^q W(s)^{q/p - 1} ω(s) ds)^{1/q}
///   q = ∞: sup_t f*(t) W(t)^{1/p}
/// The q < ∞ integral is exact for every exponent: on each piece of f* the
/// substitution dW = ω ds gives (p/q)·[W^{q/p}] at the endpoints.
pub fn lorentz_norm(f: &StepFunction, w: &Weight, p: f64, q: f64) -> Result<f64> {
    assert!(p > 0.0 && q > 0.0);
    let fstar = if f.is_non_increasing() && f.tail_value() == 0.0 {
        f.clone()
    } else {
        f.rearrange()?
    };
    let bps = fstar.breakpoints();
    if q.is_infinite() {
        let mut best = 0.0f64;
        for i in 0..fstar.piece_values().len() {
            // W is continuous, so the sup over [b_i, b_{i+1}) sits at the
            // right endpoint
            best = best.max(fstar.piece_values()[i] * w_eval(w, bps[i + 1]).powf(1.0 / p));
        }
        Ok(best)
    } else {
        let mut acc = 0.0;
        for i in 0..fstar.piece_values().len() {
            let v = fstar.piece_values()[i];
            if v == 0.0 {
                continue;
            }
            let (wa, wb) = (
                if bps[i] == 0.0 { 0.0 } else { w_eval(w, bps[i]) },
                w_eval(w, bps[i + 1]),
            );
            acc += v.powf(q) * (p / q) * (wb.powf(q / p) - wa.powf(q / p));
        }
        Ok(acc.powf(1.0 / q))
    }
}

pub fn lorentz_norm_grid(
    f: &crate::stepfn::GridFunction,
    w: &Weight,
    p: f64,
    q: f64,
) -> Result<f64> {
    lorentz_norm(&f.rearrange(), w, p, q)
}

/// Both sides of the Calderón identity P(S(f*))(t) = S(f**)(t), computed by
/// genuinely different routes: the left side integrates pointwise
/// S-evaluations through an outer substitution σ = t e^{-s}; the right side
/// applies S to the exact running-average curve.
pub fn calderon_identity(
    params: &CalderonParams,
    fstar: &StepFunction,
    t: f64,
) -> Result<(f64, f64)> {
    assert!(t > 0.0);
    if !fstar.is_non_increasing() || fstar.tail_value() != 0.0 {
        return Err(Error::InvalidInput(
            "identity check expects a decreasing rearrangement".to_string(),
        ));
    }
    // lhs = (1/t)∫_0^t S(f*)(σ) dσ = ∫_0^∞ S(f*)(t e^{-s}) e^{-s} ds,
    // split where t e^{-s} crosses a breakpoint of f*
    let mut ss = vec![0.0];
    for &b in fstar.breakpoints() {
        if b > 0.0 && b < t {
            ss.push((t / b).ln());
        }
    }
    ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let integrand = |s: f64| -> f64 {
        s_op_curve(params, fstar, t * (-s).exp()).expect("inner S quadrature") * (-s).exp()
    };
    let mut lhs = 0.0;
    for w in ss.windows(2) {
        lhs += quad::integrate(&integrand, w[0], w[1], 1e-9)?;
    }
    lhs += quad::integrate_to_infinity(&integrand, *ss.last().unwrap(), 4.0, 1e-9)?;
    let rhs = s_op_curve(params, &RunningAverage::new(fstar.clone())?, t)?;
    Ok((lhs, rhs))
}

/// Batch form of [`calderon_identity`] over an ascending t-grid. The left
/// side accumulates A(t) = ∫_0^t S(f*)(σ) dσ incrementally — the improper
/// head once (through the σ = t e^{-s} substitution), then one finite
/// σ-segment per grid step — instead of restarting the outer integral at
/// every point.
pub fn calderon_identity_profile(
    params: &CalderonParams,
    fstar: &StepFunction,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>> {
    assert!(!ts.is_empty() && ts[0] > 0.0 && ts.windows(2).all(|w| w[1] > w[0]));
    if !fstar.is_non_increasing() || fstar.tail_value() != 0.0 {
        return Err(Error::InvalidInput(
            "identity check expects a decreasing rearrangement".to_string(),
        ));
    }
    let avg = RunningAverage::new(fstar.clone())?;
    let sigma_integrand = |sigma: f64| -> f64 {
        s_op_curve(params, fstar, sigma).expect("inner S quadrature")
    };
    // head: A(ts[0]) by the same substituted route as the single-point form
    let t0 = ts[0];
    let mut ss = vec![0.0];
    for &b in fstar.breakpoints() {
        if b > 0.0 && b < t0 {
            ss.push((t0 / b).ln());
        }
    }
    ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sub_integrand =
        |s: f64| -> f64 { sigma_integrand(t0 * (-s).exp()) * (-s).exp() };
    let mut a = 0.0;
    for w in ss.windows(2) {
        a += quad::integrate(&sub_integrand, w[0], w[1], 1e-9)?;
    }
    a += quad::integrate_to_infinity(&sub_integrand, *ss.last().unwrap(), 4.0, 1e-9)?;
    a *= t0;
    let mut out = Vec::with_capacity(ts.len());
    out.push((a / t0, s_op_curve(params, &avg, t0)?));
    for w in ts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // split the segment at breakpoints of f* so the integrand is smooth
        let mut cuts = vec![lo];
        for &b in fstar.breakpoints() {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.push(hi);
        for c in cuts.windows(2) {
            a += quad::integrate(&sigma_integrand, c[0], c[1], 1e-9)?;
        }
        out.push((a / hi, s_op_curve(params, &avg, hi)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn params(q1: f64, q2: f64, gamma: f64) -> CalderonParams {
        CalderonParams::new(q1, q2, AdmissibleFunction::power(gamma)).unwrap()
    }

    #[test]
    fn p_op_examples() {
        let chi = StepFunction::indicator(1.0);
        assert!((p_op(1.0, &chi, 2.0) - 0.5).abs() < 1e-15);
        let c = StepFunction::new(vec![0.0, 5.0], vec![3.0], 0.0).unwrap();
        assert!((p_op(1.0, &c, 2.0) - 3.0).abs() < 1e-15);
        assert!((p_op(2.0, &chi, 4.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_op_examples() {
        let chi = StepFunction::indicator(1.0);
        let x = AdmissibleFunction::power(1.0);
        let x2 = AdmissibleFunction::power(2.0);
        // weight collapses to 1/s: ∫_{1/e}^1 ds/s = 1
        let v = q_op(f64::INFINITY, &x, &chi, 1.0 / E).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        // φ = x²: ∫_0^1 (1+u) du = 3/2
        let v = q_op(f64::INFINITY, &x2, &chi, 1.0 / E).unwrap();
        assert!((v - 1.5).abs() < 1e-9);
        let zero = StepFunction::new(vec![0.0, 1.0], vec![0.0], 0.0).unwrap();
        assert_eq!(q_op(f64::INFINITY, &x, &zero, 0.5).unwrap(), 0.0);
        // past the support Q vanishes
        assert_eq!(q_op(2.0, &x, &chi, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn q_op_integer_power_oracles() {
        // q2 = ∞, φ = x^m on χ_[0,1): ∫_0^L (1+u)^{m-1} du = ((1+L)^m - 1)/m
        let chi = StepFunction::indicator(1.0);
        for m in [1u32, 3, 6] {
            let phi = AdmissibleFunction::power(m as f64);
            for t in [0.01, 0.2, 0.9] {
                let big_l = (1.0f64 / t).ln();
                let oracle = ((1.0 + big_l).powi(m as i32) - 1.0) / m as f64;
                let v = q_op(f64::INFINITY, &phi, &chi, t).unwrap();
                assert!((v - oracle).abs() <= 1e-8 * oracle.max(1.0), "m={m} t={t}");
            }
        }
        // q2 = 2, φ = x on χ_[0,1): ∫_0^L (1+u)e^{u/2} du = 2(L-1)e^{L/2}+4...
        // by parts: [2(1+u)e^{u/2}]_0^L - 2∫e^{u/2} = 2(1+L)e^{L/2} - 2 - 4(e^{L/2}-1)
        let phi = AdmissibleFunction::power(1.0);
        for t in [0.05f64, 0.5] {
            let l = (1.0 / t).ln();
            let oracle = 2.0 * (1.0 + l) * (l / 2.0).exp() - 2.0 - 4.0 * ((l / 2.0).exp() - 1.0);
            let v = q_op(2.0, &phi, &chi, t).unwrap();
            assert!((v - oracle).abs() <= 1e-8 * oracle.max(1.0), "t={t}");
        }
    }

    #[test]
    fn s_op_examples() {
        let pr = params(1.0, f64::INFINITY, 1.0);
        let chi = StepFunction::indicator(1.0);
        for t in [0.1, 0.5, 0.9] {
            let v = s_op(&pr, &chi, t).unwrap();
            assert!((v - (1.0 + (1.0f64 / t).ln())).abs() < 1e-9, "t={t}");
        }
        for t in [1.0, 2.5, 10.0] {
            let v = s_op(&pr, &chi, t).unwrap();
            assert!((v - 1.0 / t).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn s_op_decreasing_on_decreasing_input() {
        let pr = params(1.5, 4.0, 2.0);
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 0.5], 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for t in log_grid(0.01, 100.0, 40) {
            let v = s_op(&pr, &f, t).unwrap();
            assert!(v <= prev * (1.0 + 1e-9));
            prev = v;
        }
    }

    #[test]
    fn kernel_examples() {
        let pr = params(1.0, f64::INFINITY, 1.0);
        assert_eq!(kernel_primitive(&pr, 3.0, 3.0).unwrap(), 1.0);
        assert_eq!(kernel_primitive(&pr, 3.0, 1.5).unwrap(), 0.5);
        let v = kernel_primitive(&pr, 1.0, E).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let pr2 = params(2.0, f64::INFINITY, 1.0);
        assert!((kernel_primitive(&pr2, 4.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // non-decreasing in r
        let mut prev = 0.0;
        for r in log_grid(0.01, 100.0, 50) {
            let v = kernel_primitive(&pr, 1.0, r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn ak_norm_power_examples() {
        let pr = params(1.0, f64::INFINITY, 1.0);
        // sup over ρ of (1+log ρ)ρ^{-τ} is (1/τ)e^{τ-1} for ρ ≥ 1
        let v = ak_norm(&pr, &Weight::power(1.0).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
        let v = ak_norm(&pr, &Weight::power(0.25).unwrap()).unwrap();
        let oracle = 4.0 * (-0.75f64).exp();
        assert!((v - oracle).abs() < 1e-4 * oracle);
        assert!(v <= 4.0); // within max{1, φ([ω]_{B*_∞})} = 4
        // τ = 2 is outside B_1^R: divergence at r → 0
        let v = ak_norm(&pr, &Weight::power(2.0).unwrap()).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn ak_norm_step_weight() {
        let pr = params(1.0, f64::INFINITY, 1.0);
        // ω = 2 on [0,1), 1 beyond: locally constant, positive tail
        let w = Weight::step(StepFunction::new(vec![0.0, 1.0], vec![2.0], 1.0).unwrap());
        let v = ak_norm(&pr, &w).unwrap();
        assert!(v.is_finite() && v >= 1.0);
        // finite mass diverges
        let w = Weight::step(StepFunction::indicator(1.0));
        assert!(ak_norm(&pr, &w).unwrap().is_infinite());
    }

    #[test]
    fn kernel_comparable_to_phi_envelope() {
        // for r well past t, ∫_0^r k ≍ φ(1+log(r/t))·(r/t)^{1/q2}
        for pr in [params(1.0, f64::INFINITY, 1.0), params(1.0, 2.0, 1.0), params(2.0, 4.0, 2.0)] {
            for l in [2.0f64, 5.0, 10.0] {
                let rho = l.exp();
                let k = kernel_primitive(&pr, 1.0, rho).unwrap();
                let env = pr.phi.eval(1.0 + l)
                    * if pr.q2.is_infinite() { 1.0 } else { rho.powf(1.0 / pr.q2) };
                let ratio = k / env;
                assert!(ratio > 0.05 && ratio < 20.0, "ratio={ratio}");
            }
        }
    }

    #[test]
    fn lorentz_examples() {
        let chi = StepFunction::indicator(1.0);
        let lebesgue = Weight::power(1.0).unwrap();
        assert!((lorentz_norm(&chi, &lebesgue, 1.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!((lorentz_norm(&chi, &lebesgue, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let w = Weight::power(0.5).unwrap();
        assert!((lorentz_norm(&chi, &w, 1.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weak_never_exceeds_strong() {
        let f = StepFunction::new(vec![0.0, 0.5, 2.0, 3.0], vec![3.0, 1.0, 0.25], 0.0).unwrap();
        for w in [Weight::power(1.0).unwrap(), Weight::power(0.5).unwrap()] {
            for p in [0.5, 1.0, 2.0] {
                let weak = lorentz_norm(&f, &w, p, f64::INFINITY).unwrap();
                let strong = lorentz_norm(&f, &w, p, p).unwrap();
                assert!(weak <= strong * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn classical_calderon_identity() {
        // (1,∞,x) on χ: lhs and rhs both equal closed forms
        let pr = params(1.0, f64::INFINITY, 1.0);
        let chi = StepFunction::indicator(1.0);
        let (lhs, rhs) = calderon_identity(&pr, &chi, 0.5).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * rhs);
        let f = StepFunction::new(vec![0.0, 1.0, 4.0], vec![2.0, 0.5], 0.0).unwrap();
        for t in [0.2, 1.0, 3.0, 20.0] {
            let (lhs, rhs) = calderon_identity(&pr, &f, t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-7 * rhs.max(1e-12), "t={t}");
        }
        let pr = params(1.5, 3.0, 2.0);
        for t in [0.3, 2.0, 8.0] {
            let (lhs, rhs) = calderon_identity(&pr, &f, t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-7 * rhs.max(1e-12), "t={t}");
        }
    }

    #[test]
    fn double_star_matches_running_average_curve() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0], 0.0).unwrap();
        let fss = RunningAverage::new(f.clone()).unwrap();
        for s in [0.5, 1.0, 2.0, 3.0, 10.0] {
            assert!((fss.eval(s) - fss.eval_at(s)).abs() < 1e-14, "s={s}");
        }
    }
}
