//! Exact piecewise-constant functions on the half line and on the real line:
//! distribution functions, decreasing rearrangements and running averages.
//!
//! [`StepFunction`] is the universal carrier for rearrangements `f*` and
//! weights: a nonnegative step function on `(0, ∞)` with finitely many
//! breakpoints and a constant tail. [`GridFunction`] is a real-valued step
//! function on a uniform grid of a finite interval, zero outside; it is the
//! input type for the concrete operators. All integrals are computed in
//! closed form per piece, so equimeasurability and the Calderón identities
//! hold exactly up to float rounding.

use crate::error::{Error, Result};

/// Lebesgue measure of a level set; infinite when a positive tail exceeds
/// the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Finite(f64),
    Infinite,
}

impl Measure {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Measure::Infinite)
    }

    /// Finite value, panicking on an infinite measure.
    pub fn expect_finite(&self) -> f64 {
        match self {
            Measure::Finite(v) => *v,
            Measure::Infinite => panic!("expected a finite measure"),
        }
    }
}

/// Nonnegative step function on `(0, ∞)`.
///
/// `breakpoints[0] == 0`; `piece_values[i]` is the value on
/// `[breakpoints[i], breakpoints[i+1])`; `tail_value` is the value on
/// `[breakpoints.last(), ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    piece_values: Vec<f64>,
    tail_value: f64,
    /// prefix[i] = ∫_0^{breakpoints[i]} f
    prefix: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, piece_values: Vec<f64>, tail_value: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints[0] != 0.0 {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0".to_string(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".to_string(),
            ));
        }
        if piece_values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} piece values, got {}",
                breakpoints.len() - 1,
                piece_values.len()
            )));
        }
        let ok = |v: &f64| v.is_finite() && *v >= 0.0;
        if !piece_values.iter().all(ok) || !ok(&tail_value) || !breakpoints.iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidInput(
                "values must be finite and nonnegative".to_string(),
            ));
        }
        let mut prefix = Vec::with_capacity(breakpoints.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for i in 0..piece_values.len() {
            acc += piece_values[i] * (breakpoints[i + 1] - breakpoints[i]);
            prefix.push(acc);
        }
        Ok(StepFunction {
            breakpoints,
            piece_values,
            tail_value,
            prefix,
        })
    }

    /// Characteristic function of `[0, width)`.
    pub fn indicator(width: f64) -> Self {
        StepFunction::new(vec![0.0, width], vec![1.0], 0.0).unwrap()
    }

    /// Step function from `(value, width)` blocks laid out from 0.
    pub fn from_blocks(blocks: &[(f64, f64)], tail_value: f64) -> Result<Self> {
        let mut bps = vec![0.0];
        let mut vals = Vec::with_capacity(blocks.len());
        let mut x = 0.0;
        for &(v, w) in blocks {
            x += w;
            bps.push(x);
            vals.push(v);
        }
        StepFunction::new(bps, vals, tail_value)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn piece_values(&self) -> &[f64] {
        &self.piece_values
    }

    pub fn tail_value(&self) -> f64 {
        self.tail_value
    }

    /// Last breakpoint; the function equals `tail_value` beyond it.
    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Right-continuous evaluation at `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        assert!(t >= 0.0 && t.is_finite());
        match self.breakpoints.partition_point(|&b| b <= t) {
            i if i >= self.breakpoints.len() => self.tail_value,
            i => self.piece_values[i - 1],
        }
    }

    /// Exact ∫_0^t f, including the constant tail when `t > end()`.
    pub fn integral_to(&self, t: f64) -> f64 {
        assert!(t >= 0.0);
        if t >= self.end() {
            return self.prefix[self.prefix.len() - 1] + self.tail_value * (t - self.end());
        }
        let i = self.breakpoints.partition_point(|&b| b <= t) - 1;
        self.prefix[i] + self.piece_values[i] * (t - self.breakpoints[i])
    }

    /// Total mass ∫_0^∞ f; infinite when the tail is positive.
    pub fn total_integral(&self) -> Measure {
        if self.tail_value > 0.0 {
            Measure::Infinite
        } else {
            Measure::Finite(self.prefix[self.prefix.len() - 1])
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        self.piece_values.windows(2).all(|w| w[1] <= w[0])
            && self
                .piece_values
                .last()
                .map_or(true, |&v| self.tail_value <= v)
    }

    /// λ_f(y) = |{f > y}|, summed per run of adjacent qualifying pieces so
    /// that prefix level sets come out as a single exact difference.
    pub fn distribution(&self, y: f64) -> Measure {
        assert!(y >= 0.0);
        if self.tail_value > y {
            return Measure::Infinite;
        }
        let mut total = 0.0;
        let mut run_start: Option<usize> = None;
        for i in 0..self.piece_values.len() {
            if self.piece_values[i] > y {
                run_start.get_or_insert(i);
            } else if let Some(s) = run_start.take() {
                total += self.breakpoints[i] - self.breakpoints[s];
            }
        }
        if let Some(s) = run_start {
            total += self.end() - self.breakpoints[s];
        }
        Measure::Finite(total)
    }

    /// Decreasing rearrangement. Blocks of equal value keep their input
    /// order, which is observationally irrelevant; a positive tail is
    /// rejected since such a function is not rearrangeable onto `(0, ∞)`.
    pub fn rearrange(&self) -> Result<StepFunction> {
        if self.tail_value > 0.0 {
            return Err(Error::NonRearrangeableTail(self.tail_value));
        }
        let mut blocks: Vec<(f64, f64)> = self
            .piece_values
            .iter()
            .zip(self.breakpoints.windows(2))
            .filter(|(v, _)| **v > 0.0)
            .map(|(v, w)| (*v, w[1] - w[0]))
            .collect();
        blocks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        StepFunction::from_blocks(&merge_equal(blocks), 0.0)
    }
}

fn merge_equal(blocks: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(blocks.len());
    for (v, w) in blocks {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// f**(t) = (1/t) ∫_0^t f*(s) ds, exact per piece.
pub fn double_star(fstar: &StepFunction, t: f64) -> f64 {
    assert!(t > 0.0, "double_star requires t > 0");
    debug_assert!(fstar.is_non_increasing());
    fstar.integral_to(t) / t
}

/// The running average s ↦ f**(s) as an evaluable curve. Beyond the support
/// of `f*` it equals `total/s` exactly.
#[derive(Debug, Clone)]
pub struct RunningAverage {
    fstar: StepFunction,
}

impl RunningAverage {
    pub fn new(fstar: StepFunction) -> Result<Self> {
        if fstar.tail_value() > 0.0 {
            return Err(Error::NonRearrangeableTail(fstar.tail_value()));
        }
        if !fstar.is_non_increasing() {
            return Err(Error::InvalidInput(
                "running average requires a non-increasing step function".to_string(),
            ));
        }
        Ok(RunningAverage { fstar })
    }

    pub fn fstar(&self) -> &StepFunction {
        &self.fstar
    }

    pub fn total(&self) -> f64 {
        self.fstar.total_integral().expect_finite()
    }

    pub fn eval(&self, s: f64) -> f64 {
        double_star(&self.fstar, s)
    }
}

/// Real-valued step function on a uniform grid of `[left, left + n·width)`,
/// zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    left: f64,
    width: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(left: f64, width: f64, values: Vec<f64>) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !left.is_finite() {
            return Err(Error::InvalidInput(
                "cell width must be positive and finite".to_string(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("cell values must be finite".to_string()));
        }
        Ok(GridFunction { left, width, values })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn right(&self) -> f64 {
        self.left + self.width * self.values.len() as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.left {
            return 0.0;
        }
        let i = ((x - self.left) / self.width).floor() as usize;
        if i < self.values.len() {
            self.values[i]
        } else {
            0.0
        }
    }

    /// Measure of `{f != 0}`, exact as count × width.
    pub fn support_measure(&self) -> f64 {
        self.values.iter().filter(|v| **v != 0.0).count() as f64 * self.width
    }

    /// λ_f(y) = |{|f| > y}|: count of qualifying cells × width.
    pub fn distribution(&self, y: f64) -> Measure {
        assert!(y >= 0.0);
        let n = self.values.iter().filter(|v| v.abs() > y).count();
        Measure::Finite(n as f64 * self.width)
    }

    /// Decreasing rearrangement of `|f|`: cells sorted by descending
    /// absolute value, breakpoints at exact multiples of the cell width.
    pub fn rearrange(&self) -> StepFunction {
        let mut vals: Vec<f64> = self
            .values
            .iter()
            .map(|v| v.abs())
            .filter(|v| *v > 0.0)
            .collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // breakpoints as k·width so level-set measures match the cell count
        // products bit for bit
        let mut bps = vec![0.0];
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < vals.len() {
            let mut j = i + 1;
            while j < vals.len() && vals[j] == vals[i] {
                j += 1;
            }
            bps.push(j as f64 * self.width);
            pieces.push(vals[i]);
            i = j;
        }
        StepFunction::new(bps, pieces, 0.0).unwrap()
    }
}

/// Level-set measure of either carrier type at height `y >= 0`.
pub fn distribution_function(f: &dyn Distribution, y: f64) -> Measure {
    f.distribution_at(y)
}

/// Object-safe view over the two carrier types for distribution queries.
pub trait Distribution {
    fn distribution_at(&self, y: f64) -> Measure;
}

impl Distribution for StepFunction {
    fn distribution_at(&self, y: f64) -> Measure {
        self.distribution(y)
    }
}

impl Distribution for GridFunction {
    fn distribution_at(&self, y: f64) -> Measure {
        self.distribution(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blocks() -> StepFunction {
        // 2 on [0,1), 0 on [1,3), 1 on [3,5)
        StepFunction::new(vec![0.0, 1.0, 3.0, 5.0], vec![2.0, 0.0, 1.0], 0.0).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let f = two_blocks();
        assert_eq!(f.distribution(1.5), Measure::Finite(1.0));
        let chi = StepFunction::indicator(1.0);
        assert_eq!(chi.distribution(0.0), Measure::Finite(1.0));
        // tail above the level is reported as an infinite measure
        let w = StepFunction::new(vec![0.0, 1.0], vec![2.0], 1.0).unwrap();
        assert!(w.distribution(0.5).is_infinite());
        assert_eq!(w.distribution(1.5), Measure::Finite(1.0));
    }

    #[test]
    fn rearrange_examples() {
        let chi = GridFunction::new(3.0, 0.5, vec![1.0, 1.0]).unwrap(); // χ_[3,4)
        let r = chi.rearrange();
        assert_eq!(r.breakpoints(), &[0.0, 1.0]);
        assert_eq!(r.piece_values(), &[1.0]);

        let f = two_blocks();
        let r = f.rearrange().unwrap();
        assert_eq!(r.breakpoints(), &[0.0, 1.0, 3.0]);
        assert_eq!(r.piece_values(), &[2.0, 1.0]);
    }

    #[test]
    fn rearrange_rejects_positive_tail() {
        let w = StepFunction::new(vec![0.0, 1.0], vec![2.0], 1.0).unwrap();
        assert!(matches!(
            w.rearrange(),
            Err(Error::NonRearrangeableTail(_))
        ));
    }

    #[test]
    fn double_star_examples() {
        let chi = StepFunction::indicator(1.0);
        assert_eq!(double_star(&chi, 2.0), 0.5);
        assert_eq!(double_star(&chi, 0.5), 1.0);
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0], 0.0).unwrap();
        assert_eq!(double_star(&f, 2.0), 1.5);
    }

    #[test]
    fn running_average_tail_is_total_over_s() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0], 0.0).unwrap();
        let fss = RunningAverage::new(f).unwrap();
        assert_eq!(fss.total(), 4.0);
        assert!((fss.eval(8.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn double_star_rejects_nonpositive_t() {
        double_star(&StepFunction::indicator(1.0), 0.0);
    }
}
