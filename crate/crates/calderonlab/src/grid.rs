//! Log-spaced grids and one-dimensional extremum search.
//!
//! All suprema/infima in this crate follow the same recipe: evaluate on a
//! log-spaced grid, then run one golden-section refinement pass around the
//! best grid point. The searched targets are smooth and unimodal between
//! breakpoints, so this is accurate to the golden-section tolerance.

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `n` log-spaced points covering `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Log-spaced grid with a fixed density per decade.
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(2);
    log_grid(lo, hi, n + 1)
}

/// Maximum of `f` over the grid, refined by golden section around the best
/// grid point. Returns `(argmax, max)`.
pub fn grid_max(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (x, v) = golden_max(&f, lo, hi, 1e-6);
    if v > best {
        (x, v)
    } else {
        (grid[best_i], best)
    }
}

/// Minimum counterpart of [`grid_max`].
pub fn grid_min(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let (x, neg) = grid_max(|x| -f(x), grid);
    (x, -neg)
}

/// Golden-section maximization on `[lo, hi]` (log coordinates), relative
/// tolerance `tol` on the bracket width.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    assert!(lo > 0.0 && hi >= lo);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d.exp());
        }
    }
    let x = 0.5 * (a + b);
    (x.exp(), f(x.exp()))
}
