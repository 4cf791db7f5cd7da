//! Concrete desk-scale operators: the 1-D non-centered Hardy–Littlewood
//! maximal operator and dyadic sparse operators on [0,1).
//!
//! Everything about M is exact. Writing G_y(x) = ∫_{-∞}^x |f| − yx, a point
//! satisfies Mf(x) > y exactly when max_{b ≥ x} G_y(b) > min_{a ≤ x} G_y(a),
//! and G_y is piecewise linear, so the level-set measure |{Mf > y}| comes
//! out in closed form per cell. The rearrangement (Mf)* then needs only a
//! bisection in y.

use crate::error::{Error, Result};
use crate::stepfn::GridFunction;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Exact Mf(x) = sup over windows [a,b] ∋ x of the average of |f|.
/// The average is monotone in each endpoint between breakpoints, so the
/// optimum has endpoints among the grid edges and x itself.
pub fn maximal_value(f: &GridFunction, x: f64) -> f64 {
    let m = f.values().len();
    let w = f.width();
    let edge = |i: usize| f.left() + w * i as f64;
    // prefix integrals of |f| at the edges
    let mut pf = vec![0.0];
    for v in f.values() {
        pf.push(pf.last().unwrap() + v.abs() * w);
    }
    let fx = |p: f64| -> f64 {
        if p <= f.left() {
            0.0
        } else if p >= f.right() {
            pf[m]
        } else {
            let i = ((p - f.left()) / w).floor() as usize;
            let i = i.min(m - 1);
            pf[i] + f.values()[i].abs() * (p - edge(i))
        }
    };
    let mut lo: Vec<f64> = (0..=m).map(edge).filter(|&e| e <= x).collect();
    lo.push(x);
    let mut hi: Vec<f64> = (0..=m).map(edge).filter(|&e| e >= x).collect();
    hi.push(x);
    let mut best = 0.0f64;
    for &a in &lo {
        for &b in &hi {
            if b > a {
                best = best.max((fx(b) - fx(a)) / (b - a));
            }
        }
    }
    best
}

/// Mf sampled exactly at the centers of a `refine`-times finer grid over
/// the support interval of `f`.
pub fn hl_maximal(f: &GridFunction, refine: usize) -> Result<GridFunction> {
    assert!(refine >= 1);
    if f.values().iter().all(|v| *v == 0.0) {
        return Err(Error::EmptySupport);
    }
    let n = f.values().len() * refine;
    let w = f.width() / refine as f64;
    let vals: Vec<f64> = (0..n)
        .map(|i| maximal_value(f, f.left() + (i as f64 + 0.5) * w))
        .collect();
    GridFunction::new(f.left(), w, vals)
}

/// Exact |{Mf > y}| for y > 0, in O(cells) time.
pub fn maximal_distribution(f: &GridFunction, y: f64) -> f64 {
    assert!(y > 0.0);
    let m = f.values().len();
    let w = f.width();
    let (l, r) = (f.left(), f.right());
    // G at the grid edges
    let mut g = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    g.push(-y * l);
    for (i, v) in f.values().iter().enumerate() {
        acc += v.abs() * w;
        g.push(acc - y * (l + w * (i + 1) as f64));
    }
    let total = acc;
    // suffix max / prefix min of G over the edges
    let mut smax = vec![f64::NEG_INFINITY; m + 2];
    for i in (0..=m).rev() {
        smax[i] = g[i].max(smax[i + 1]);
    }
    let mut pmin = vec![f64::INFINITY; m + 1];
    let mut run = f64::INFINITY;
    for i in 0..=m {
        run = run.min(g[i]);
        pmin[i] = run;
    }
    let mut measure = 0.0;
    // inside a cell G is linear; the condition fails exactly on
    // {x : smax_next ≤ G(x) ≤ pmin_cur}
    for i in 0..m {
        let (ga, gb) = (g[i], g[i + 1]);
        let (s, p) = (smax[i + 1], pmin[i]);
        if s > p {
            measure += w;
            continue;
        }
        let (glo, ghi) = if ga <= gb { (ga, gb) } else { (gb, ga) };
        let blocked = if ghi == glo {
            if s <= glo && glo <= p {
                w
            } else {
                0.0
            }
        } else {
            let cover = (ghi.min(p) - glo.max(s)).max(0.0);
            w * cover / (ghi - glo)
        };
        measure += w - blocked;
    }
    // left of the grid G(x) = -yx: qualifies where G(x) < max_{b ≥ L} G(b)
    measure += (l + smax[0] / y).max(0.0);
    // right of the grid G(x) = total - yx: qualifies where G(x) > min_{a ≤ R} G(a)
    measure += ((total - pmin[m]) / y - r).max(0.0);
    measure
}

/// (Mf)* evaluated by bisecting the exact distribution function.
#[derive(Debug, Clone)]
pub struct MaximalRearrangement {
    f: GridFunction,
    ymax: f64,
}

impl MaximalRearrangement {
    pub fn new(f: &GridFunction) -> Result<Self> {
        if f.values().iter().all(|v| *v == 0.0) {
            return Err(Error::EmptySupport);
        }
        let ymax = f.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(MaximalRearrangement { f: f.clone(), ymax })
    }

    /// (Mf)*(t) = inf { y > 0 : |{Mf > y}| ≤ t }.
    pub fn eval(&self, t: f64) -> f64 {
        assert!(t > 0.0);
        let (mut lo, mut hi) = (0.0f64, self.ymax);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if maximal_distribution(&self.f, mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// One cube of an η-sparse dyadic family on [0,1): the interval
/// [index·2^{-level}, (index+1)·2^{-level}), with E_Q given as indices of
/// depth-level cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseCube {
    pub level: u32,
    pub index: u64,
    pub e_cells: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub depth: u32,
    pub eta: f64,
    pub cubes: Vec<SparseCube>,
}

/// Deterministic η-sparse family. Each included cube reserves the leftmost
/// η-fraction of its still-free finest cells as E_Q, and recursion only
/// descends into children lying entirely beyond the reserved region; for
/// η ≤ 1/2 the right child always qualifies, so the invariants hold by
/// construction at every depth.
pub fn sparse_generate(depth: u32, eta: f64, seed: u64) -> Result<SparseFamily> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InfeasibleSparse(format!(
            "eta = {eta} not in (0, 1/2]"
        )));
    }
    if depth > 24 {
        return Err(Error::InfeasibleSparse(format!("depth {depth} too large")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cubes = Vec::new();
    build(0, 0, 0, depth, eta, &mut rng, &mut cubes);
    Ok(SparseFamily { depth, eta, cubes })
}

const INCLUDE_PROB: f64 = 0.85;

fn build(
    level: u32,
    index: u64,
    bound: u64,
    depth: u32,
    eta: f64,
    rng: &mut ChaCha8Rng,
    cubes: &mut Vec<SparseCube>,
) {
    let size = 1u64 << (depth - level);
    let start = index * size;
    if start < bound {
        return; // overlaps an ancestor's reserved cells
    }
    let include = level == 0 || rng.random::<f64>() < INCLUDE_PROB;
    let mut new_bound = bound;
    if include {
        let reserve = ((eta * size as f64).ceil() as u64).clamp(1, size);
        cubes.push(SparseCube {
            level,
            index,
            e_cells: (start..start + reserve).collect(),
        });
        new_bound = start + reserve;
    }
    if level < depth {
        build(level + 1, 2 * index, new_bound, depth, eta, rng, cubes);
        build(level + 1, 2 * index + 1, new_bound, depth, eta, rng, cubes);
    }
}

/// Independent brute-force validation over finest-level cells: E_Q within
/// its cube and of measure ≥ η|Q|, pairwise disjoint E's, cubes pairwise
/// nested or disjoint. Pure integer arithmetic.
pub fn sparse_validate(family: &SparseFamily) -> Result<()> {
    let n = 1u64 << family.depth;
    let mut used = vec![false; n as usize];
    for c in &family.cubes {
        if c.level > family.depth || c.index >= (1u64 << c.level) {
            return Err(Error::InfeasibleSparse(format!(
                "cube ({}, {}) outside the grid",
                c.level, c.index
            )));
        }
        let size = 1u64 << (family.depth - c.level);
        let start = c.index * size;
        let need = family.eta * size as f64;
        if (c.e_cells.len() as f64) < need - 1e-9 {
            return Err(Error::InfeasibleSparse(format!(
                "cube ({}, {}) has |E| = {} < eta·|Q| = {need}",
                c.level,
                c.index,
                c.e_cells.len()
            )));
        }
        for &cell in &c.e_cells {
            if cell < start || cell >= start + size {
                return Err(Error::InfeasibleSparse(format!(
                    "E-cell {cell} outside cube ({}, {})",
                    c.level, c.index
                )));
            }
            if used[cell as usize] {
                return Err(Error::InfeasibleSparse(format!(
                    "E-cell {cell} claimed twice"
                )));
            }
            used[cell as usize] = true;
        }
    }
    for (i, a) in family.cubes.iter().enumerate() {
        let (sa, ea) = cube_span(family.depth, a);
        for b in family.cubes.iter().skip(i + 1) {
            let (sb, eb) = cube_span(family.depth, b);
            let disjoint = ea <= sb || eb <= sa;
            let nested = (sa <= sb && eb <= ea) || (sb <= sa && ea <= eb);
            if !disjoint && !nested {
                return Err(Error::InfeasibleSparse(format!(
                    "cubes ({}, {}) and ({}, {}) overlap without nesting",
                    a.level, a.index, b.level, b.index
                )));
            }
        }
    }
    Ok(())
}

fn cube_span(depth: u32, c: &SparseCube) -> (u64, u64) {
    let size = 1u64 << (depth - c.level);
    (c.index * size, (c.index + 1) * size)
}

/// A_S f = Σ_Q (avg_Q f) χ_Q, exact on a dyadic-aligned grid of [0,1).
pub fn sparse_apply(family: &SparseFamily, f: &GridFunction) -> Result<GridFunction> {
    let n = f.values().len();
    if (f.left() - 0.0).abs() > 1e-12 || (f.right() - 1.0).abs() > 1e-12 {
        return Err(Error::MisalignedGrid(format!(
            "expected [0,1), got [{}, {})",
            f.left(),
            f.right()
        )));
    }
    if !n.is_power_of_two() || n < (1usize << family.depth) {
        return Err(Error::MisalignedGrid(format!(
            "{n} cells cannot align with depth {}",
            family.depth
        )));
    }
    if f.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidInput(
            "sparse_apply requires f >= 0".to_string(),
        ));
    }
    let mut prefix = vec![0.0];
    for v in f.values() {
        prefix.push(prefix.last().unwrap() + v);
    }
    // accumulate cube averages with a difference array
    let mut diff = vec![0.0; n + 1];
    for c in &family.cubes {
        let cells = n >> c.level; // cells per cube at this grid
        let start = c.index as usize * cells;
        let avg = (prefix[start + cells] - prefix[start]) / cells as f64;
        diff[start] += avg;
        diff[start + cells] -= avg;
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for d in diff.iter().take(n) {
        acc += d;
        out.push(acc);
    }
    GridFunction::new(0.0, f.width(), out)
}
