//! Turns the rearrangement estimates into checkable inequalities: maps the
//! named operator classes to their (q1, q2, φ) parameters, compares (Tf)*
//! against S_{q1,q2,φ}(f*) for concrete desk-scale operators over corpora,
//! and aggregates the empirical constants. The harness reports and never
//! asserts; thresholds live in the acceptance suite.

use crate::admissible::{inf_bound, AdmissibleFunction};
use crate::calderon::{s_op, CalderonParams};
use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::operators::{sparse_apply, sparse_generate, MaximalRearrangement, SparseFamily};
use crate::stepfn::{GridFunction, StepFunction};
use crate::weights::Weight;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Named operator classes with their parameter triples.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// Fefferman–Stein-type operators (e.g. the area function): (1, ∞, x).
    FeffermanStein,
    /// Operators with weak (1,1) norm C‖u‖_{A1}^k: (1, ∞, x^k).
    CzPower { k: u32 },
    /// Bochner–Riesz at the critical index and rough singular integrals,
    /// weak (2,2) constant quadratic in the A2 norm: (1, ∞, x²).
    BochnerRieszRough,
    /// Sparse operators: (1, ∞, x).
    Sparse,
    /// Multipliers with bounded dyadic variation, controlled by the 7-fold
    /// iterate of M: p0 = 2, α = 1, hypothesis power x⁷ — the q2 = ∞ tail
    /// weight displays as (1 + log s/t)⁶.
    MultiplierM7,
    /// The multiplier class with support/decay exponents (γ, β), γ > 2β > 0:
    /// p0 = 2, α = 2β/γ, and the transformed power is always x¹⁰.
    MultiplierClass { gamma: f64, beta: f64 },
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |key: &str| -> Result<f64> {
            for part in args.unwrap_or("").split([';', ',']) {
                if let Some((k, v)) = part.split_once('=') {
                    if k.trim() == key {
                        return v.trim().parse::<f64>().map_err(|e| {
                            Error::InvalidInput(format!("bad value for {key}: {e}"))
                        });
                    }
                }
            }
            Err(Error::InvalidInput(format!("preset {head} needs {key}=...")))
        };
        match head {
            "fefferman-stein" => Ok(Preset::FeffermanStein),
            "cz-power-k" => {
                let k = num("k")?;
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(Error::InvalidInput("k must be a positive integer".into()));
                }
                Ok(Preset::CzPower { k: k as u32 })
            }
            "bochner-riesz-rough" => Ok(Preset::BochnerRieszRough),
            "sparse" => Ok(Preset::Sparse),
            "multiplier-m7" => Ok(Preset::MultiplierM7),
            "multiplier-class" => Ok(Preset::MultiplierClass {
                gamma: num("gamma")?,
                beta: num("beta")?,
            }),
            other => Err(Error::InvalidInput(format!("unknown preset: {other}"))),
        }
    }
}

/// The (q1, q2, φ) triple fed to S for each preset. Where the (p0, α) map
/// applies, q1 = p0 and q2 = p0/(1−α); at α = 1 (q2 = ∞) the operator's
/// φ slot carries x·φ̃ because the q2 = ∞ form of Q divides by (1 + log).
pub fn preset_params(preset: &Preset) -> Result<CalderonParams> {
    let p = |g: f64| AdmissibleFunction::power(g);
    match preset {
        Preset::FeffermanStein | Preset::Sparse => {
            CalderonParams::new(1.0, f64::INFINITY, p(1.0))
        }
        Preset::CzPower { k } => CalderonParams::new(1.0, f64::INFINITY, p(*k as f64)),
        Preset::BochnerRieszRough => CalderonParams::new(1.0, f64::INFINITY, p(2.0)),
        Preset::MultiplierM7 => CalderonParams::new(2.0, f64::INFINITY, p(7.0)),
        Preset::MultiplierClass { gamma, beta } => {
            if !(*beta > 0.0 && *gamma > 2.0 * beta) {
                return Err(Error::InvalidInput(
                    "multiplier-class needs gamma > 2 beta > 0".to_string(),
                ));
            }
            let q2 = 2.0 * gamma / (gamma - 2.0 * beta);
            CalderonParams::new(2.0, q2, p(10.0))
        }
    }
}

/// Concrete operators the harness can run.
#[derive(Debug, Clone)]
pub enum OperatorInstance {
    Identity,
    HlMaximal,
    Sparse(SparseFamily),
}

impl OperatorInstance {
    pub fn id(&self) -> String {
        match self {
            OperatorInstance::Identity => "identity".to_string(),
            OperatorInstance::HlMaximal => "hl-maximal".to_string(),
            OperatorInstance::Sparse(f) => format!("sparse-d{}", f.depth),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub operator_id: String,
    pub function_id: String,
    pub q1: f64,
    /// "inf" or a number, kept textual so JSON stays faithful.
    pub q2: String,
    pub phi: String,
    pub t_grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub sup_ratio: f64,
    pub seed: u64,
    pub size: usize,
}

fn format_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".to_string()
    } else {
        q.to_string()
    }
}

/// Log-spaced t-grid of `points` points spanning `span_decades` decades on
/// each side of the support measure of f.
pub fn default_t_grid(support: f64, points: usize, span_decades: f64) -> Vec<f64> {
    assert!(support > 0.0);
    let factor = 10f64.powf(span_decades);
    log_grid(support / factor, support * factor, points)
}

/// Runs one (T, f, params) comparison over the t-grid: computes (Tf)*,
/// S(f*), and the ratio profile. Ratio at points where both sides vanish
/// is 0.
pub fn verify_instance(
    op: &OperatorInstance,
    f: &GridFunction,
    params: &CalderonParams,
    t_grid: &[f64],
    function_id: &str,
    seed: u64,
) -> Result<VerificationReport> {
    assert!(t_grid.windows(2).all(|w| w[1] > w[0]) && t_grid.iter().all(|t| *t > 0.0));
    let fstar = f.rearrange();
    // (Tf)* is rebuilt per point for sparse/identity (cheap step lookups);
    // the maximal operator keeps its bisection state across points
    let maximal = match op {
        OperatorInstance::HlMaximal => Some(MaximalRearrangement::new(f)?),
        _ => None,
    };
    let sparse_star = match op {
        OperatorInstance::Sparse(fam) => Some(sparse_apply(fam, f)?.rearrange()),
        _ => None,
    };
    let mut lhs = Vec::with_capacity(t_grid.len());
    let mut rhs = Vec::with_capacity(t_grid.len());
    let mut sup_ratio = 0.0f64;
    for &t in t_grid {
        let l = match op {
            OperatorInstance::Identity => fstar.eval(t),
            OperatorInstance::HlMaximal => maximal.as_ref().unwrap().eval(t),
            OperatorInstance::Sparse(_) => sparse_star.as_ref().unwrap().eval(t),
        };
        let r = s_op(params, &fstar, t)?;
        let ratio = if l == 0.0 {
            0.0
        } else if r == 0.0 {
            f64::INFINITY
        } else {
            l / r
        };
        sup_ratio = sup_ratio.max(ratio);
        lhs.push(l);
        rhs.push(r);
    }
    Ok(VerificationReport {
        operator_id: op.id(),
        function_id: function_id.to_string(),
        q1: params.q1,
        q2: format_q(params.q2),
        phi: params.phi.describe(),
        t_grid: t_grid.to_vec(),
        lhs,
        rhs,
        sup_ratio,
        seed,
        size: f.values().len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TGridPolicy {
    pub points: usize,
    pub span_decades: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Operator kinds: "identity", "hl-maximal", "sparse".
    pub operators: Vec<String>,
    /// Instances per operator kind.
    pub counts: usize,
    /// Base seed; instance i of operator k uses seeds + i.
    pub seeds: u64,
    /// [min_depth, max_depth] for sparse instances (cycled through).
    pub depth_range: [u32; 2],
    pub eta: f64,
    pub t_grid: TGridPolicy,
}

impl CorpusConfig {
    pub fn reference() -> Self {
        CorpusConfig {
            operators: vec![
                "identity".to_string(),
                "hl-maximal".to_string(),
                "sparse".to_string(),
            ],
            counts: 10,
            seeds: 2024,
            depth_range: [4, 8],
            eta: 0.5,
            t_grid: TGridPolicy {
                points: 64,
                span_decades: 3.0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorAggregate {
    pub operator: String,
    pub count: usize,
    pub max_sup_ratio: f64,
    pub median_sup_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub schema: u32,
    pub per_operator: Vec<OperatorAggregate>,
    pub instances: Vec<VerificationReport>,
    pub failures: Vec<String>,
}

/// Uniformly random positive step data on a dyadic grid of [0,1) with a
/// sprinkle of zero cells; deterministic in the seed.
pub fn random_grid_function(seed: u64, cells: usize) -> GridFunction {
    assert!(cells.is_power_of_two());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..cells)
        .map(|_| {
            if rng.random::<f64>() < 0.2 {
                0.0
            } else {
                rng.random::<f64>() * 4.0
            }
        })
        .collect();
    // ensure nonempty support
    let mut g = GridFunction::new(0.0, 1.0 / cells as f64, vals).unwrap();
    if g.values().iter().all(|v| *v == 0.0) {
        let mut vals = g.values().to_vec();
        vals[0] = 1.0;
        g = GridFunction::new(0.0, 1.0 / cells as f64, vals).unwrap();
    }
    g
}

/// Random non-increasing step function with zero tail (a synthetic f*),
/// spanning a few decades of scale.
pub fn random_decreasing_step(seed: u64) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = 2 + (rng.random::<f64>() * 6.0) as usize;
    let mut vals: Vec<f64> = (0..pieces)
        .map(|_| 10f64.powf(rng.random::<f64>() * 3.0 - 1.5))
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let widths: Vec<f64> = (0..pieces)
        .map(|_| 10f64.powf(rng.random::<f64>() * 3.0 - 1.5))
        .collect();
    let blocks: Vec<(f64, f64)> = vals.into_iter().zip(widths).collect();
    StepFunction::from_blocks(&blocks, 0.0).unwrap()
}

/// Random step weight with positive leading value and positive tail, so
/// every B*-constant is finite.
pub fn random_step_weight(seed: u64) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = 1 + (rng.random::<f64>() * 5.0) as usize;
    let blocks: Vec<(f64, f64)> = (0..pieces)
        .map(|_| {
            (
                10f64.powf(rng.random::<f64>() * 2.0 - 1.0),
                10f64.powf(rng.random::<f64>() * 2.0 - 1.0),
            )
        })
        .collect();
    let tail = 10f64.powf(rng.random::<f64>() * 2.0 - 1.0);
    Weight::step(StepFunction::from_blocks(&blocks, tail).unwrap())
}

/// Number of worker threads: CALDERONLAB_THREADS, defaulting to the rayon
/// default.
fn thread_count() -> Option<usize> {
    std::env::var("CALDERONLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
}

/// Runs the whole corpus. Instances are independent and evaluated in
/// parallel; assembly is keyed by instance index, so the output is
/// byte-identical across thread counts.
pub fn corpus_run(cfg: &CorpusConfig) -> AggregateReport {
    let mut tasks: Vec<(String, u64, u32)> = Vec::new();
    for op in &cfg.operators {
        for i in 0..cfg.counts {
            let depths = cfg.depth_range[1].max(cfg.depth_range[0]) - cfg.depth_range[0] + 1;
            let depth = cfg.depth_range[0] + (i as u32 % depths);
            tasks.push((op.clone(), cfg.seeds + i as u64, depth));
        }
    }
    let run_one = |(op_name, seed, depth): &(String, u64, u32)| -> std::result::Result<VerificationReport, String> {
        let label = format!("{op_name}/seed={seed}");
        let build = || -> Result<VerificationReport> {
            let (op, f, params) = match op_name.as_str() {
                "identity" => (
                    OperatorInstance::Identity,
                    random_grid_function(*seed, 64),
                    preset_params(&Preset::FeffermanStein)?,
                ),
                "hl-maximal" => (
                    OperatorInstance::HlMaximal,
                    random_grid_function(*seed, 64),
                    preset_params(&Preset::FeffermanStein)?,
                ),
                "sparse" => {
                    let fam = sparse_generate(*depth, cfg.eta, *seed)?;
                    (
                        OperatorInstance::Sparse(fam),
                        random_grid_function(*seed, 1usize << *depth),
                        preset_params(&Preset::Sparse)?,
                    )
                }
                other => {
                    return Err(Error::InvalidInput(format!("unknown operator: {other}")))
                }
            };
            let grid = default_t_grid(
                f.support_measure(),
                cfg.t_grid.points,
                cfg.t_grid.span_decades,
            );
            verify_instance(&op, &f, &params, &grid, &label, *seed)
        };
        build().map_err(|e| format!("{label}: {e}"))
    };
    let results: Vec<std::result::Result<VerificationReport, String>> = match thread_count() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| {
                use rayon::prelude::*;
                tasks.par_iter().map(run_one).collect()
            })
        }
        None => {
            use rayon::prelude::*;
            tasks.par_iter().map(run_one).collect()
        }
    };
    let mut instances = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rep) => instances.push(rep),
            Err(msg) => failures.push(msg),
        }
    }
    let mut per_operator = Vec::new();
    for op in &cfg.operators {
        let mut ratios: Vec<f64> = instances
            .iter()
            .filter(|r| match op.as_str() {
                "sparse" => r.operator_id.starts_with("sparse"),
                other => r.operator_id == other,
            })
            .map(|r| r.sup_ratio)
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (max, median) = if ratios.is_empty() {
            (0.0, 0.0)
        } else {
            let n = ratios.len();
            let median = if n % 2 == 1 {
                ratios[n / 2]
            } else {
                0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
            };
            (ratios[n - 1], median)
        };
        per_operator.push(OperatorAggregate {
            operator: op.clone(),
            count: ratios.len(),
            max_sup_ratio: max,
            median_sup_ratio: median,
        });
    }
    AggregateReport {
        schema: 1,
        per_operator,
        instances,
        failures,
    }
}

/// inf_{τ ∈ (0,1]} φ(τ⁻¹)(E/t)^τ, the τ-infimum step of the necessity
/// argument; comparable (up to a fixed constant) to the two-regime envelope
/// E/t for t ≥ E and φ(1 + log(E/t)) for t < E.
pub fn tau_envelope(e_measure: f64, t: f64, phi: &AdmissibleFunction) -> f64 {
    assert!(e_measure > 0.0 && t > 0.0);
    inf_bound(phi, (e_measure / t).ln(), 1.0).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    #[test]
    fn preset_triples_match_displayed_forms() {
        let fs = preset_params(&Preset::FeffermanStein).unwrap();
        assert_eq!((fs.q1, fs.q2), (1.0, f64::INFINITY));
        assert_eq!(fs.phi.gamma(), 1.0);

        let br = preset_params(&Preset::BochnerRieszRough).unwrap();
        assert_eq!(br.phi.gamma(), 2.0);
        // its q2 = ∞ tail weight is exactly (1 + log s/t)
        let u = 2.5f64;
        assert!((br.phi.eval(1.0 + u) / (1.0 + u) - (1.0 + u)).abs() < 1e-12);

        let m7 = preset_params(&Preset::MultiplierM7).unwrap();
        assert_eq!((m7.q1, m7.q2), (2.0, f64::INFINITY));
        // displayed tail weight (1 + log s/t)^6
        for u in [0.0, 1.0, 3.7] {
            let displayed = (1.0f64 + u).powi(6);
            assert!((m7.phi.eval(1.0 + u) / (1.0 + u) - displayed).abs() < 1e-9 * displayed.max(1.0));
        }

        let mc = preset_params(&Preset::MultiplierClass { gamma: 8.0, beta: 1.0 }).unwrap();
        assert_eq!(mc.q1, 2.0);
        // tail exponent (γ - 2β)/(2γ) = 6/16
        assert!((1.0 / mc.q2 - 6.0 / 16.0).abs() < 1e-15);
        assert_eq!(mc.phi.gamma(), 10.0);

        let cz = preset_params(&Preset::CzPower { k: 3 }).unwrap();
        assert_eq!(cz.phi.gamma(), 3.0);

        assert!(preset_params(&Preset::MultiplierClass { gamma: 1.0, beta: 1.0 }).is_err());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!(Preset::from_str("fefferman-stein").unwrap(), Preset::FeffermanStein);
        assert_eq!(Preset::from_str("cz-power-k:k=2").unwrap(), Preset::CzPower { k: 2 });
        assert_eq!(
            Preset::from_str("multiplier-class:gamma=8;beta=1").unwrap(),
            Preset::MultiplierClass { gamma: 8.0, beta: 1.0 }
        );
        assert!(Preset::from_str("no-such-preset").is_err());
    }

    #[test]
    fn identity_ratio_at_most_one() {
        let f = random_grid_function(3, 64);
        for preset in [Preset::FeffermanStein, Preset::MultiplierM7] {
            let params = preset_params(&preset).unwrap();
            let grid = default_t_grid(f.support_measure(), 48, 3.0);
            let rep = verify_instance(&OperatorInstance::Identity, &f, &params, &grid, "f", 3).unwrap();
            assert!(rep.sup_ratio <= 1.0 + 1e-9, "{preset:?}: {}", rep.sup_ratio);
        }
    }

    #[test]
    fn maximal_of_indicator_ratio_at_most_two() {
        let chi = GridFunction::new(0.0, 1.0, vec![1.0]).unwrap();
        let params = preset_params(&Preset::FeffermanStein).unwrap();
        let grid = default_t_grid(1.0, 64, 3.0);
        let rep = verify_instance(&OperatorInstance::HlMaximal, &chi, &params, &grid, "chi", 0).unwrap();
        assert!(rep.sup_ratio <= 2.0);
        // lhs is the closed form 2/(1+t) capped at 1
        for (t, l) in rep.t_grid.iter().zip(&rep.lhs) {
            let oracle = (2.0 / (1.0 + t)).min(1.0);
            assert!((l - oracle).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn sparse_root_family_ratio_at_most_one() {
        let fam = SparseFamily {
            depth: 0,
            eta: 0.5,
            cubes: vec![crate::operators::SparseCube { level: 0, index: 0, e_cells: vec![0] }],
        };
        let chi = GridFunction::new(0.0, 1.0, vec![1.0]).unwrap();
        let params = preset_params(&Preset::Sparse).unwrap();
        let grid = default_t_grid(1.0, 48, 3.0);
        let rep = verify_instance(&OperatorInstance::Sparse(fam), &chi, &params, &grid, "chi", 0).unwrap();
        assert!(rep.sup_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn larger_phi_never_increases_sup_ratio() {
        let f = random_grid_function(17, 64);
        let grid = default_t_grid(f.support_measure(), 48, 3.0);
        let small = preset_params(&Preset::FeffermanStein).unwrap();
        let large = preset_params(&Preset::BochnerRieszRough).unwrap();
        let op = OperatorInstance::HlMaximal;
        let a = verify_instance(&op, &f, &small, &grid, "f", 17).unwrap();
        let b = verify_instance(&op, &f, &large, &grid, "f", 17).unwrap();
        assert!(b.sup_ratio <= a.sup_ratio * (1.0 + 1e-9));
    }

    #[test]
    fn tau_envelope_two_regimes() {
        let phi = AdmissibleFunction::power(1.0);
        // K = 64 covers the sampled range with lots of slack (the real gap
        // is a small constant); the point is two-regime comparability
        let k = 64.0;
        for (e, t) in [(1.0, 1.0), (1.0, std::f64::consts::E), (20.085536923187668, 1.0), (3.0, 50.0)] {
            let v = tau_envelope(e, t, &phi);
            let envelope = if t >= e {
                e / t
            } else {
                phi.eval(1.0 + (e / t).ln())
            };
            assert!(v <= k * envelope, "e={e} t={t}");
            assert!(v >= envelope / k, "e={e} t={t}");
        }
    }

    #[test]
    fn corpus_run_is_deterministic_and_aggregates() {
        let cfg = CorpusConfig {
            operators: vec!["identity".to_string(), "sparse".to_string()],
            counts: 3,
            seeds: 11,
            depth_range: [4, 5],
            eta: 0.5,
            t_grid: TGridPolicy { points: 16, span_decades: 2.0 },
        };
        let a = corpus_run(&cfg);
        let b = corpus_run(&cfg);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.failures.is_empty());
        assert_eq!(a.per_operator.len(), 2);
        assert_eq!(a.per_operator[0].count, 3);
        assert!(a.per_operator.iter().all(|o| o.max_sup_ratio.is_finite()));
        // empty corpus
        let empty = corpus_run(&CorpusConfig { operators: vec![], ..cfg });
        assert!(empty.instances.is_empty() && empty.per_operator.is_empty());
    }
}
