//! Batch front door: spec parsing, dispatch, CSV/JSON emission.
//!
//! Exit codes: 0 success, 1 malformed input, 2 internal check failure
//! (a lemma check coming back false or a computation failing to converge).
//! All numbers are printed with 17 significant digits so output files are
//! hash-comparable across runs.

use crate::admissible::{
    inf_bound, lambda_threshold, slope_bounds, sup_bound, AdmissibleFunction,
};
use crate::calderon::{ak_norm, s_op, CalderonParams};
use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::harness::{
    corpus_run, default_t_grid, preset_params, verify_instance, CorpusConfig, OperatorInstance,
    Preset, VerificationReport,
};
use crate::operators::sparse_generate;
use crate::stepfn::{GridFunction, RunningAverage, StepFunction};
use crate::weights::{
    br_constant, bstar_constant, decay_bound_check, w_eval, wbar, Weight,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(name = "calderonlab", about = "Rearrangement and Calderón-operator toolbox")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit (t, f*, f**) for a function spec.
    Rearrange {
        /// "grid:left=L;width=W;values=v1,v2,..." or
        /// "step:breaks=b1,...;values=v1,...;tail=V"
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit B-class constants and the W̄ envelope of a weight.
    Weights {
        /// "power:tau=T" or "step:breaks=...;values=...;tail=V"
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// "inf" or a number
        #[arg(long, default_value = "inf")]
        q: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit S_{q1,q2,φ}(f*) over a t-grid, plus A_k when a weight is given.
    Calderon {
        #[arg(long)]
        input: String,
        /// "gamma=G;betas=b1,b2,..."
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        q1: Option<f64>,
        /// "inf" or a number
        #[arg(long)]
        q2: Option<String>,
        /// Named parameter preset; alternative to --phi/--q1/--q2.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the admissible-function and weight lemma checks.
    Lemmas {
        #[arg(long, default_value = "gamma=1")]
        phi: String,
        /// "inf" or a number
        #[arg(long, default_value = "inf")]
        q: String,
        #[arg(long)]
        weight: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One operator-vs-S comparison on a random function.
    Verify {
        /// identity | hl-maximal | sparse
        #[arg(long)]
        operator: String,
        #[arg(long, default_value = "fefferman-stein")]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full corpus run from a JSON config.
    Report {
        /// Path to a corpus config; the built-in reference corpus when
        /// omitted.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn parse_phi(spec: &str) -> Result<AdmissibleFunction> {
    let mut gamma: Option<f64> = None;
    let mut betas: Vec<f64> = Vec::new();
    for part in spec.split(';') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("phi spec: expected key=value in {part:?}")))?;
        match k.trim() {
            "gamma" => {
                gamma = Some(parse_num(v, "gamma")?);
            }
            "betas" => {
                betas = parse_list(v, "betas")?;
            }
            other => {
                return Err(Error::InvalidInput(format!("phi spec: unknown key {other:?}")));
            }
        }
    }
    let gamma = gamma.ok_or_else(|| Error::InvalidInput("phi spec: missing gamma".to_string()))?;
    AdmissibleFunction::new(gamma, betas)
}

pub fn parse_weight(spec: &str) -> Result<Weight> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("weight spec: expected kind:args in {spec:?}")))?;
    match kind {
        "power" => {
            let tau = keyed_num(rest, "tau")?;
            Weight::power(tau)
        }
        "step" => {
            let breaks = parse_list(&keyed_str(rest, "breaks")?, "breaks")?;
            let values = parse_list(&keyed_str(rest, "values")?, "values")?;
            let tail = keyed_num(rest, "tail").unwrap_or(0.0);
            let mut bps = vec![0.0];
            bps.extend(breaks);
            Ok(Weight::step(StepFunction::new(bps, values, tail)?))
        }
        other => Err(Error::InvalidInput(format!("unknown weight kind {other:?}"))),
    }
}

/// Function input: either a grid function or a step function on (0, ∞).
pub enum FunctionSpec {
    Grid(GridFunction),
    Step(StepFunction),
}

pub fn parse_function(spec: &str) -> Result<FunctionSpec> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("function spec: expected kind:args in {spec:?}")))?;
    match kind {
        "grid" => {
            let left = keyed_num(rest, "left")?;
            let width = keyed_num(rest, "width")?;
            let values = parse_list(&keyed_str(rest, "values")?, "values")?;
            Ok(FunctionSpec::Grid(GridFunction::new(left, width, values)?))
        }
        "step" => {
            let breaks = parse_list(&keyed_str(rest, "breaks")?, "breaks")?;
            let values = parse_list(&keyed_str(rest, "values")?, "values")?;
            let tail = keyed_num(rest, "tail").unwrap_or(0.0);
            let mut bps = vec![0.0];
            bps.extend(breaks);
            Ok(FunctionSpec::Step(StepFunction::new(bps, values, tail)?))
        }
        other => Err(Error::InvalidInput(format!("unknown function kind {other:?}"))),
    }
}

pub fn parse_q(s: &str) -> Result<f64> {
    if s.trim() == "inf" {
        Ok(f64::INFINITY)
    } else {
        parse_num(s, "q")
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::InvalidInput(format!("{what}: {e} in {s:?}")))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_num(p, what)).collect()
}

fn keyed_str(args: &str, key: &str) -> Result<String> {
    for part in args.split(';') {
        if let Some((k, v)) = part.split_once('=') {
            if k.trim() == key {
                return Ok(v.trim().to_string());
            }
        }
    }
    Err(Error::InvalidInput(format!("missing {key}= in {args:?}")))
}

fn keyed_num(args: &str, key: &str) -> Result<f64> {
    parse_num(&keyed_str(args, key)?, key)
}

/// One emitted table: fixed column order, rows of formatted cells.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn emit(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let body = serde_json::json!({
                    "schema": 1,
                    "columns": self.columns,
                    "rows": self.rows,
                });
                let mut s = serde_json::to_string_pretty(&body).unwrap();
                s.push('\n');
                s
            }
        }
    }
}

fn write_out(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
        }
    }
}

/// Executes a parsed command. `Ok(true)` means every internal check passed;
/// `Ok(false)` maps to exit code 2.
pub fn execute(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Rearrange { input, points, output } => {
            let fstar = match parse_function(input)? {
                FunctionSpec::Grid(g) => g.rearrange(),
                FunctionSpec::Step(s) => s.rearrange()?,
            };
            let support = fstar.end();
            if support <= 0.0 {
                return Err(Error::EmptySupport);
            }
            let fss = RunningAverage::new(fstar.clone())?;
            let mut table = Table::new(&["t", "fstar", "fstarstar"]);
            for t in default_t_grid(support, *points, 3.0) {
                table.push(vec![fmt(t), fmt(fstar.eval(t)), fmt(fss.eval(t))]);
            }
            write_out(output, &table.emit(output.format))?;
            Ok(true)
        }
        Command::Weights { weight, p, q, output } => {
            let w = parse_weight(weight)?;
            let q = parse_q(q)?;
            let mut table = Table::new(&["name", "value"]);
            table.push(vec![format!("br_p={p}"), fmt(br_constant(&w, *p))]);
            if q.is_finite() {
                table.push(vec![format!("bstar_q={q}"), fmt(bstar_constant(&w, q))]);
            }
            table.push(vec!["bstar_inf".to_string(), fmt(bstar_constant(&w, f64::INFINITY))]);
            table.push(vec!["w_at_1".to_string(), fmt(w_eval(&w, 1.0))]);
            for lam in [0.5, 0.25, 0.1, 0.01] {
                table.push(vec![format!("wbar_lambda={lam}"), fmt(wbar(&w, lam))]);
            }
            write_out(output, &table.emit(output.format))?;
            Ok(true)
        }
        Command::Calderon {
            input,
            phi,
            q1,
            q2,
            preset,
            weight,
            points,
            output,
        } => {
            let params = resolve_params(phi.as_deref(), *q1, q2.as_deref(), preset.as_deref())?;
            let fstar = match parse_function(input)? {
                FunctionSpec::Grid(g) => g.rearrange(),
                FunctionSpec::Step(s) => s.rearrange()?,
            };
            let support = fstar.end();
            if support <= 0.0 {
                return Err(Error::EmptySupport);
            }
            let ak = match weight {
                Some(spec) => Some(ak_norm(&params, &parse_weight(spec)?)?),
                None => None,
            };
            let mut table = match ak {
                Some(_) => Table::new(&["t", "s_of_fstar", "ak"]),
                None => Table::new(&["t", "s_of_fstar"]),
            };
            for t in default_t_grid(support, *points, 3.0) {
                let s = s_op(&params, &fstar, t)?;
                let mut row = vec![fmt(t), fmt(s)];
                if let Some(a) = ak {
                    row.push(fmt(a));
                }
                table.push(row);
            }
            write_out(output, &table.emit(output.format))?;
            Ok(true)
        }
        Command::Lemmas { phi, q, weight, output } => {
            let phi = parse_phi(phi)?;
            let q = parse_q(q)?;
            let (table, all_pass) = lemma_table(&phi, q, weight.as_deref())?;
            write_out(output, &table.emit(output.format))?;
            Ok(all_pass)
        }
        Command::Verify {
            operator,
            preset,
            seed,
            cells,
            depth,
            eta,
            points,
            output,
        } => {
            let preset = Preset::from_str(preset)?;
            let params = preset_params(&preset)?;
            let (op, f) = match operator.as_str() {
                "identity" => (
                    OperatorInstance::Identity,
                    crate::harness::random_grid_function(*seed, cells.next_power_of_two()),
                ),
                "hl-maximal" => (
                    OperatorInstance::HlMaximal,
                    crate::harness::random_grid_function(*seed, cells.next_power_of_two()),
                ),
                "sparse" => (
                    OperatorInstance::Sparse(sparse_generate(*depth, *eta, *seed)?),
                    crate::harness::random_grid_function(*seed, 1usize << *depth),
                ),
                other => return Err(Error::InvalidInput(format!("unknown operator {other:?}"))),
            };
            let grid = default_t_grid(f.support_measure(), *points, 3.0);
            let report = verify_instance(&op, &f, &params, &grid, "cli", *seed)?;
            emit_report(&report, output)?;
            Ok(true)
        }
        Command::Report { config, output } => {
            let cfg: CorpusConfig = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::InvalidInput(format!("config: {e}")))?
                }
                None => CorpusConfig::reference(),
            };
            let agg = corpus_run(&cfg);
            let ok = agg.failures.is_empty();
            match output.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "schema": 1,
                        "report": agg,
                    }))
                    .unwrap();
                    s.push('\n');
                    write_out(output, &s)?;
                }
                Format::Csv => {
                    let mut table =
                        Table::new(&["operator", "function", "seed", "t", "lhs", "rhs", "ratio"]);
                    for inst in &agg.instances {
                        for i in 0..inst.t_grid.len() {
                            let (l, r) = (inst.lhs[i], inst.rhs[i]);
                            let ratio = if l == 0.0 { 0.0 } else { l / r };
                            table.push(vec![
                                inst.operator_id.clone(),
                                inst.function_id.clone(),
                                inst.seed.to_string(),
                                fmt(inst.t_grid[i]),
                                fmt(l),
                                fmt(r),
                                fmt(ratio),
                            ]);
                        }
                    }
                    write_out(output, &table.emit(Format::Csv))?;
                }
            }
            Ok(ok)
        }
    }
}

fn resolve_params(
    phi: Option<&str>,
    q1: Option<f64>,
    q2: Option<&str>,
    preset: Option<&str>,
) -> Result<CalderonParams> {
    if let Some(p) = preset {
        return preset_params(&Preset::from_str(p)?);
    }
    let phi = parse_phi(phi.ok_or_else(|| {
        Error::InvalidInput("need --preset or --phi/--q1/--q2".to_string())
    })?)?;
    let q1 = q1.ok_or_else(|| Error::InvalidInput("missing --q1".to_string()))?;
    let q2 = parse_q(q2.ok_or_else(|| Error::InvalidInput("missing --q2".to_string()))?)?;
    CalderonParams::new(q1, q2, phi)
}

fn emit_report(report: &VerificationReport, output: &OutputArgs) -> Result<()> {
    match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "schema": 1,
                "report": report,
            }))
            .unwrap();
            s.push('\n');
            write_out(output, &s)
        }
        Format::Csv => {
            let mut table = Table::new(&["t", "lhs", "rhs", "ratio"]);
            for i in 0..report.t_grid.len() {
                let (l, r) = (report.lhs[i], report.rhs[i]);
                let ratio = if l == 0.0 { 0.0 } else { l / r };
                table.push(vec![fmt(report.t_grid[i]), fmt(l), fmt(r), fmt(ratio)]);
            }
            write_out(output, &table.emit(Format::Csv))
        }
    }
}

/// The lemma margin table: every row carries (check, value, pass).
fn lemma_table(phi: &AdmissibleFunction, q: f64, weight: Option<&str>) -> Result<(Table, bool)> {
    let mut table = Table::new(&["check", "value", "pass"]);
    let mut all = true;
    let push = |table: &mut Table, name: &str, value: f64, pass: bool, all: &mut bool| {
        *all &= pass;
        table.push(vec![name.to_string(), fmt(value), pass.to_string()]);
    };

    let sb = slope_bounds(phi);
    match sb {
        Ok(b) => {
            push(&mut table, "slope_gamma", b.gamma_lo, true, &mut all);
            push(&mut table, "slope_beta", b.beta_hi, true, &mut all);
            // two-sided integral comparison: rhs is pinched between fixed
            // multiples of lhs determined by the slope bounds
            let mut worst = 0.0f64;
            let mut ok = true;
            for r in log_grid(1.5, 1e4, 20) {
                let (lhs, rhs) = crate::admissible::comparables_ratio(phi, q, r)?;
                let (lo, hi) = if q.is_infinite() {
                    (rhs / b.beta_hi, rhs / b.gamma_lo)
                } else {
                    (rhs / (1.0 / q + b.beta_hi), rhs * q)
                };
                ok &= lhs >= lo * (1.0 - 1e-9) && lhs <= hi * (1.0 + 1e-9);
                worst = worst.max(lhs / rhs);
            }
            push(&mut table, "comparables_worst_ratio", worst, ok, &mut all);
            match lambda_threshold(phi, if q > 1.0 { q } else { f64::INFINITY }) {
                Ok(l) => push(&mut table, "lambda_threshold", l, true, &mut all),
                Err(_) => push(&mut table, "lambda_threshold", f64::NAN, false, &mut all),
            }
            // envelope lemmas on a small sample
            let mut inf_worst = 0.0f64;
            for x in [-2.0, 0.0, 1.0, 5.0] {
                let (num, bound) = inf_bound(phi, x, 1.0);
                inf_worst = inf_worst.max(num / bound);
            }
            push(&mut table, "inf_bound_worst", inf_worst, inf_worst <= 3.0, &mut all);
            let mut sup_worst = 0.0f64;
            for y in [1.0, 2.0, 10.0] {
                let (num, bound) = sup_bound(phi, y);
                sup_worst = sup_worst.max(num / bound);
            }
            push(&mut table, "sup_bound_worst", sup_worst, sup_worst <= 1.0 + 1e-9, &mut all);
        }
        Err(_) => push(&mut table, "slope_bounds", f64::NAN, false, &mut all),
    }

    if let Some(spec) = weight {
        let w = parse_weight(spec)?;
        for qq in [2.0, 4.0, f64::INFINITY] {
            if bstar_constant(&w, qq).is_finite() {
                let rep = decay_bound_check(&w, qq);
                let name = if qq.is_infinite() {
                    "decay_q=inf".to_string()
                } else {
                    format!("decay_q={qq}")
                };
                push(&mut table, &name, rep.worst_margin, rep.holds, &mut all);
            }
        }
    }
    Ok((table, all))
}

/// Full process entry point: parse, execute, map to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::QuadratureNonConvergence | Error::SearchExhausted(_) => 2,
                _ => 1,
            }
        }
    }
}
