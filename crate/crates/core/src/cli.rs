//! Command-line front end: `classify`, `scatter`, `converge`, `resonance`.
//!
//! Configuration files are TOML (or JSON when the path ends in `.json`):
//!
//! ```toml
//! tol_rel = 1e-9
//! tol_abs = 1e-12
//! strict = false
//! k = [0.5, 1, 2]
//! eps = "0.125:0.001953125:7"   # geometric grid a:b:n, or a list
//! zeta = [0, 1]
//! metric = "scattering"          # or "resolvent"
//! h = [1, 2]                     # indicator of [1, 2]
//!
//! [triple]
//! f = ["1"]                      # monomial coefficients on [-1, 1]
//! g = ["15/2", "15/2"]           # numbers, "p/q" strings or [re, im] pairs
//! # q omitted: q = 0
//! # builtin = "pseudo_hamiltonian alpha=1"
//!
//! [limit]                        # converge only: compare against this limit
//! phase = 0
//! matrix = [[1, 0], [2, 1]]
//! ```
//!
//! Piecewise profiles use `{ breaks = [...], pieces = [[...], ...] }` with
//! monomial coefficients in `x` per piece; supports beyond `[-1, 1]` are
//! rescaled onto it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifier::{classify, ClassifyOptions, LimitInteraction};
use crate::convergence::{
    dyadic_grid, geometric_grid, resolvent_convergence_against, scattering_convergence_against, ConvergenceReport,
    SLOPE_THRESHOLD,
};
use crate::error::Error;
use crate::fixtures;
use crate::point_ops::scattering_limit;
use crate::profiles::{PiecewisePoly, Poly, Profile};
use crate::resonance::{compute_invariants, half_bound_states_from, lemma_matrix, HalfBoundKind, InvariantSet, Tolerances, Triple};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pointlim", version, about = "Point-interaction limits of shrinking rank-two perturbations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the limit interaction of a triple.
    Classify(CommonArgs),
    /// Scattering data of H_eps and of the limit on an (eps, k) grid.
    Scatter(SweepArgs),
    /// Convergence-rate study against the limit operator.
    Converge(ConvergeArgs),
    /// Invariants and half-bound states.
    Resonance(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Scattering,
    Resolvent,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML (or .json) configuration file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Builtin triple, e.g. "a2" or "pseudo_hamiltonian alpha=1".
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Geometric grid "a:b:n" or a comma-separated list.
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated wave numbers.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Spectral parameter "re,im" for the resolvent metric.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Indicator support "lo,hi" of the resolvent right-hand side.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Limit override: phase.
    #[arg(long, allow_hyphen_values = true)]
    pub limit_phase: Option<f64>,
    /// Limit override: row-major "c11,c12,c21,c22".
    #[arg(long, allow_hyphen_values = true)]
    pub limit_matrix: Option<String>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnstableClassification { .. } => EXIT_UNSTABLE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

// ---------------------------------------------------------------- config

/// Parsed configuration; command-line flags take precedence.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub triple: Option<TripleSource>,
    pub tol_rel: Option<f64>,
    pub tol_abs: Option<f64>,
    pub strict: Option<bool>,
    pub k: Option<Vec<f64>>,
    pub zeta: Option<Complex64>,
    pub eps: Option<Vec<f64>>,
    pub metric: Option<MetricArg>,
    pub h: Option<(f64, f64)>,
    pub limit: Option<(f64, [[f64; 2]; 2])>,
    /// A background potential was configured.
    pub has_background: bool,
}

#[derive(Debug, Clone)]
pub enum TripleSource {
    Builtin(String),
    Profiles { f: Option<PiecewisePoly>, g: Option<PiecewisePoly>, q: Option<PiecewisePoly> },
}

const TOP_KEYS: [&str; 11] = ["triple", "tol_rel", "tol_abs", "strict", "k", "zeta", "eps", "metric", "h", "limit", "v"];

fn err_at(path: &str, what: &str) -> Failure {
    Failure::input(format!("{path}: {what}"))
}

/// Decimal number, integer or `"p/q"` string.
pub fn parse_number(v: &Value, path: &str) -> CmdResult<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| err_at(path, "number out of range")),
        Value::String(s) => parse_number_str(s).ok_or_else(|| err_at(path, &format!("cannot parse \"{s}\" as a number"))),
        _ => Err(err_at(path, "expected a number or a \"p/q\" string")),
    }
}

pub fn parse_number_str(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (p.trim(), q.trim());
        let value = match (p.parse::<i64>(), q.parse::<i64>()) {
            (Ok(p), Ok(q)) if q != 0 => p as f64 / q as f64,
            _ => p.parse::<f64>().ok()? / q.parse::<f64>().ok()?,
        };
        value.is_finite().then_some(value)
    } else {
        s.parse::<f64>().ok().filter(|x| x.is_finite())
    }
}

fn parse_complex(v: &Value, path: &str) -> CmdResult<Complex64> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            Ok(Complex64::new(parse_number(&a[0], &format!("{path}[0]"))?, parse_number(&a[1], &format!("{path}[1]"))?))
        }
        Value::Array(_) => Err(err_at(path, "complex values are [re, im] pairs")),
        _ => Ok(Complex64::new(parse_number(v, path)?, 0.0)),
    }
}

fn parse_coeffs(v: &Value, path: &str) -> CmdResult<Vec<Complex64>> {
    let arr = v.as_array().ok_or_else(|| err_at(path, "expected an array of coefficients"))?;
    if arr.is_empty() {
        return Err(err_at(path, "empty coefficient list"));
    }
    arr.iter().enumerate().map(|(i, c)| parse_complex(c, &format!("{path}[{i}]"))).collect()
}

fn parse_profile(v: &Value, path: &str) -> CmdResult<PiecewisePoly> {
    let map_err = |e: Error| err_at(path, &e.to_string());
    match v {
        Value::Array(_) => PiecewisePoly::on_interval(-1.0, 1.0, &parse_coeffs(v, path)?).map_err(map_err),
        Value::Object(o) => {
            for key in o.keys() {
                if key != "breaks" && key != "pieces" {
                    return Err(err_at(&format!("{path}.{key}"), "unknown field (expected breaks, pieces)"));
                }
            }
            let breaks = o
                .get("breaks")
                .and_then(Value::as_array)
                .ok_or_else(|| err_at(&format!("{path}.breaks"), "missing array"))?
                .iter()
                .enumerate()
                .map(|(i, b)| parse_number(b, &format!("{path}.breaks[{i}]")))
                .collect::<CmdResult<Vec<f64>>>()?;
            let pieces = o
                .get("pieces")
                .and_then(Value::as_array)
                .ok_or_else(|| err_at(&format!("{path}.pieces"), "missing array"))?
                .iter()
                .enumerate()
                .map(|(i, p)| parse_coeffs(p, &format!("{path}.pieces[{i}]")).map(|c| Poly::new(0.0, c)))
                .collect::<CmdResult<Vec<Poly>>>()?;
            PiecewisePoly::new(breaks, pieces).map_err(map_err)
        }
        _ => Err(err_at(path, "expected a coefficient array or a {breaks, pieces} table")),
    }
}

fn parse_pair(v: &Value, path: &str) -> CmdResult<(f64, f64)> {
    match v.as_array() {
        Some(a) if a.len() == 2 => Ok((parse_number(&a[0], &format!("{path}[0]"))?, parse_number(&a[1], &format!("{path}[1]"))?)),
        _ => Err(err_at(path, "expected a two-element array")),
    }
}

fn parse_number_list(v: &Value, path: &str) -> CmdResult<Vec<f64>> {
    match v {
        Value::Array(a) => a.iter().enumerate().map(|(i, x)| parse_number(x, &format!("{path}[{i}]"))).collect(),
        _ => Ok(vec![parse_number(v, path)?]),
    }
}

/// `"a:b:n"` geometric grid or comma-separated list.
pub fn parse_eps_spec(s: &str) -> CmdResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let a = parse_number_str(parts[0]).ok_or_else(|| err_at("eps", "bad grid start"))?;
        let b = parse_number_str(parts[1]).ok_or_else(|| err_at("eps", "bad grid end"))?;
        let n = parts[2].trim().parse::<usize>().map_err(|_| err_at("eps", "bad grid count"))?;
        return geometric_grid(a, b, n).map_err(|e| err_at("eps", &e.to_string()));
    }
    s.split(',')
        .map(|x| parse_number_str(x).ok_or_else(|| err_at("eps", &format!("cannot parse \"{x}\""))))
        .collect()
}

fn parse_eps(v: &Value) -> CmdResult<Vec<f64>> {
    match v {
        Value::String(s) if s.contains(':') => parse_eps_spec(s),
        _ => parse_number_list(v, "eps"),
    }
}

impl RunConfig {
    pub fn from_value(v: &Value) -> CmdResult<Self> {
        let o = v.as_object().ok_or_else(|| Failure::input("config root must be a table"))?;
        for key in o.keys() {
            if !TOP_KEYS.contains(&key.as_str()) {
                return Err(err_at(key, "unknown field"));
            }
        }
        let mut cfg = RunConfig::default();
        if let Some(t) = o.get("triple") {
            cfg.triple = Some(parse_triple_source(t)?);
        }
        if let Some(x) = o.get("tol_rel") {
            cfg.tol_rel = Some(parse_number(x, "tol_rel")?);
        }
        if let Some(x) = o.get("tol_abs") {
            cfg.tol_abs = Some(parse_number(x, "tol_abs")?);
        }
        if let Some(x) = o.get("strict") {
            cfg.strict = Some(x.as_bool().ok_or_else(|| err_at("strict", "expected a boolean"))?);
        }
        if let Some(x) = o.get("k") {
            cfg.k = Some(parse_number_list(x, "k")?);
        }
        if let Some(x) = o.get("zeta") {
            cfg.zeta = Some(parse_complex(x, "zeta")?);
        }
        if let Some(x) = o.get("eps") {
            cfg.eps = Some(parse_eps(x)?);
        }
        if let Some(x) = o.get("metric") {
            cfg.metric = Some(match x.as_str() {
                Some("scattering") => MetricArg::Scattering,
                Some("resolvent") => MetricArg::Resolvent,
                _ => return Err(err_at("metric", "expected \"scattering\" or \"resolvent\"")),
            });
        }
        if let Some(x) = o.get("h") {
            cfg.h = Some(parse_pair(x, "h")?);
        }
        if let Some(x) = o.get("limit") {
            let l = x.as_object().ok_or_else(|| err_at("limit", "expected a table"))?;
            let phase = parse_number(l.get("phase").unwrap_or(&Value::from(0)), "limit.phase")?;
            let m = l.get("matrix").and_then(Value::as_array).ok_or_else(|| err_at("limit.matrix", "missing 2x2 array"))?;
            if m.len() != 2 {
                return Err(err_at("limit.matrix", "expected 2 rows"));
            }
            let r0 = parse_pair(&m[0], "limit.matrix[0]")?;
            let r1 = parse_pair(&m[1], "limit.matrix[1]")?;
            cfg.limit = Some((phase, [[r0.0, r0.1], [r1.0, r1.1]]));
        }
        if let Some(x) = o.get("v") {
            cfg.has_background = !matches!(x, Value::Number(n) if n.as_f64() == Some(0.0));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> CmdResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let value: Value = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        } else {
            let t: toml::Value = toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            serde_json::to_value(t).map_err(|e| Failure::input(e.to_string()))?
        };
        Self::from_value(&value)
    }
}

fn parse_triple_source(v: &Value) -> CmdResult<TripleSource> {
    match v {
        Value::String(s) => Ok(TripleSource::Builtin(s.clone())),
        Value::Object(o) => {
            if let Some(b) = o.get("builtin") {
                let name = b.as_str().ok_or_else(|| err_at("triple.builtin", "expected a string"))?;
                let mut spec = name.to_string();
                for (key, val) in o.iter().filter(|(k, _)| k.as_str() != "builtin") {
                    let x = parse_number(val, &format!("triple.{key}"))?;
                    let _ = write!(spec, " {key}={x}");
                }
                return Ok(TripleSource::Builtin(spec));
            }
            for key in o.keys() {
                if !["f", "g", "q"].contains(&key.as_str()) {
                    return Err(err_at(&format!("triple.{key}"), "unknown field (expected f, g, q or builtin)"));
                }
            }
            let get = |k: &str| o.get(k).map(|p| parse_profile(p, &format!("triple.{k}"))).transpose();
            Ok(TripleSource::Profiles { f: get("f")?, g: get("g")?, q: get("q")? })
        }
        _ => Err(err_at("triple", "expected a table or a builtin name")),
    }
}

/// Builtin triple from `"name key=value ..."`. Names are fixture names
/// (optionally suffixed `_fixture`), `pseudo_hamiltonian` (`alpha`, default 1)
/// and `free`.
pub fn builtin_triple(spec: &str) -> CmdResult<Triple> {
    let mut words = spec.split_whitespace();
    let name = words.next().ok_or_else(|| err_at("builtin", "empty name"))?;
    let mut params = BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| err_at("builtin", &format!("expected key=value, got \"{w}\"")))?;
        let x = parse_number_str(v).ok_or_else(|| err_at(&format!("builtin.{k}"), &format!("cannot parse \"{v}\"")))?;
        params.insert(k.to_string(), x);
    }
    let name = name.strip_suffix("_fixture").unwrap_or(name);
    let allowed: &[&str] = if name == "pseudo_hamiltonian" { &["alpha"] } else { &[] };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err_at(&format!("builtin.{k}"), &format!("unknown parameter for {name}")));
    }
    match name {
        "pseudo_hamiltonian" => Ok(fixtures::pseudo_hamiltonian(params.get("alpha").copied().unwrap_or(1.0))),
        "free" => Ok(Triple::potential_only(Profile::constant(Complex64::new(0.0, 0.0)))?),
        _ => fixtures::by_name(name)
            .map(|f| f.triple)
            .ok_or_else(|| err_at("builtin", &format!("unknown builtin \"{name}\""))),
    }
}

fn build_triple(src: &TripleSource, notes: &mut Vec<String>) -> CmdResult<Triple> {
    match src {
        TripleSource::Builtin(s) => builtin_triple(s),
        TripleSource::Profiles { f, g, q } => {
            let zero = PiecewisePoly::constant_on(-1.0, 1.0, Complex64::new(0.0, 0.0));
            let q = match q {
                Some(q) => q.clone(),
                None => {
                    notes.push("q omitted; using q = 0".into());
                    zero.clone()
                }
            };
            let is_zero = |p: &Option<PiecewisePoly>| p.as_ref().is_none_or(|p| p.norm() == 0.0);
            if is_zero(f) && is_zero(g) {
                notes.push("f = g = 0; potential-only triple".into());
                let q = Profile::new(q).map_err(|e| err_at("triple.q", &e.to_string()))?;
                return Ok(Triple::potential_only(q)?);
            }
            let f = f.clone().ok_or_else(|| err_at("triple.f", "missing"))?;
            let g = g.clone().ok_or_else(|| err_at("triple.g", "missing"))?;
            let (t, r) = Triple::from_raw(f, g, q)?;
            if r > 1.0 {
                notes.push(format!("profiles rescaled from [-{r}, {r}] onto [-1, 1]"));
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- outputs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub schema_version: u32,
    #[serde(flatten)]
    pub interaction: LimitInteraction,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub eps: f64,
    pub k: f64,
    pub t: Option<Complex64>,
    pub r: Option<Complex64>,
    pub r_right: Option<Complex64>,
    pub unitarity_defect: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterOutput {
    pub schema_version: u32,
    pub limit: LimitInteraction,
    pub rows: Vec<ScatterRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeOutput {
    pub schema_version: u32,
    pub threshold: f64,
    pub report: ConvergenceReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledState {
    pub x: Vec<f64>,
    pub value: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOutput {
    pub schema_version: u32,
    pub kind: HalfBoundKind,
    pub states: Vec<SampledState>,
    pub residual: f64,
    pub det_a: Complex64,
    pub lambda: f64,
    pub det_minus_lambda: f64,
    pub invariants: InvariantSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

// ---------------------------------------------------------------- commands

struct Context {
    cfg: RunConfig,
    notes: Vec<String>,
}

impl Context {
    fn new(common: &CommonArgs) -> CmdResult<Self> {
        let mut cfg = match &common.input {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(b) = &common.builtin {
            cfg.triple = Some(TripleSource::Builtin(b.clone()));
        }
        if common.tol_rel.is_some() {
            cfg.tol_rel = common.tol_rel;
        }
        if common.tol_abs.is_some() {
            cfg.tol_abs = common.tol_abs;
        }
        if common.strict {
            cfg.strict = Some(true);
        }
        Ok(Self { cfg, notes: vec![] })
    }

    fn triple(&mut self) -> CmdResult<Triple> {
        let src = self.cfg.triple.clone().ok_or_else(|| Failure::input("no triple given (use --input or --builtin)"))?;
        build_triple(&src, &mut self.notes)
    }

    fn options(&self) -> CmdResult<ClassifyOptions> {
        let d = Tolerances::default();
        let tolerances = Tolerances { rel: self.cfg.tol_rel.unwrap_or(d.rel), abs: self.cfg.tol_abs.unwrap_or(d.abs) };
        if !(tolerances.rel >= 0.0 && tolerances.abs >= 0.0) {
            return Err(Failure::input("tolerances must be nonnegative"));
        }
        Ok(ClassifyOptions { tolerances, strict: self.cfg.strict.unwrap_or(false) })
    }

    /// `(eps, k)`; with `allow_zero`, `eps = 0` entries are dropped (the limit row is always emitted).
    fn sweep(&mut self, args: &SweepArgs, default_k: Vec<f64>, allow_zero: bool) -> CmdResult<(Vec<f64>, Vec<f64>)> {
        if let Some(e) = &args.eps {
            self.cfg.eps = Some(parse_eps_spec(e)?);
        }
        if let Some(k) = &args.k {
            self.cfg.k = Some(k.clone());
        }
        let eps = self.cfg.eps.clone().unwrap_or_else(|| dyadic_grid(3, 9));
        if eps.is_empty() {
            return Err(Failure::input("eps list is empty"));
        }
        if let Some(e) = eps.iter().find(|e| !((**e > 0.0 || (allow_zero && **e == 0.0)) && **e <= 1.0)) {
            return Err(err_at("eps", &format!("{e} outside (0, 1]")));
        }
        let eps: Vec<f64> = eps.into_iter().filter(|e| *e > 0.0).collect();
        let k = self.cfg.k.clone().unwrap_or(default_k);
        if k.is_empty() || k.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(err_at("k", "wave numbers must be positive"));
        }
        if self.cfg.has_background {
            return Err(Failure::input("scattering requires V = 0; remove the background potential `v`"));
        }
        Ok((eps, k))
    }
}

fn emit(common: &CommonArgs, text: &str) -> CmdResult<()> {
    match &common.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn warn_notes(notes: &[String]) {
    for n in notes {
        eprintln!("note: {n}");
    }
}

pub fn cmd_classify(args: &CommonArgs) -> CmdResult<ClassifyOutput> {
    let mut ctx = Context::new(args)?;
    let t = ctx.triple()?;
    let interaction = classify(&t, &ctx.options()?)?;
    for w in &interaction.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ClassifyOutput { schema_version: SCHEMA_VERSION, interaction, notes: ctx.notes })
}

pub fn cmd_scatter(args: &SweepArgs) -> CmdResult<ScatterOutput> {
    let mut ctx = Context::new(&args.common)?;
    let t = ctx.triple()?;
    let limit = classify(&t, &ctx.options()?)?;
    let (eps, ks) = ctx.sweep(args, vec![1.0], true)?;
    let mut rows = Vec::new();
    let row = |eps: f64, k: f64, res: crate::error::Result<crate::cell_solver::ScatteringData>| match res {
        Ok(sd) => ScatterRow {
            eps,
            k,
            t: Some(sd.t),
            r: Some(sd.r_left),
            r_right: Some(sd.r_right),
            unitarity_defect: Some(sd.unitarity_defect()),
            status: "ok".into(),
        },
        Err(e) => ScatterRow { eps, k, t: None, r: None, r_right: None, unitarity_defect: None, status: e.to_string() },
    };
    for &k in &ks {
        for &e in &eps {
            rows.push(row(e, k, crate::cell_solver::scattering_eps(&t, e, k)));
        }
        rows.push(row(0.0, k, scattering_limit(&limit, k)));
    }
    if rows.iter().all(|r| r.status != "ok") {
        return Err(Failure::input(format!("every row failed; first: {}", rows[0].status)));
    }
    Ok(ScatterOutput { schema_version: SCHEMA_VERSION, limit, rows, notes: ctx.notes })
}

fn parse_pair_str(s: &str, what: &str) -> CmdResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((
            parse_number_str(a).ok_or_else(|| err_at(what, &format!("cannot parse \"{a}\"")))?,
            parse_number_str(b).ok_or_else(|| err_at(what, &format!("cannot parse \"{b}\"")))?,
        )),
        _ => Err(err_at(what, "expected two comma-separated numbers")),
    }
}

pub fn cmd_converge(args: &ConvergeArgs) -> CmdResult<ConvergeOutput> {
    let mut ctx = Context::new(&args.sweep.common)?;
    let t = ctx.triple()?;
    let (eps, ks) = ctx.sweep(&args.sweep, vec![1.0], false)?;
    if eps.is_empty() {
        return Err(Failure::input("eps list is empty"));
    }
    if let Some(z) = &args.zeta {
        let (re, im) = parse_pair_str(z, "zeta")?;
        ctx.cfg.zeta = Some(Complex64::new(re, im));
    }
    if let Some(h) = &args.h {
        ctx.cfg.h = Some(parse_pair_str(h, "h")?);
    }
    if let Some(m) = args.metric {
        ctx.cfg.metric = Some(m);
    }
    if let Some(m) = &args.limit_matrix {
        let v: Vec<f64> = m
            .split(',')
            .map(|x| parse_number_str(x).ok_or_else(|| err_at("limit_matrix", &format!("cannot parse \"{x}\""))))
            .collect::<CmdResult<_>>()?;
        if v.len() != 4 {
            return Err(err_at("limit_matrix", "expected four entries"));
        }
        ctx.cfg.limit = Some((args.limit_phase.unwrap_or(0.0), [[v[0], v[1]], [v[2], v[3]]]));
    } else if args.limit_phase.is_some() {
        return Err(err_at("limit_phase", "needs --limit-matrix"));
    }
    let limit = match ctx.cfg.limit {
        Some((phase, m)) => {
            ctx.notes.push("comparing against a user-supplied limit".into());
            let mut l = LimitInteraction::connected(classify(&t, &ctx.options()?)?.case, phase, m);
            l.warnings.push("override".into());
            l
        }
        None => classify(&t, &ctx.options()?)?,
    };
    let report = match ctx.cfg.metric.unwrap_or(MetricArg::Scattering) {
        MetricArg::Scattering => {
            if ks.len() != 1 {
                return Err(err_at("k", "converge takes a single k"));
            }
            scattering_convergence_against(&t, &limit, ks[0], &eps)?
        }
        MetricArg::Resolvent => {
            let zeta = ctx.cfg.zeta.ok_or_else(|| Failure::input("resolvent metric needs zeta (--zeta re,im)"))?;
            if zeta.im == 0.0 {
                return Err(err_at("zeta", "imaginary part must be nonzero"));
            }
            let (lo, hi) = ctx.cfg.h.unwrap_or((1.0, 2.0));
            if !(lo < hi) {
                return Err(err_at("h", "expected lo < hi"));
            }
            let h = PiecewisePoly::constant_on(lo, hi, Complex64::new(1.0, 0.0));
            resolvent_convergence_against(&t, &limit, zeta, &h, &format!("indicator[{lo},{hi}]"), &eps)?
        }
    };
    Ok(ConvergeOutput { schema_version: SCHEMA_VERSION, threshold: SLOPE_THRESHOLD, report, notes: ctx.notes })
}

pub fn cmd_resonance(args: &CommonArgs) -> CmdResult<ResonanceOutput> {
    let mut ctx = Context::new(args)?;
    let t = ctx.triple()?;
    if t.is_potential_only() {
        return Err(Failure::input("resonance analysis needs nonzero f, g"));
    }
    let inv = compute_invariants(&t, &ctx.options()?.tolerances);
    let report = half_bound_states_from(&t, &inv);
    let (_, det) = lemma_matrix(&t);
    let x: Vec<f64> = (0..=60).map(|i| -1.5 + 0.05 * i as f64).collect();
    let states = report
        .states
        .iter()
        .map(|u| SampledState { x: x.clone(), value: x.iter().map(|&x| u.eval(x)).collect() })
        .collect();
    let det_minus_lambda = (det - inv.lambda_val).norm();
    Ok(ResonanceOutput {
        schema_version: SCHEMA_VERSION,
        kind: report.kind,
        states,
        residual: report.residual,
        det_a: det,
        lambda: inv.lambda_val,
        det_minus_lambda,
        invariants: inv,
        notes: ctx.notes,
    })
}

fn complex_cells(z: Option<Complex64>) -> String {
    match z {
        Some(z) => format!("{},{}", z.re, z.im),
        None => ",".into(),
    }
}

pub fn scatter_csv(out: &ScatterOutput) -> String {
    let mut s = String::from("eps,k,re_t,im_t,re_r,im_r,unitarity_defect,status\n");
    for r in &out.rows {
        let ud = r.unitarity_defect.map(|u| u.to_string()).unwrap_or_default();
        let status = r.status.replace([',', '\n'], ";");
        let _ = writeln!(s, "{},{},{},{},{},{}", r.eps, r.k, complex_cells(r.t), complex_cells(r.r), ud, status);
    }
    s
}

pub fn converge_csv(rep: &ConvergenceReport) -> String {
    let mut s = String::from("eps,error,flag\n");
    for ((e, err), flag) in rep.eps_list.iter().zip(&rep.errors).zip(&rep.flags) {
        let err = err.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{e},{err},{}", flag.replace([',', '\n'], ";"));
    }
    s
}

fn run_command(cli: &Cli) -> CmdResult<i32> {
    match &cli.command {
        Command::Classify(a) => {
            let out = cmd_classify(a)?;
            warn_notes(&out.notes);
            if a.format == Some(Format::Csv) {
                return Err(Failure::input("classify emits JSON only"));
            }
            emit(a, &to_json(&out))?;
            Ok(EXIT_OK)
        }
        Command::Scatter(a) => {
            let out = cmd_scatter(a)?;
            warn_notes(&out.notes);
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Csv => scatter_csv(&out),
                Format::Json => to_json(&out),
            };
            emit(&a.common, &text)?;
            Ok(EXIT_OK)
        }
        Command::Converge(a) => {
            let out = cmd_converge(a)?;
            warn_notes(&out.notes);
            let text = match a.sweep.common.format.unwrap_or(Format::Json) {
                Format::Csv => converge_csv(&out.report),
                Format::Json => to_json(&out),
            };
            emit(&a.sweep.common, &text)?;
            Ok(if out.report.passed { EXIT_OK } else { EXIT_CONVERGENCE })
        }
        Command::Resonance(a) => {
            let out = cmd_resonance(a)?;
            warn_notes(&out.notes);
            if a.format == Some(Format::Csv) {
                return Err(Failure::input("resonance emits JSON only"));
            }
            emit(a, &to_json(&out))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number_str("15/2"), Some(7.5));
        assert_eq!(parse_number_str(" -1/3 "), Some(-1.0 / 3.0));
        assert_eq!(parse_number_str("2.5e-1"), Some(0.25));
        assert_eq!(parse_number_str("1/0"), None);
        assert_eq!(parse_number_str("abc"), None);
    }

    #[test]
    fn eps_specs() {
        let g = parse_eps_spec("0.5:0.125:3").unwrap();
        assert!((g[1] - 0.25).abs() < 1e-15);
        assert_eq!(parse_eps_spec("1/8, 1/16").unwrap(), vec![0.125, 0.0625]);
        assert!(parse_eps_spec("").unwrap().is_empty());
    }

    #[test]
    fn config_field_errors_name_the_field() {
        let v: Value = serde_json::json!({"triple": {"f": ["1", "x"], "g": [1]}});
        let err = RunConfig::from_value(&v).unwrap_err();
        assert!(err.message.contains("triple.f[1]"), "{}", err.message);
        let v: Value = serde_json::json!({"triple": {"f": [1], "gg": [1]}});
        assert!(RunConfig::from_value(&v).unwrap_err().message.contains("triple.gg"));
    }

    #[test]
    fn builtins() {
        assert!(builtin_triple("a2_fixture").is_ok());
        assert!(builtin_triple("pseudo_hamiltonian alpha=1/2").is_ok());
        assert!(builtin_triple("a2 alpha=1").is_err());
        assert!(builtin_triple("nope").is_err());
    }
}
