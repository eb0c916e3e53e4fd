//! Problem specs, report emission, and the self-checking verify suite.
//!
//! A [`ProblemSpec`] describes one job: a finite tree, a symbol on it, a
//! space pair, and knobs for the search and the tolerances. [`parse_problem`]
//! reads one from JSON with path-precise schema errors, [`emit_problem`]
//! writes the canonical form back (field-level round trip), and [`run`]
//! executes a subcommand into deterministic JSON or CSV bytes.

use crate::diagnostics::{
    classify, membership_from_radial, membership_from_table, quantities_from_profile,
    quantities_from_radial, OperatorClassification, SpaceMembership, SpacePair, SymbolQuantities,
    Verdict,
};
use crate::function::{modulus, FunctionError, LevelProfile, TreeFunction};
use crate::operator::{
    apply, essential_norm_bracket, isometry_defect, norm_bracket, Bracket, IsometryReport,
    NormAnalysis, OperatorError, SearchConfig, SearchStrategy,
};
use crate::radial::{ExprError, RadialExpr};
use crate::tail::TailEstimate;
use crate::tree::{Tree, TreeError, TreeLimits};
use crate::witness::{self, WitnessError, WitnessSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

/// Tree description as given in a problem spec.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeSpec {
    Homogeneous {
        branching: u32,
        root_degree: u32,
        depth: u32,
    },
    /// `parents[i]` is the parent of vertex `i + 1` in input numbering;
    /// vertex 0 is the root.
    Explicit { parents: Vec<usize> },
}

impl TreeSpec {
    /// Vertex count implied by the spec, without building the tree.
    /// `None` when the homogeneous count overflows u128.
    pub fn vertex_count(&self) -> Option<u128> {
        match self {
            TreeSpec::Explicit { parents } => Some(parents.len() as u128 + 1),
            TreeSpec::Homogeneous {
                branching,
                root_degree,
                depth,
            } => {
                let b = *branching as u128;
                let r = *root_degree as u128;
                let mut total: u128 = 1;
                let mut level: u128 = if *depth >= 1 { r } else { 0 };
                for _ in 1..=*depth {
                    total = total.checked_add(level)?;
                    level = level.checked_mul(b)?;
                }
                Some(total)
            }
        }
    }
}

/// Symbol description: a radial expression kept as source text, or a table
/// of one value per vertex in input order.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    Radial { expr: String },
    Table { values: Vec<Complex64> },
}

/// Numeric tolerances a spec may override.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute slack allowed before a bracket inversion is an error.
    pub bracket_slack: f64,
    /// Threshold below which a limit counts as zero.
    pub zero: f64,
    /// Relative tolerance for recomputation agreement.
    pub relative: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            bracket_slack: 1e-9,
            zero: 1e-9,
            relative: 1e-12,
        }
    }
}

/// One complete job description.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub tree: TreeSpec,
    pub symbol: SymbolSpec,
    pub pair: SpacePair,
    /// Target the little subspace where that changes the classification.
    pub little: bool,
    pub search: SearchConfig,
    pub tolerances: Tolerances,
    /// Optional probe for the `witness` subcommand; other subcommands
    /// ignore it.
    pub witness: Option<WitnessSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Analyze,
    Norm,
    Essnorm,
    Classify,
    Witness,
    Verify,
}

impl Subcommand {
    pub fn parse(s: &str) -> Option<Subcommand> {
        match s {
            "analyze" => Some(Subcommand::Analyze),
            "norm" => Some(Subcommand::Norm),
            "essnorm" => Some(Subcommand::Essnorm),
            "classify" => Some(Subcommand::Classify),
            "witness" => Some(Subcommand::Witness),
            "verify" => Some(Subcommand::Verify),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Analyze => "analyze",
            Subcommand::Norm => "norm",
            Subcommand::Essnorm => "essnorm",
            Subcommand::Classify => "classify",
            Subcommand::Witness => "witness",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "json" => Some(OutputFormat::Json),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

impl IoError {
    /// Process exit code: 2 for schema/input errors, 3 for numeric contract
    /// violations, 1 for resource limits and everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Json(_) | IoError::Schema { .. } | IoError::Expr(_) => 2,
            IoError::Function(_) | IoError::Witness(_) => 2,
            IoError::Tree(TreeError::ZeroBranching)
            | IoError::Tree(TreeError::BadParent { .. }) => 2,
            IoError::Tree(TreeError::TooLarge { .. }) => 1,
            IoError::Operator(OperatorError::BracketInversion { .. }) => 3,
            IoError::Operator(OperatorError::Witness(_)) => 2,
        }
    }
}

fn schema(path: &str, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), IoError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn req_field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key)
        .ok_or_else(|| schema(&format!("{path}.{key}"), "missing required field"))
}

fn get_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn get_u64(v: &Value, path: &str) -> Result<u64, IoError> {
    v.as_u64()
        .ok_or_else(|| schema(path, "expected an unsigned integer"))
}

fn get_u32(v: &Value, path: &str) -> Result<u32, IoError> {
    let n = get_u64(v, path)?;
    u32::try_from(n).map_err(|_| schema(path, "value does not fit in 32 bits"))
}

fn get_f64(v: &Value, path: &str) -> Result<f64, IoError> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn get_bool(v: &Value, path: &str) -> Result<bool, IoError> {
    v.as_bool()
        .ok_or_else(|| schema(path, "expected a boolean"))
}

fn opt_u64(obj: &Map<String, Value>, path: &str, key: &str, default: u64) -> Result<u64, IoError> {
    match obj.get(key) {
        Some(v) => get_u64(v, &format!("{path}.{key}")),
        None => Ok(default),
    }
}

fn opt_u32(obj: &Map<String, Value>, path: &str, key: &str, default: u32) -> Result<u32, IoError> {
    match obj.get(key) {
        Some(v) => get_u32(v, &format!("{path}.{key}")),
        None => Ok(default),
    }
}

fn parse_tree(value: Option<&Value>) -> Result<TreeSpec, IoError> {
    let Some(value) = value else {
        return Ok(TreeSpec::Homogeneous {
            branching: 2,
            root_degree: 2,
            depth: 64,
        });
    };
    let obj = as_object(value, "$.tree")?;
    let kind = get_str(req_field(obj, "$.tree", "kind")?, "$.tree.kind")?;
    match kind {
        "homogeneous" => {
            reject_unknown(
                obj,
                "$.tree",
                &["kind", "branching", "root_degree", "depth"],
            )?;
            Ok(TreeSpec::Homogeneous {
                branching: opt_u32(obj, "$.tree", "branching", 2)?,
                root_degree: opt_u32(obj, "$.tree", "root_degree", 2)?,
                depth: opt_u32(obj, "$.tree", "depth", 64)?,
            })
        }
        "explicit" => {
            reject_unknown(obj, "$.tree", &["kind", "parents"])?;
            let arr = req_field(obj, "$.tree", "parents")?
                .as_array()
                .ok_or_else(|| schema("$.tree.parents", "expected an array"))?;
            let mut parents = Vec::with_capacity(arr.len());
            for (i, v) in arr.iter().enumerate() {
                let path = format!("$.tree.parents[{i}]");
                parents.push(get_u64(v, &path)? as usize);
            }
            Ok(TreeSpec::Explicit { parents })
        }
        other => Err(schema(
            "$.tree.kind",
            format!("unknown tree kind \"{other}\"; expected \"homogeneous\" or \"explicit\""),
        )),
    }
}

fn parse_complex(v: &Value, path: &str) -> Result<Complex64, IoError> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    if let Some(arr) = v.as_array() {
        if arr.len() == 2 {
            let re = get_f64(&arr[0], &format!("{path}[0]"))?;
            let im = get_f64(&arr[1], &format!("{path}[1]"))?;
            return Ok(Complex64::new(re, im));
        }
    }
    Err(schema(path, "expected a number or a [re, im] pair"))
}

fn parse_symbol(value: Option<&Value>, tree: &TreeSpec) -> Result<SymbolSpec, IoError> {
    let Some(value) = value else {
        return Err(schema("$.symbol", "missing required field"));
    };
    let obj = as_object(value, "$.symbol")?;
    let kind = get_str(req_field(obj, "$.symbol", "kind")?, "$.symbol.kind")?;
    match kind {
        "radial" => {
            reject_unknown(obj, "$.symbol", &["kind", "expr"])?;
            let text = get_str(req_field(obj, "$.symbol", "expr")?, "$.symbol.expr")?;
            if let Err(e) = RadialExpr::parse(text) {
                return Err(schema("$.symbol.expr", e.to_string()));
            }
            Ok(SymbolSpec::Radial {
                expr: text.to_string(),
            })
        }
        "table" => {
            reject_unknown(obj, "$.symbol", &["kind", "values"])?;
            let arr = req_field(obj, "$.symbol", "values")?
                .as_array()
                .ok_or_else(|| schema("$.symbol.values", "expected an array"))?;
            let mut values = Vec::with_capacity(arr.len());
            for (i, v) in arr.iter().enumerate() {
                values.push(parse_complex(v, &format!("$.symbol.values[{i}]"))?);
            }
            if let Some(expected) = tree.vertex_count() {
                if expected != values.len() as u128 {
                    return Err(schema(
                        "$.symbol.values",
                        format!(
                            "expected {expected} values (one per vertex), got {}",
                            values.len()
                        ),
                    ));
                }
            }
            Ok(SymbolSpec::Table { values })
        }
        other => Err(schema(
            "$.symbol.kind",
            format!("unknown symbol kind \"{other}\"; expected \"radial\" or \"table\""),
        )),
    }
}

fn parse_search(value: Option<&Value>) -> Result<SearchConfig, IoError> {
    let mut cfg = SearchConfig::default();
    let Some(value) = value else { return Ok(cfg) };
    let obj = as_object(value, "$.search")?;
    reject_unknown(obj, "$.search", &["budget", "seed", "strategy"])?;
    cfg.budget = opt_u64(obj, "$.search", "budget", cfg.budget)?;
    cfg.seed = opt_u64(obj, "$.search", "seed", cfg.seed)?;
    if let Some(v) = obj.get("strategy") {
        let s = get_str(v, "$.search.strategy")?;
        cfg.strategy = SearchStrategy::parse(s).ok_or_else(|| {
            schema(
                "$.search.strategy",
                format!(
                    "unknown strategy \"{s}\"; expected \"witness_only\", \
                     \"coordinate_ascent\", or \"random_ball\""
                ),
            )
        })?;
    }
    Ok(cfg)
}

fn parse_tolerances(value: Option<&Value>) -> Result<Tolerances, IoError> {
    let mut tol = Tolerances::default();
    let Some(value) = value else { return Ok(tol) };
    let obj = as_object(value, "$.tolerances")?;
    reject_unknown(obj, "$.tolerances", &["bracket_slack", "zero", "relative"])?;
    let read = |key: &str, slot: &mut f64| -> Result<(), IoError> {
        if let Some(v) = obj.get(key) {
            let path = format!("$.tolerances.{key}");
            let x = get_f64(v, &path)?;
            if !x.is_finite() || x < 0.0 {
                return Err(schema(&path, "expected a finite non-negative number"));
            }
            *slot = x;
        }
        Ok(())
    };
    read("bracket_slack", &mut tol.bracket_slack)?;
    read("zero", &mut tol.zero)?;
    read("relative", &mut tol.relative)?;
    Ok(tol)
}

fn parse_witness(value: Option<&Value>) -> Result<Option<WitnessSpec>, IoError> {
    let Some(value) = value else { return Ok(None) };
    let obj = as_object(value, "$.witness")?;
    let family = get_str(req_field(obj, "$.witness", "family")?, "$.witness.family")?;
    let req_u64 = |key: &str| -> Result<u64, IoError> {
        get_u64(
            req_field(obj, "$.witness", key)?,
            &format!("$.witness.{key}"),
        )
    };
    let allowed: &[&str] = match family {
        "point_mass" | "indicator_vertex" => &["family", "level"],
        "constant" | "sign_alternating" => &["family"],
        "capped_log" | "squared_log_ramp" | "sqrt_window_ramp" | "harmonic_ramp" | "radial_cap"
        | "quadratic_ramp" | "half_window_ramp" => &["family", "cap"],
        "log_power" => &["family", "exponent"],
        "log_ramp_p" => &["family", "cap", "power"],
        "parity_annulus" => &["family", "start", "factor", "parity"],
        "tail_sign" => &["family", "cutoff"],
        other => {
            return Err(schema(
                "$.witness.family",
                format!("unknown witness family \"{other}\""),
            ))
        }
    };
    reject_unknown(obj, "$.witness", allowed)?;
    let spec = match family {
        "point_mass" => WitnessSpec::PointMass {
            level: req_u64("level")?,
        },
        "indicator_vertex" => WitnessSpec::IndicatorVertex {
            level: req_u64("level")?,
        },
        "constant" => WitnessSpec::Constant,
        "sign_alternating" => WitnessSpec::SignAlternating,
        "capped_log" => WitnessSpec::CappedLog {
            cap: req_u64("cap")?,
        },
        "squared_log_ramp" => WitnessSpec::SquaredLogRamp {
            cap: req_u64("cap")?,
        },
        "sqrt_window_ramp" => WitnessSpec::SqrtWindowRamp {
            cap: req_u64("cap")?,
        },
        "harmonic_ramp" => WitnessSpec::HarmonicRamp {
            cap: req_u64("cap")?,
        },
        "radial_cap" => WitnessSpec::RadialCap {
            cap: req_u64("cap")?,
        },
        "quadratic_ramp" => WitnessSpec::QuadraticRamp {
            cap: req_u64("cap")?,
        },
        "half_window_ramp" => WitnessSpec::HalfWindowRamp {
            cap: req_u64("cap")?,
        },
        "log_power" => {
            let v = req_field(obj, "$.witness", "exponent")?;
            WitnessSpec::LogPower {
                exponent: get_f64(v, "$.witness.exponent")?,
            }
        }
        "log_ramp_p" => {
            let power = get_u32(req_field(obj, "$.witness", "power")?, "$.witness.power")?;
            WitnessSpec::LogRampP {
                cap: req_u64("cap")?,
                power,
            }
        }
        "parity_annulus" => {
            let odd = match obj.get("parity") {
                None => false,
                Some(v) => match get_str(v, "$.witness.parity")? {
                    "even" => false,
                    "odd" => true,
                    other => {
                        return Err(schema(
                            "$.witness.parity",
                            format!("unknown parity \"{other}\"; expected \"even\" or \"odd\""),
                        ))
                    }
                },
            };
            WitnessSpec::ParityAnnulus {
                start: req_u64("start")?,
                factor: req_u64("factor")?,
                odd,
            }
        }
        "tail_sign" => WitnessSpec::TailSign {
            cutoff: req_u64("cutoff")?,
        },
        _ => unreachable!("family validated above"),
    };
    Ok(Some(spec))
}

/// Parses a problem spec from JSON bytes. Unknown fields, wrong types, and
/// missing required fields are schema errors naming the offending path.
pub fn parse_problem(bytes: &[u8]) -> Result<ProblemSpec, IoError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IoError::Json(e.to_string()))?;
    let root: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let obj = as_object(&root, "$")?;
    reject_unknown(
        obj,
        "$",
        &[
            "tree",
            "symbol",
            "pair",
            "little",
            "search",
            "tolerances",
            "witness",
        ],
    )?;

    let tree = parse_tree(obj.get("tree"))?;
    let symbol = parse_symbol(obj.get("symbol"), &tree)?;
    let pair_code = get_str(req_field(obj, "$", "pair")?, "$.pair")?;
    let pair = SpacePair::parse(pair_code).ok_or_else(|| {
        schema(
            "$.pair",
            format!(
                "unknown pair code \"{pair_code}\"; expected one of \
                 \"Lw->L\", \"L->Lw\", \"Lw->Linf\", \"Linf->Lw\""
            ),
        )
    })?;
    let little = match obj.get("little") {
        Some(v) => get_bool(v, "$.little")?,
        None => false,
    };
    let search = parse_search(obj.get("search"))?;
    let tolerances = parse_tolerances(obj.get("tolerances"))?;
    let witness = parse_witness(obj.get("witness"))?;

    Ok(ProblemSpec {
        tree,
        symbol,
        pair,
        little,
        search,
        tolerances,
        witness,
    })
}

// ---------------------------------------------------------------------------
// JSON writing
// ---------------------------------------------------------------------------

/// Finite floats as 17-significant-digit scientific notation; the JSON
/// emitters quote the non-finite tokens, the CSV emitter leaves them bare.
fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Minimal streaming JSON writer with deterministic output.
struct JsonOut {
    buf: String,
    first: Vec<bool>,
}

impl JsonOut {
    fn new() -> JsonOut {
        JsonOut {
            buf: String::new(),
            first: vec![true],
        }
    }

    fn comma(&mut self) {
        let f = self.first.last_mut().expect("writer frame");
        if *f {
            *f = false;
        } else {
            self.buf.push(',');
        }
    }

    fn obj(&mut self) {
        self.buf.push('{');
        self.first.push(true);
    }

    fn end_obj(&mut self) {
        self.buf.push('}');
        self.first.pop();
    }

    fn arr(&mut self) {
        self.buf.push('[');
        self.first.push(true);
    }

    fn end_arr(&mut self) {
        self.buf.push(']');
        self.first.pop();
    }

    fn key(&mut self, k: &str) {
        self.comma();
        self.write_string(k);
        self.buf.push(':');
    }

    /// Starts the next array element.
    fn elem(&mut self) {
        self.comma();
    }

    fn write_string(&mut self, s: &str) {
        self.buf.push('"');
        for c in s.chars() {
            match c {
                '"' => self.buf.push_str("\\\""),
                '\\' => self.buf.push_str("\\\\"),
                '\n' => self.buf.push_str("\\n"),
                '\r' => self.buf.push_str("\\r"),
                '\t' => self.buf.push_str("\\t"),
                c if (c as u32) < 0x20 => {
                    self.buf.push_str(&format!("\\u{:04x}", c as u32));
                }
                c => self.buf.push(c),
            }
        }
        self.buf.push('"');
    }

    fn str_val(&mut self, s: &str) {
        self.write_string(s);
    }

    fn f64_val(&mut self, x: f64) {
        if x.is_finite() {
            self.buf.push_str(&fmt_f64(x));
        } else {
            self.write_string(&fmt_f64(x));
        }
    }

    fn u64_val(&mut self, n: u64) {
        self.buf.push_str(&n.to_string());
    }

    fn bool_val(&mut self, b: bool) {
        self.buf.push_str(if b { "true" } else { "false" });
    }

    fn null_val(&mut self) {
        self.buf.push_str("null");
    }

    fn finish(mut self) -> Vec<u8> {
        self.buf.push('\n');
        self.buf.into_bytes()
    }
}

/// Emits the canonical JSON form of a spec; `parse_problem` on the output
/// reproduces the spec field for field.
pub fn emit_problem(spec: &ProblemSpec) -> Vec<u8> {
    let mut j = JsonOut::new();
    j.obj();

    j.key("tree");
    j.obj();
    match &spec.tree {
        TreeSpec::Homogeneous {
            branching,
            root_degree,
            depth,
        } => {
            j.key("kind");
            j.str_val("homogeneous");
            j.key("branching");
            j.u64_val(*branching as u64);
            j.key("root_degree");
            j.u64_val(*root_degree as u64);
            j.key("depth");
            j.u64_val(*depth as u64);
        }
        TreeSpec::Explicit { parents } => {
            j.key("kind");
            j.str_val("explicit");
            j.key("parents");
            j.arr();
            for &p in parents {
                j.elem();
                j.u64_val(p as u64);
            }
            j.end_arr();
        }
    }
    j.end_obj();

    j.key("symbol");
    j.obj();
    match &spec.symbol {
        SymbolSpec::Radial { expr } => {
            j.key("kind");
            j.str_val("radial");
            j.key("expr");
            j.str_val(expr);
        }
        SymbolSpec::Table { values } => {
            j.key("kind");
            j.str_val("table");
            j.key("values");
            j.arr();
            for v in values {
                j.elem();
                j.arr();
                j.elem();
                j.f64_val(v.re);
                j.elem();
                j.f64_val(v.im);
                j.end_arr();
            }
            j.end_arr();
        }
    }
    j.end_obj();

    j.key("pair");
    j.str_val(spec.pair.code());
    j.key("little");
    j.bool_val(spec.little);

    j.key("search");
    j.obj();
    j.key("budget");
    j.u64_val(spec.search.budget);
    j.key("seed");
    j.u64_val(spec.search.seed);
    j.key("strategy");
    j.str_val(spec.search.strategy.as_str());
    j.end_obj();

    j.key("tolerances");
    j.obj();
    j.key("bracket_slack");
    j.f64_val(spec.tolerances.bracket_slack);
    j.key("zero");
    j.f64_val(spec.tolerances.zero);
    j.key("relative");
    j.f64_val(spec.tolerances.relative);
    j.end_obj();

    if let Some(w) = &spec.witness {
        j.key("witness");
        j.obj();
        j.key("family");
        j.str_val(w.family_name());
        match w {
            WitnessSpec::PointMass { level } | WitnessSpec::IndicatorVertex { level } => {
                j.key("level");
                j.u64_val(*level);
            }
            WitnessSpec::Constant | WitnessSpec::SignAlternating => {}
            WitnessSpec::CappedLog { cap }
            | WitnessSpec::SquaredLogRamp { cap }
            | WitnessSpec::SqrtWindowRamp { cap }
            | WitnessSpec::HarmonicRamp { cap }
            | WitnessSpec::RadialCap { cap }
            | WitnessSpec::QuadraticRamp { cap }
            | WitnessSpec::HalfWindowRamp { cap } => {
                j.key("cap");
                j.u64_val(*cap);
            }
            WitnessSpec::LogPower { exponent } => {
                j.key("exponent");
                j.f64_val(*exponent);
            }
            WitnessSpec::LogRampP { cap, power } => {
                j.key("cap");
                j.u64_val(*cap);
                j.key("power");
                j.u64_val(*power as u64);
            }
            WitnessSpec::ParityAnnulus { start, factor, odd } => {
                j.key("start");
                j.u64_val(*start);
                j.key("factor");
                j.u64_val(*factor);
                j.key("parity");
                j.str_val(if *odd { "odd" } else { "even" });
            }
            WitnessSpec::TailSign { cutoff } => {
                j.key("cutoff");
                j.u64_val(*cutoff);
            }
        }
        j.end_obj();
    }

    j.end_obj();
    j.finish()
}

// ---------------------------------------------------------------------------
// Materialized inputs
// ---------------------------------------------------------------------------

/// Everything a subcommand needs, built once from the spec.
struct Inputs {
    tree: Tree,
    psi: TreeFunction,
    radial: bool,
    quantities: SymbolQuantities,
    membership: SpaceMembership,
    profile: LevelProfile,
}

fn build_inputs(spec: &ProblemSpec, limits: &TreeLimits) -> Result<Inputs, IoError> {
    let tree = match &spec.tree {
        TreeSpec::Homogeneous {
            branching,
            root_degree,
            depth,
        } => Tree::homogeneous(*branching, *root_degree, *depth, limits)?,
        TreeSpec::Explicit { parents } => Tree::from_parents(parents, limits)?,
    };
    let (psi, radial, quantities, membership) = match &spec.symbol {
        SymbolSpec::Radial { expr } => {
            let parsed =
                RadialExpr::parse(expr).map_err(|e| schema("$.symbol.expr", e.to_string()))?;
            let psi = TreeFunction::from_radial(&tree, &parsed)?;
            let quantities = quantities_from_radial(&parsed)?;
            let membership = membership_from_radial(&parsed)?;
            (psi, true, quantities, membership)
        }
        SymbolSpec::Table { values } => {
            let psi = TreeFunction::from_values(&tree, values)?;
            let profile = psi.level_profile(&tree);
            let quantities = quantities_from_profile(&profile, modulus(psi.value(0)));
            (psi, false, quantities, membership_from_table())
        }
    };
    let profile = psi.level_profile(&tree);
    Ok(Inputs {
        tree,
        psi,
        radial,
        quantities,
        membership,
        profile,
    })
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

fn tail_estimate_json(j: &mut JsonOut, name: &str, est: &TailEstimate) {
    j.key(name);
    j.obj();
    j.key("value");
    j.f64_val(est.value);
    j.key("status");
    j.str_val(est.status.as_str());
    j.key("attained_level");
    match est.attained_level {
        Some(l) => j.u64_val(l),
        None => j.null_val(),
    }
    j.end_obj();
}

fn describe_quantities(q: &SymbolQuantities, names: &[&str]) -> String {
    let entries = q.entries();
    let mut parts = Vec::with_capacity(names.len());
    for name in names {
        if let Some((_, est)) = entries.iter().find(|(n, _)| n == name) {
            parts.push(format!("{name} = {} ({})", est.value, est.status.as_str()));
        }
    }
    format!("decided by {}", parts.join(", "))
}

/// The quantities each verdict reads, per pair.
fn verdict_drivers(pair: SpacePair, little: bool) -> (Vec<&'static str>, Vec<&'static str>) {
    match pair {
        SpacePair::WeightedToLipschitz => (
            vec!["log_weighted_diff_sup", "ratio_sup"],
            vec![
                "log_weighted_diff_sup",
                "ratio_sup",
                "ratio_tail",
                "log_weighted_diff_tail",
            ],
        ),
        SpacePair::LipschitzToWeighted => (
            vec!["square_weighted_diff_sup", "linear_weighted_abs_sup"],
            vec![
                "square_weighted_diff_sup",
                "linear_weighted_abs_sup",
                "linear_abs_tail",
                "square_weighted_diff_tail",
            ],
        ),
        SpacePair::WeightedToSup => (
            vec!["log_plus_abs_sup"],
            vec!["log_plus_abs_sup", "log_abs_tail"],
        ),
        SpacePair::SupToWeighted => {
            if little {
                (vec!["pair_weighted_tail"], vec!["pair_weighted_tail"])
            } else {
                (
                    vec!["pair_weighted_sup"],
                    vec!["pair_weighted_sup", "pair_weighted_tail"],
                )
            }
        }
    }
}

fn classification_json(j: &mut JsonOut, cls: &OperatorClassification, q: &SymbolQuantities) {
    let (bounded_names, compact_names) = verdict_drivers(cls.pair, cls.little_target);
    j.key("classification");
    j.obj();
    j.key("bounded");
    j.str_val(cls.bounded.as_str());
    j.key("bounded_reason");
    j.str_val(&describe_quantities(q, &bounded_names));
    j.key("compact");
    j.str_val(cls.compact.as_str());
    j.key("compact_reason");
    j.str_val(&describe_quantities(q, &compact_names));
    j.key("bounded_below");
    match cls.bounded_below {
        Some(v) => j.str_val(v.as_str()),
        None => j.null_val(),
    }
    j.key("bounded_below_reason");
    match cls.bounded_below {
        Some(_) => j.str_val(&describe_quantities(q, &["ratio_inf"])),
        None => j.null_val(),
    }
    j.end_obj();
}

fn diagnostics_json(j: &mut JsonOut, inputs: &Inputs, cls: &OperatorClassification) {
    let q = &inputs.quantities;
    j.key("diagnostics");
    j.obj();
    j.key("root_modulus");
    j.f64_val(q.root_modulus);
    j.key("quantities");
    j.obj();
    for (name, est) in q.entries() {
        tail_estimate_json(j, name, est);
    }
    j.end_obj();
    classification_json(j, cls, q);
    j.key("membership");
    j.obj();
    for (name, status) in [
        ("lipschitz", inputs.membership.lipschitz),
        ("little_lipschitz", inputs.membership.little_lipschitz),
        ("weighted", inputs.membership.weighted),
        ("little_weighted", inputs.membership.little_weighted),
    ] {
        j.key(name);
        j.str_val(status.as_str());
    }
    j.end_obj();
    j.end_obj();
}

fn bracket_fields_json(j: &mut JsonOut, b: &Bracket) {
    j.key("lower");
    j.f64_val(b.lower);
    j.key("lower_provenance");
    j.str_val(&b.lower_provenance);
    j.key("lower_status");
    j.str_val(b.lower_status.as_str());
    j.key("upper");
    j.f64_val(b.upper);
    j.key("upper_provenance");
    j.str_val(&b.upper_provenance);
    j.key("upper_status");
    j.str_val(b.upper_status.as_str());
}

fn norm_json(j: &mut JsonOut, analysis: &NormAnalysis) {
    j.key("norm");
    j.obj();
    bracket_fields_json(j, &analysis.bracket);
    j.key("certificate");
    match &analysis.certificate {
        Some(c) => {
            j.obj();
            j.key("label");
            j.str_val(&c.label);
            j.key("source_norm");
            j.f64_val(c.source_norm);
            j.key("value");
            j.f64_val(c.value);
            j.end_obj();
        }
        None => j.null_val(),
    }
    j.key("weight_gap");
    match &analysis.weight_gap {
        Some(g) => {
            j.obj();
            j.key("probe_weight_sup");
            j.f64_val(g.probe_weight_sup);
            j.key("full_weight_sup");
            j.f64_val(g.full_weight_sup);
            j.end_obj();
        }
        None => j.null_val(),
    }
    j.end_obj();
}

fn essential_json(j: &mut JsonOut, b: &Bracket) {
    j.key("essential");
    j.obj();
    bracket_fields_json(j, b);
    j.end_obj();
}

fn isometry_json(j: &mut JsonOut, report: &IsometryReport) {
    j.key("isometry");
    j.obj();
    j.key("defect");
    j.f64_val(report.defect);
    j.key("probe");
    j.str_val(&report.probe);
    j.key("probe_norm");
    j.f64_val(report.probe_norm);
    j.key("image_norm");
    j.f64_val(report.image_norm);
    j.end_obj();
}

/// Weighted per-level readouts, mirroring the diagnostics arithmetic so the
/// CSV columns and the JSON quantities agree exactly on shared values.
fn profile_row(n: usize, profile: &LevelProfile) -> [f64; 9] {
    let a = profile.sup_abs[n];
    let d = profile.sup_diff[n];
    let p = profile.sup_pair[n];
    let lf = n as f64;
    let ratio = a / (lf + 1.0);
    let lin_abs = a * (lf + 1.0);
    let log_plus = if n >= 1 { a * (1.0 + lf.ln()) } else { a };
    let log_diff = if n >= 1 {
        d * (1.0 + lf).ln()
    } else {
        f64::NAN
    };
    let sq_diff = if n >= 1 { d * lf * lf } else { f64::NAN };
    let pair_w = if n >= 1 { p * lf } else { f64::NAN };
    [a, d, p, ratio, log_diff, sq_diff, lin_abs, log_plus, pair_w]
}

const PROFILE_COLUMNS: [&str; 9] = [
    "sup_abs",
    "sup_diff",
    "sup_pair",
    "ratio",
    "log_weighted_diff",
    "square_weighted_diff",
    "linear_weighted_abs",
    "log_plus_abs",
    "pair_weighted",
];

fn level_profile_json(j: &mut JsonOut, profile: &LevelProfile) {
    j.key("level_profile");
    j.arr();
    for n in 0..=profile.depth() {
        j.elem();
        j.obj();
        j.key("level");
        j.u64_val(n as u64);
        let row = profile_row(n, profile);
        for (name, x) in PROFILE_COLUMNS.iter().zip(row) {
            j.key(name);
            j.f64_val(x);
        }
        j.end_obj();
    }
    j.end_arr();
}

fn level_profile_csv(profile: &LevelProfile) -> Vec<u8> {
    let mut out = String::from("level");
    for name in PROFILE_COLUMNS {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for n in 0..=profile.depth() {
        out.push_str(&n.to_string());
        for x in profile_row(n, profile) {
            out.push(',');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn tree_json(j: &mut JsonOut, spec: &ProblemSpec, tree: &Tree) {
    j.key("tree");
    j.obj();
    match &spec.tree {
        TreeSpec::Homogeneous {
            branching,
            root_degree,
            ..
        } => {
            j.key("kind");
            j.str_val("homogeneous");
            j.key("branching");
            j.u64_val(*branching as u64);
            j.key("root_degree");
            j.u64_val(*root_degree as u64);
        }
        TreeSpec::Explicit { .. } => {
            j.key("kind");
            j.str_val("explicit");
        }
    }
    j.key("depth");
    j.u64_val(tree.depth() as u64);
    j.key("vertex_count");
    j.u64_val(tree.vertex_count() as u64);
    j.end_obj();
}

fn symbol_json(j: &mut JsonOut, spec: &ProblemSpec) {
    j.key("symbol");
    j.obj();
    match &spec.symbol {
        SymbolSpec::Radial { expr } => {
            j.key("kind");
            j.str_val("radial");
            j.key("expr");
            j.str_val(expr);
        }
        SymbolSpec::Table { values } => {
            j.key("kind");
            j.str_val("table");
            j.key("length");
            j.u64_val(values.len() as u64);
        }
    }
    j.end_obj();
}

/// Echoes the search configuration a report was produced under, so a report
/// is reproducible from its own bytes after `--seed` or spec edits.
fn search_json(j: &mut JsonOut, cfg: &SearchConfig) {
    j.key("search");
    j.obj();
    j.key("budget");
    j.u64_val(cfg.budget);
    j.key("seed");
    j.u64_val(cfg.seed);
    j.key("strategy");
    j.str_val(cfg.strategy.as_str());
    j.end_obj();
}

fn render_analyze(spec: &ProblemSpec, inputs: &Inputs) -> Result<Vec<u8>, IoError> {
    let cls = classify(&inputs.quantities, spec.pair, spec.little);
    let analysis = norm_bracket(
        spec.pair,
        &inputs.psi,
        &inputs.tree,
        &inputs.quantities,
        inputs.radial,
        &spec.search,
    )?;
    let essential = essential_norm_bracket(spec.pair, &inputs.quantities)?;
    let iso = isometry_defect(spec.pair, &inputs.psi, &inputs.tree)?;

    let mut j = JsonOut::new();
    j.obj();
    j.key("pair");
    j.str_val(spec.pair.code());
    j.key("little");
    j.bool_val(spec.little);
    tree_json(&mut j, spec, &inputs.tree);
    symbol_json(&mut j, spec);
    search_json(&mut j, &spec.search);
    diagnostics_json(&mut j, inputs, &cls);
    norm_json(&mut j, &analysis);
    essential_json(&mut j, &essential);
    isometry_json(&mut j, &iso);
    level_profile_json(&mut j, &inputs.profile);
    j.end_obj();
    Ok(j.finish())
}

fn render_witness(spec: &ProblemSpec, inputs: &Inputs) -> Result<Vec<u8>, IoError> {
    let Some(wspec) = &spec.witness else {
        return Err(schema(
            "$.witness",
            "the witness subcommand needs a witness object",
        ));
    };
    let w = witness::make_witness(wspec, &inputs.tree, Some(&inputs.psi))?;
    let mut j = JsonOut::new();
    j.obj();
    j.key("family");
    j.str_val(w.spec.family_name());
    j.key("display");
    j.str_val(&w.spec.to_string());
    j.key("source_space");
    j.str_val(w.source.name());
    j.key("source_norm");
    j.f64_val(w.norm);
    j.key("closed_form_norm");
    match w.closed_form_norm {
        Some(x) => j.f64_val(x),
        None => j.null_val(),
    }
    j.key("infinite_tree_norm");
    match w.infinite_tree_norm {
        Some(x) => j.f64_val(x),
        None => j.null_val(),
    }
    j.key("values");
    j.arr();
    for input in 0..inputs.tree.vertex_count() as u32 {
        let z = w.function.value(inputs.tree.id_from_input(input));
        j.elem();
        j.arr();
        j.elem();
        j.f64_val(z.re);
        j.elem();
        j.f64_val(z.im);
        j.end_arr();
    }
    j.end_arr();
    j.end_obj();
    Ok(j.finish())
}

// ---------------------------------------------------------------------------
// Verify suite
// ---------------------------------------------------------------------------

/// Outcome of one named invariant check.
#[derive(Clone, Debug)]
pub struct InvariantResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation, 0 when the invariant holds everywhere.
    pub max_violation: f64,
    pub detail: String,
}

impl InvariantResult {
    fn judged(name: &'static str, max_violation: f64, tol: f64, detail: String) -> InvariantResult {
        InvariantResult {
            name,
            passed: max_violation <= tol,
            max_violation,
            detail,
        }
    }

    fn skipped(name: &'static str, detail: &str) -> InvariantResult {
        InvariantResult {
            name,
            passed: true,
            max_violation: 0.0,
            detail: detail.to_string(),
        }
    }
}

fn random_functions(tree: &Tree, seed: u64, count: usize) -> Vec<TreeFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let values: Vec<Complex64> = (0..tree.vertex_count())
                .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                .collect();
            TreeFunction::from_internal_values(values)
        })
        .collect()
}

/// Relative excess of `lhs` over the bound `rhs`, scaled so tiny bounds do
/// not inflate rounding noise.
fn rel_excess(lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs().max(1.0);
    (lhs - rhs) / scale
}

fn check_tree_structure(tree: &Tree) -> InvariantResult {
    let mut bad = 0u64;
    for v in 1..tree.vertex_count() as u32 {
        let p = tree.parent(v).expect("non-root has a parent");
        if p >= v || tree.level(p) + 1 != tree.level(v) {
            bad += 1;
        }
        if tree.ancestor_at_level(v, tree.level(v)) != v || tree.ancestor_at_level(v, 0) != 0 {
            bad += 1;
        }
    }
    for v in 0..tree.vertex_count() as u32 {
        for c in tree.children(v) {
            if tree.parent(c) != Some(v) {
                bad += 1;
            }
        }
    }
    InvariantResult::judged(
        "tree_parent_levels",
        bad as f64,
        0.0,
        format!("checked {} vertices", tree.vertex_count()),
    )
}

/// Per-function scalars the growth bounds read, computed once per function.
struct GrowthNorms {
    root: f64,
    lipschitz_seminorm: f64,
    weighted_norm: f64,
    weighted_seminorm: f64,
}

fn check_growth(
    name: &'static str,
    tree: &Tree,
    functions: &[TreeFunction],
    tol: f64,
    bound: impl Fn(&GrowthNorms, u32) -> f64,
) -> InvariantResult {
    let mut worst: f64 = f64::NEG_INFINITY;
    for f in functions {
        let norms = GrowthNorms {
            root: modulus(f.value(0)),
            lipschitz_seminorm: f.lipschitz_seminorm(tree),
            weighted_norm: f.weighted_norm(tree),
            weighted_seminorm: f.weighted_seminorm(tree),
        };
        for v in 0..tree.vertex_count() as u32 {
            let lhs = modulus(f.value(v));
            let rhs = bound(&norms, tree.level(v));
            if rhs.is_nan() {
                continue;
            }
            worst = worst.max(rel_excess(lhs, rhs));
        }
    }
    InvariantResult::judged(
        name,
        worst.max(0.0),
        tol,
        format!(
            "{} functions, max relative excess {:e}",
            functions.len(),
            worst
        ),
    )
}

fn check_ladder_monotone(inputs: &Inputs) -> InvariantResult {
    if !inputs.radial {
        return InvariantResult::skipped(
            "ladder_monotone",
            "skipped: tabulated symbols carry no tail ladders",
        );
    }
    let mut worst: f64 = 0.0;
    let mut rungs_seen = 0usize;
    for (name, est) in inputs.quantities.entries() {
        let rungs = &est.ladder.rungs;
        rungs_seen += rungs.len();
        // Rungs run from the widest suffix (exponent 0) to the narrowest;
        // suprema may only shrink along that order, infima may only grow.
        for w in rungs.windows(2) {
            let (wide, narrow) = (w[0].value, w[1].value);
            if narrow.is_nan() || wide.is_nan() {
                continue;
            }
            let jump = if name == "ratio_inf" {
                wide - narrow
            } else {
                narrow - wide
            };
            if jump.is_finite() {
                worst = worst.max(jump);
            }
        }
    }
    InvariantResult::judged(
        "ladder_monotone",
        worst,
        0.0,
        format!("{rungs_seen} rungs across all quantities"),
    )
}

fn check_tail_below_sup(inputs: &Inputs) -> InvariantResult {
    if !inputs.radial {
        return InvariantResult::skipped(
            "tail_below_sup",
            "skipped: tabulated symbols carry no tail limits",
        );
    }
    let q = &inputs.quantities;
    let pairs: [(&str, &TailEstimate, &TailEstimate); 6] = [
        ("ratio", &q.ratio_tail, &q.ratio_sup),
        (
            "log_weighted_diff",
            &q.log_weighted_diff_tail,
            &q.log_weighted_diff_sup,
        ),
        ("linear_abs", &q.linear_abs_tail, &q.linear_weighted_abs_sup),
        (
            "square_weighted_diff",
            &q.square_weighted_diff_tail,
            &q.square_weighted_diff_sup,
        ),
        ("log_abs", &q.log_abs_tail, &q.log_plus_abs_sup),
        ("pair_weighted", &q.pair_weighted_tail, &q.pair_weighted_sup),
    ];
    let mut worst: f64 = 0.0;
    for (_, tail, sup) in pairs {
        if tail.value.is_nan() || sup.value.is_nan() {
            continue;
        }
        if tail.value.is_finite() {
            let excess = tail.value - sup.value;
            if excess.is_finite() {
                worst = worst.max(excess);
            } else if excess.is_nan() {
                continue;
            }
        } else if tail.value == f64::INFINITY && sup.value != f64::INFINITY {
            worst = f64::INFINITY;
        }
    }
    InvariantResult::judged(
        "tail_below_sup",
        worst,
        0.0,
        "six tail/sup pairs compared".to_string(),
    )
}

fn check_radial_table_agreement(inputs: &Inputs, expr_text: Option<&str>) -> InvariantResult {
    let Some(text) = expr_text else {
        return InvariantResult::skipped(
            "radial_table_agreement",
            "skipped: the radial fast path is not in use",
        );
    };
    let expr = match RadialExpr::parse(text) {
        Ok(e) => e,
        Err(_) => return InvariantResult::skipped("radial_table_agreement", "skipped: unparsable"),
    };
    let mut by_level = Vec::with_capacity(inputs.profile.depth() + 1);
    for n in 0..=inputs.profile.depth() as u64 {
        match expr.eval(n) {
            Ok(x) => by_level.push(x),
            Err(_) => {
                return InvariantResult::skipped("radial_table_agreement", "skipped: eval error")
            }
        }
    }
    let mut mismatches = 0u64;
    for n in 0..=inputs.profile.depth() {
        let a = modulus(Complex64::new(by_level[n], 0.0));
        if a.to_bits() != inputs.profile.sup_abs[n].to_bits() {
            mismatches += 1;
        }
        if n >= 1 {
            let d = modulus(Complex64::new(by_level[n] - by_level[n - 1], 0.0));
            let p = a + modulus(Complex64::new(by_level[n - 1], 0.0));
            if d.to_bits() != inputs.profile.sup_diff[n].to_bits() {
                mismatches += 1;
            }
            if p.to_bits() != inputs.profile.sup_pair[n].to_bits() {
                mismatches += 1;
            }
        }
    }
    InvariantResult::judged(
        "radial_table_agreement",
        mismatches as f64,
        0.0,
        format!("{} levels compared bit for bit", inputs.profile.depth() + 1),
    )
}

/// Truncation-tail quantities of the symbol above a cut: the largest
/// `|psi| / (level + 1)` and the largest `log(level) * |difference|`.
fn symbol_tail_bounds(profile: &LevelProfile, cut: usize) -> (f64, f64) {
    let mut ratio: f64 = 0.0;
    let mut log_diff: f64 = 0.0;
    for m in (cut + 1)..=profile.depth() {
        let a = profile.sup_abs[m];
        let d = profile.sup_diff[m];
        if !a.is_nan() {
            ratio = ratio.max(a / (m as f64 + 1.0));
        }
        if !d.is_nan() {
            log_diff = log_diff.max(d * (m as f64).ln());
        }
    }
    (ratio, log_diff)
}

fn check_tail_cut_chain(inputs: &Inputs, seed: u64, tol: f64) -> InvariantResult {
    let tree = &inputs.tree;
    let depth = tree.depth() as usize;
    if depth < 2 {
        return InvariantResult::skipped("tail_cut_norm_chain", "skipped: tree too shallow");
    }
    let mut cuts = vec![1usize, depth / 4, depth / 2];
    cuts.retain(|&n| n >= 1 && n < depth);
    cuts.dedup();
    let functions = random_functions(tree, seed, 40);
    let mut worst: f64 = 0.0;
    let mut checks = 0usize;
    for &cut in &cuts {
        let (a_cut, b_cut) = symbol_tail_bounds(&inputs.profile, cut);
        let factor = (cut as f64 + 2.0) / (cut as f64 + 1.0) * a_cut + b_cut;
        for f in &functions {
            let tail = f.tail_part(tree, cut as u32);
            let lhs = apply(&inputs.psi, &tail).lipschitz_norm(tree);
            let rhs = factor * f.weighted_norm(tree);
            worst = worst.max(rel_excess(lhs, rhs));
            checks += 1;
        }
    }
    InvariantResult::judged(
        "tail_cut_norm_chain",
        worst.max(0.0),
        tol,
        format!("{checks} tail cuts bounded by the symbol's truncation tails"),
    )
}

fn check_profile_shape(inputs: &Inputs) -> InvariantResult {
    let profile = &inputs.profile;
    let depth = inputs.tree.depth() as usize;
    if profile.depth() != depth {
        return InvariantResult {
            name: "level_profile_shape",
            passed: false,
            max_violation: (profile.depth() as f64 - depth as f64).abs(),
            detail: format!("expected {} rows, found {}", depth + 1, profile.depth() + 1),
        };
    }
    // The profile-derived quantities must equal the column maxima exactly:
    // both sides share the same per-level arithmetic.
    let q = quantities_from_profile(profile, modulus(inputs.psi.value(0)));
    let col_max = |col: usize, include_root: bool| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for n in 0..=depth {
            if n == 0 && !include_root {
                continue;
            }
            let x = profile_row(n, profile)[col];
            if !x.is_nan() && x > best {
                best = x;
            }
        }
        if best == f64::NEG_INFINITY {
            0.0
        } else {
            best
        }
    };
    let comparisons = [
        (col_max(3, true), q.ratio_sup.value),
        (col_max(4, false), q.log_weighted_diff_sup.value),
        (col_max(5, false), q.square_weighted_diff_sup.value),
        (col_max(6, true), q.linear_weighted_abs_sup.value),
        (col_max(7, true), q.log_plus_abs_sup.value),
        (
            col_max(8, false) + modulus(inputs.psi.value(0)),
            q.pair_weighted_sup.value,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (csv, json) in comparisons {
        let diff = (csv - json).abs();
        if diff.is_nan() {
            worst = f64::INFINITY;
        } else {
            worst = worst.max(diff);
        }
    }
    InvariantResult::judged(
        "level_profile_shape",
        worst,
        0.0,
        format!(
            "{} rows; six column maxima against the report quantities",
            depth + 1
        ),
    )
}

fn verify_suite(
    spec: &ProblemSpec,
    inputs: &Inputs,
    limits: &TreeLimits,
) -> Result<Vec<InvariantResult>, IoError> {
    let tree = &inputs.tree;
    let tol = spec.tolerances;
    let mut rows = Vec::new();

    rows.push(check_tree_structure(tree));

    let mut functions = random_functions(tree, spec.search.seed.wrapping_add(0x6c69_7074), 120);
    functions.push(inputs.psi.clone());
    rows.push(check_growth(
        "growth_linear",
        tree,
        &functions,
        tol.relative,
        |f, level| f.root + level as f64 * f.lipschitz_seminorm,
    ));
    rows.push(check_growth(
        "growth_log_weighted",
        tree,
        &functions,
        tol.relative,
        |f, level| {
            if level == 0 {
                f64::NAN
            } else {
                (1.0 + (level as f64).ln()) * f.weighted_norm
            }
        },
    ));
    rows.push(check_growth(
        "growth_log_seminorm",
        tree,
        &functions,
        tol.relative,
        |f, level| f.root + 2.0 * (1.0 + level as f64).ln() * f.weighted_seminorm,
    ));

    rows.push(check_ladder_monotone(inputs));
    rows.push(check_tail_below_sup(inputs));
    let expr_text = match &spec.symbol {
        SymbolSpec::Radial { expr } => Some(expr.as_str()),
        SymbolSpec::Table { .. } => None,
    };
    rows.push(check_radial_table_agreement(inputs, expr_text));

    // Bracket coherence; a bracket inversion is reported as a failed row
    // rather than aborting the suite.
    let analysis = norm_bracket(
        spec.pair,
        &inputs.psi,
        tree,
        &inputs.quantities,
        inputs.radial,
        &spec.search,
    );
    match &analysis {
        Ok(a) => {
            let b = &a.bracket;
            rows.push(InvariantResult::judged(
                "norm_bracket_order",
                (b.lower - b.upper).max(0.0),
                tol.bracket_slack,
                format!("lower {} vs upper {}", b.lower, b.upper),
            ));
            match &a.certificate {
                Some(c) => {
                    // Recompute straight from the stored probe function.
                    let target = witness::target_space(spec.pair);
                    let image = target.norm(&apply(&inputs.psi, &c.function), tree);
                    let ratio = if c.source_norm > 0.0 {
                        image / c.source_norm
                    } else {
                        0.0
                    };
                    let rel = (ratio - c.value).abs() / c.value.abs().max(1.0);
                    rows.push(InvariantResult::judged(
                        "norm_witness_recompute",
                        rel,
                        tol.relative,
                        format!("certificate {} recomputed to {ratio}", c.label),
                    ));
                }
                None => rows.push(InvariantResult::skipped(
                    "norm_witness_recompute",
                    "skipped: no certificate was produced",
                )),
            }
        }
        Err(OperatorError::BracketInversion { lower, upper, .. }) => {
            rows.push(InvariantResult {
                name: "norm_bracket_order",
                passed: false,
                max_violation: lower - upper,
                detail: format!("certified lower {lower} exceeds the formula upper {upper}"),
            });
            rows.push(InvariantResult::skipped(
                "norm_witness_recompute",
                "skipped: norm bracket unavailable",
            ));
        }
        Err(e) => return Err(e.clone().into()),
    }

    let essential = essential_norm_bracket(spec.pair, &inputs.quantities);
    match &essential {
        Ok(b) => {
            rows.push(InvariantResult::judged(
                "essential_bracket_order",
                (b.lower - b.upper).max(0.0),
                tol.bracket_slack,
                format!("lower {} vs upper {}", b.lower, b.upper),
            ));
            let norm_upper = match &analysis {
                Ok(a) => a.bracket.upper,
                Err(_) => f64::INFINITY,
            };
            let excess = if norm_upper.is_finite() {
                (b.upper - norm_upper).max(0.0)
            } else {
                0.0
            };
            rows.push(InvariantResult::judged(
                "essential_below_norm",
                excess,
                tol.bracket_slack,
                format!("essential upper {} vs norm upper {norm_upper}", b.upper),
            ));
        }
        Err(OperatorError::BracketInversion { lower, upper, .. }) => {
            rows.push(InvariantResult {
                name: "essential_bracket_order",
                passed: false,
                max_violation: lower - upper,
                detail: format!("essential lower {lower} exceeds upper {upper}"),
            });
            rows.push(InvariantResult::skipped(
                "essential_below_norm",
                "skipped: essential bracket unavailable",
            ));
        }
        Err(e) => return Err(e.clone().into()),
    }

    let cls = classify(&inputs.quantities, spec.pair, spec.little);
    let coherent = cls.compact != Verdict::Yes || cls.bounded == Verdict::Yes;
    rows.push(InvariantResult {
        name: "compact_implies_bounded",
        passed: coherent,
        max_violation: if coherent { 0.0 } else { 1.0 },
        detail: format!(
            "bounded {}, compact {}",
            cls.bounded.as_str(),
            cls.compact.as_str()
        ),
    });

    rows.push(check_tail_cut_chain(
        inputs,
        spec.search.seed.wrapping_add(0x7461_696c),
        tol.relative,
    ));
    rows.push(check_profile_shape(inputs));

    // Full pipeline determinism: rebuild everything and compare bytes.
    match render_analyze(spec, inputs) {
        Ok(first) => {
            let fresh = build_inputs(spec, limits)?;
            let second = render_analyze(spec, &fresh)?;
            let identical = first == second;
            rows.push(InvariantResult {
                name: "report_determinism",
                passed: identical,
                max_violation: if identical { 0.0 } else { 1.0 },
                detail: format!("two full runs produced {} bytes", first.len()),
            });
        }
        Err(IoError::Operator(OperatorError::BracketInversion { .. })) => {
            rows.push(InvariantResult::skipped(
                "report_determinism",
                "skipped: analyze unavailable for this spec",
            ));
        }
        Err(e) => return Err(e),
    }

    let round = parse_problem(&emit_problem(spec));
    let round_ok = matches!(&round, Ok(p) if p == spec);
    rows.push(InvariantResult {
        name: "spec_round_trip",
        passed: round_ok,
        max_violation: if round_ok { 0.0 } else { 1.0 },
        detail: "parse(emit(spec)) compared field by field".to_string(),
    });

    Ok(rows)
}

fn render_verify_json(rows: &[InvariantResult]) -> Vec<u8> {
    let mut j = JsonOut::new();
    j.obj();
    j.key("invariants");
    j.arr();
    for r in rows {
        j.elem();
        j.obj();
        j.key("name");
        j.str_val(r.name);
        j.key("passed");
        j.bool_val(r.passed);
        j.key("max_violation");
        j.f64_val(r.max_violation);
        j.key("detail");
        j.str_val(&r.detail);
        j.end_obj();
    }
    j.end_arr();
    j.key("all_passed");
    j.bool_val(rows.iter().all(|r| r.passed));
    j.end_obj();
    j.finish()
}

fn render_verify_csv(rows: &[InvariantResult]) -> Vec<u8> {
    let mut out = String::from("name,passed,max_violation,detail\n");
    for r in rows {
        let detail = r.detail.replace('"', "\"\"");
        out.push_str(&format!(
            "{},{},{},\"{}\"\n",
            r.name,
            r.passed,
            fmt_f64(r.max_violation),
            detail
        ));
    }
    out.into_bytes()
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Bytes to print plus how many verify invariants failed (0 for the other
/// subcommands).
#[derive(Debug)]
pub struct RunOutput {
    pub bytes: Vec<u8>,
    pub failed_invariants: usize,
}

/// Runs one subcommand against a spec with the ambient resource limits.
pub fn run(
    sub: Subcommand,
    spec: &ProblemSpec,
    format: OutputFormat,
) -> Result<RunOutput, IoError> {
    run_with_limits(sub, spec, format, &TreeLimits::default())
}

pub fn run_with_limits(
    sub: Subcommand,
    spec: &ProblemSpec,
    format: OutputFormat,
    limits: &TreeLimits,
) -> Result<RunOutput, IoError> {
    let inputs = build_inputs(spec, limits)?;
    if format == OutputFormat::Csv && sub != Subcommand::Verify {
        return Ok(RunOutput {
            bytes: level_profile_csv(&inputs.profile),
            failed_invariants: 0,
        });
    }
    let bytes = match sub {
        Subcommand::Analyze => render_analyze(spec, &inputs)?,
        Subcommand::Norm => {
            let analysis = norm_bracket(
                spec.pair,
                &inputs.psi,
                &inputs.tree,
                &inputs.quantities,
                inputs.radial,
                &spec.search,
            )?;
            let mut j = JsonOut::new();
            j.obj();
            j.key("pair");
            j.str_val(spec.pair.code());
            search_json(&mut j, &spec.search);
            norm_json(&mut j, &analysis);
            j.end_obj();
            j.finish()
        }
        Subcommand::Essnorm => {
            let essential = essential_norm_bracket(spec.pair, &inputs.quantities)?;
            let mut j = JsonOut::new();
            j.obj();
            j.key("pair");
            j.str_val(spec.pair.code());
            essential_json(&mut j, &essential);
            j.end_obj();
            j.finish()
        }
        Subcommand::Classify => {
            let cls = classify(&inputs.quantities, spec.pair, spec.little);
            let mut j = JsonOut::new();
            j.obj();
            j.key("pair");
            j.str_val(spec.pair.code());
            j.key("little");
            j.bool_val(spec.little);
            diagnostics_json(&mut j, &inputs, &cls);
            j.end_obj();
            j.finish()
        }
        Subcommand::Witness => render_witness(spec, &inputs)?,
        Subcommand::Verify => {
            let rows = verify_suite(spec, &inputs, limits)?;
            let failed = rows.iter().filter(|r| !r.passed).count();
            let bytes = match format {
                OutputFormat::Json => render_verify_json(&rows),
                OutputFormat::Csv => render_verify_csv(&rows),
            };
            return Ok(RunOutput {
                bytes,
                failed_invariants: failed,
            });
        }
    };
    Ok(RunOutput {
        bytes,
        failed_invariants: 0,
    })
}
