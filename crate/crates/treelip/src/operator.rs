//! Operator-level analysis of M_ψ: norm and essential-norm brackets with
//! certified lower bounds, unit-ball search strategies, and isometry defects.
//!
//! Upper bounds come from the closed-form symbol quantities; every lower
//! bound is the exactly recomputed ratio ‖ψf‖_target / ‖f‖_source for a
//! stored, explicitly constructed probe f.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dd::Dd;
use crate::diagnostics::{SpacePair, SymbolQuantities};
use crate::function::{modulus, TreeFunction};
use crate::tail::TailStatus;
use crate::tree::Tree;
use crate::witness::{self, source_space, target_space, SourceSpace, WitnessSpec};

/// Absolute slack allowed before a bracket counts as inverted.
pub const BRACKET_SLACK: f64 = 1e-9;

/// The multiplication operator itself: pointwise product ψ·f.
pub fn apply(psi: &TreeFunction, f: &TreeFunction) -> TreeFunction {
    psi.multiply(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStrategy {
    WitnessOnly,
    CoordinateAscent,
    RandomBall,
}

impl SearchStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStrategy::WitnessOnly => "witness_only",
            SearchStrategy::CoordinateAscent => "coordinate_ascent",
            SearchStrategy::RandomBall => "random_ball",
        }
    }

    pub fn parse(s: &str) -> Option<SearchStrategy> {
        match s {
            "witness_only" => Some(SearchStrategy::WitnessOnly),
            "coordinate_ascent" => Some(SearchStrategy::CoordinateAscent),
            "random_ball" => Some(SearchStrategy::RandomBall),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub budget: u64,
    pub seed: u64,
    pub strategy: SearchStrategy,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            budget: 10_000,
            seed: 0,
            strategy: SearchStrategy::WitnessOnly,
        }
    }
}

/// Certified lower / formula upper pair for one operator quantity.
#[derive(Clone, Debug)]
pub struct Bracket {
    pub pair: SpacePair,
    pub lower: f64,
    /// Witness id or search trace that realizes `lower`.
    pub lower_provenance: String,
    pub lower_status: TailStatus,
    /// May be +infinity for unbounded symbols.
    pub upper: f64,
    /// Formula the upper bound evaluates.
    pub upper_provenance: String,
    pub upper_status: TailStatus,
}

impl Bracket {
    /// Hard ordering guard: lower may not exceed upper beyond the slack.
    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.lower > self.upper + BRACKET_SLACK {
            return Err(OperatorError::BracketInversion {
                pair: self.pair,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

/// The stored probe behind a certified lower bound; `value` equals
/// ‖ψ·function‖_target / source_norm recomputed from the stored data.
#[derive(Clone, Debug)]
pub struct CertifiedLower {
    pub label: String,
    pub function: TreeFunction,
    pub source_norm: f64,
    pub value: f64,
}

/// The two weighted sup quantities whose difference the lower search cannot
/// bridge for sup-target symbols: the probe weight log(1+n) against the
/// norm weight 1+log(n).
#[derive(Clone, Copy, Debug)]
pub struct WeightGap {
    pub probe_weight_sup: f64,
    pub full_weight_sup: f64,
}

#[derive(Clone, Debug)]
pub struct NormAnalysis {
    pub bracket: Bracket,
    pub certificate: Option<CertifiedLower>,
    pub weight_gap: Option<WeightGap>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("bracket inversion for {pair}: certified lower {lower} exceeds upper {upper} beyond the 1e-9 guard")]
    BracketInversion {
        pair: SpacePair,
        lower: f64,
        upper: f64,
    },
    #[error(transparent)]
    Witness(#[from] witness::WitnessError),
}

/// Trust-ranked combination: divergence dominates, then inconclusive, then
/// finite-sample, and only fully stabilized inputs stay stabilized.
fn combine_status(a: TailStatus, b: TailStatus) -> TailStatus {
    use TailStatus::*;
    if a == Diverged || b == Diverged {
        Diverged
    } else if a == Inconclusive || b == Inconclusive {
        Inconclusive
    } else if a == FiniteSample || b == FiniteSample {
        FiniteSample
    } else {
        Stabilized
    }
}

fn add_values(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        a + b
    }
}

/// Upper bound of the operator norm: formula value, name, and trust.
fn norm_upper(pair: SpacePair, q: &SymbolQuantities) -> (f64, String, TailStatus) {
    match pair {
        SpacePair::WeightedToLipschitz => (
            add_values(q.log_weighted_diff_sup.value, q.ratio_sup.value),
            "log_weighted_diff_sup + ratio_sup".to_string(),
            combine_status(q.log_weighted_diff_sup.status, q.ratio_sup.status),
        ),
        SpacePair::LipschitzToWeighted => (
            add_values(
                q.square_weighted_diff_sup.value,
                q.linear_weighted_abs_sup.value,
            ),
            "square_weighted_diff_sup + linear_weighted_abs_sup".to_string(),
            combine_status(
                q.square_weighted_diff_sup.status,
                q.linear_weighted_abs_sup.status,
            ),
        ),
        SpacePair::WeightedToSup => (
            q.log_plus_abs_sup.value,
            "log_plus_abs_sup".to_string(),
            q.log_plus_abs_sup.status,
        ),
        SpacePair::SupToWeighted => (
            q.pair_weighted_sup.value,
            "pair_weighted_sup".to_string(),
            q.pair_weighted_sup.status,
        ),
    }
}

/// Per-level anchor data shared by the single-vertex certificate scans:
/// the first vertex of each level, the modulus of ψ there, and whether it
/// has children in the truncation.
struct LevelAnchors {
    psi_abs: Vec<f64>,
    leaf: Vec<bool>,
}

fn level_anchors(tree: &Tree, psi: &TreeFunction) -> LevelAnchors {
    let depth = tree.depth() as usize;
    let mut psi_abs = Vec::with_capacity(depth + 1);
    let mut leaf = Vec::with_capacity(depth + 1);
    for n in 0..=depth as u32 {
        let v = tree.vertices_at_level(n).start;
        psi_abs.push(modulus(psi.value(v)));
        leaf.push(tree.is_leaf(v));
    }
    LevelAnchors { psi_abs, leaf }
}

/// ψ restricted to levels, for radial symbols (every vertex of a level
/// shares its value, so the first vertex is exact).
fn radial_levels(tree: &Tree, psi: &TreeFunction) -> Vec<f64> {
    (0..=tree.depth())
        .map(|n| psi.value(tree.vertices_at_level(n).start).re)
        .collect()
}

/// Scan scores are selection heuristics only; each finalist is materialized
/// on the tree and its ratio recomputed exactly before being reported.
struct Candidate {
    score: f64,
    spec: WitnessSpec,
}

/// Best-scoring anchor of one family.
fn best_of(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in cands {
        if !c.score.is_finite() {
            continue;
        }
        match &best {
            Some(b) if b.score >= c.score => {}
            _ => best = Some(c),
        }
    }
    best
}

/// Anchor caps for tabulated symbols, where each candidate costs a full
/// materialization: a dense head, powers of two, and the full depth.
fn geometric_caps(depth: u32) -> Vec<u64> {
    let d = depth as u64;
    let mut caps: Vec<u64> = (1..=d.min(8)).collect();
    let mut c = 16u64;
    while c < d {
        caps.push(c);
        c *= 2;
    }
    if d > 8 {
        caps.push(d);
    }
    caps
}

/// point_mass certificate scores at every level (weighted source).
fn point_mass_candidates(pair: SpacePair, anchors: &LevelAnchors) -> Vec<Candidate> {
    let depth = anchors.psi_abs.len() - 1;
    let mut out = Vec::with_capacity(depth + 1);
    // Level 0 is (1/2)χ_o; the ratio collapses to |ψ(o)| for the Lipschitz
    // target and |ψ(o)|/2 (or |ψ(o)| on a depth-0 tree) for the sup target.
    let a0 = anchors.psi_abs[0];
    let score0 = match pair {
        SpacePair::WeightedToLipschitz => a0,
        SpacePair::WeightedToSup => {
            if anchors.leaf[0] {
                a0
            } else {
                a0 / 2.0
            }
        }
        _ => return out,
    };
    out.push(Candidate {
        score: score0,
        spec: WitnessSpec::PointMass { level: 0 },
    });
    for l in 1..=depth {
        let m = anchors.psi_abs[l];
        let score = if anchors.leaf[l] {
            m / l as f64
        } else {
            m / (l as f64 + 1.0)
        };
        out.push(Candidate {
            score,
            spec: WitnessSpec::PointMass { level: l as u64 },
        });
    }
    out
}

/// χ_v certificate scores at every level (Lipschitz source, weighted target).
fn indicator_candidates(anchors: &LevelAnchors) -> Vec<Candidate> {
    let depth = anchors.psi_abs.len() - 1;
    let mut out = Vec::with_capacity(depth + 1);
    out.push(Candidate {
        score: anchors.psi_abs[0],
        spec: WitnessSpec::IndicatorVertex { level: 0 },
    });
    for l in 1..=depth {
        let m = anchors.psi_abs[l];
        let w = if anchors.leaf[l] {
            l as f64
        } else {
            l as f64 + 1.0
        };
        out.push(Candidate {
            score: m * w,
            spec: WitnessSpec::IndicatorVertex { level: l as u64 },
        });
    }
    out
}

/// capped_log scores against a Lipschitz target: prefix of weighted log
/// differences, suffix of plain differences scaled by the plateau height.
fn capped_log_lipschitz_candidates(levels: &[f64]) -> Vec<Candidate> {
    let depth = levels.len() - 1;
    if depth == 0 {
        return Vec::new();
    }
    let lg: Vec<f64> = (0..=depth).map(|n| (1.0 + n as f64).ln()).collect();
    let mut suffix_diff = vec![0.0f64; depth + 2];
    for n in (1..=depth).rev() {
        suffix_diff[n] = suffix_diff[n + 1].max((levels[n] - levels[n - 1]).abs());
    }
    let mut prefix = 0.0f64;
    let mut out = Vec::with_capacity(depth);
    for c in 1..=depth {
        prefix = prefix.max((levels[c] * lg[c] - levels[c - 1] * lg[c - 1]).abs());
        let numerator = prefix.max(lg[c] * suffix_diff[c + 1]);
        let denom = c as f64 * ((c as f64 + 1.0) / c as f64).ln();
        out.push(Candidate {
            score: numerator / denom,
            spec: WitnessSpec::CappedLog { cap: c as u64 },
        });
    }
    out
}

/// capped_log scores against the sup target: sup over levels of
/// |ψ(n)| log(1+min(n,c)), over the truncation norm of the ramp.
fn capped_log_sup_candidates(levels: &[f64]) -> Vec<Candidate> {
    let depth = levels.len() - 1;
    if depth == 0 {
        return Vec::new();
    }
    let lg: Vec<f64> = (0..=depth).map(|n| (1.0 + n as f64).ln()).collect();
    let mut suffix_abs = vec![0.0f64; depth + 2];
    for n in (1..=depth).rev() {
        suffix_abs[n] = suffix_abs[n + 1].max(levels[n].abs());
    }
    let mut prefix = 0.0f64;
    let mut out = Vec::with_capacity(depth);
    for c in 1..=depth {
        prefix = prefix.max(levels[c].abs() * lg[c]);
        let numerator = prefix.max(lg[c] * suffix_abs[(c + 1).min(depth + 1)]);
        let denom = c as f64 * ((c as f64 + 1.0) / c as f64).ln();
        out.push(Candidate {
            score: numerator / denom,
            spec: WitnessSpec::CappedLog { cap: c as u64 },
        });
    }
    out
}

/// harmonic_ramp scores against the sup target; the ramp has weighted norm
/// one up to rounding, so the numerator itself is the score.
fn harmonic_sup_candidates(levels: &[f64]) -> Vec<Candidate> {
    let depth = levels.len() - 1;
    if depth == 0 {
        return Vec::new();
    }
    let mut h = Vec::with_capacity(depth + 1);
    let mut acc = Dd::ZERO;
    h.push(0.0);
    for n in 1..=depth {
        acc = acc + Dd::ONE / Dd::from_f64(n as f64);
        h.push(acc.to_f64());
    }
    let mut suffix_abs = vec![0.0f64; depth + 2];
    for n in (1..=depth).rev() {
        suffix_abs[n] = suffix_abs[n + 1].max(levels[n].abs());
    }
    let mut prefix = 0.0f64;
    let mut out = Vec::with_capacity(depth);
    for c in 1..=depth {
        prefix = prefix.max(levels[c].abs() * h[c]);
        let score = prefix.max(h[c] * suffix_abs[(c + 1).min(depth + 1)]);
        out.push(Candidate {
            score,
            spec: WitnessSpec::HarmonicRamp { cap: c as u64 },
        });
    }
    out
}

/// radial_cap scores against the weighted target: prefix of the ramp's own
/// weighted differences; past the cap the ramp is the constant c, so each
/// tail level contributes c · n·Dψ(n).
fn radial_cap_candidates(levels: &[f64]) -> Vec<Candidate> {
    let depth = levels.len() - 1;
    if depth == 0 {
        return Vec::new();
    }
    let mut suffix_wdiff = vec![0.0f64; depth + 2];
    for n in (1..=depth).rev() {
        suffix_wdiff[n] = suffix_wdiff[n + 1].max(n as f64 * (levels[n] - levels[n - 1]).abs());
    }
    let mut prefix = 0.0f64;
    let mut out = Vec::with_capacity(depth);
    for c in 1..=depth {
        let cf = c as f64;
        prefix = prefix.max(cf * (levels[c] * cf - levels[c - 1] * (cf - 1.0)).abs());
        let numerator = prefix.max(cf * suffix_wdiff[c + 1]);
        out.push(Candidate {
            score: numerator,
            spec: WitnessSpec::RadialCap { cap: c as u64 },
        });
    }
    out
}

/// Exact certified ratio for a materialized witness.
fn certify(
    tree: &Tree,
    psi: &TreeFunction,
    pair: SpacePair,
    spec: &WitnessSpec,
) -> Result<Option<CertifiedLower>, OperatorError> {
    let w = witness::build(spec, tree, source_space(pair), Some(psi))?;
    if w.norm.is_nan() || w.norm <= 0.0 {
        return Ok(None);
    }
    let image = apply(psi, &w.function);
    let value = target_space(pair).norm(&image, tree) / w.norm;
    Ok(Some(CertifiedLower {
        label: spec.to_string(),
        function: w.function,
        source_norm: w.norm,
        value,
    }))
}

fn keep_best(best: &mut Option<CertifiedLower>, cand: Option<CertifiedLower>) {
    if let Some(c) = cand {
        match best {
            Some(b) if b.value >= c.value => {}
            _ => *best = Some(c),
        }
    }
}

/// Operator norm bracket: formula upper, certified witness lower, optional
/// unit-ball search refinement.
pub fn norm_bracket(
    pair: SpacePair,
    psi: &TreeFunction,
    tree: &Tree,
    quantities: &SymbolQuantities,
    radial: bool,
    cfg: &SearchConfig,
) -> Result<NormAnalysis, OperatorError> {
    let (upper, upper_provenance, upper_status) = norm_upper(pair, quantities);
    let anchors = level_anchors(tree, psi);
    let mut finalists: Vec<WitnessSpec> = Vec::new();

    match pair {
        SpacePair::WeightedToLipschitz => {
            if let Some(c) = best_of(point_mass_candidates(pair, &anchors)) {
                finalists.push(c.spec);
            }
            finalists.extend(scan_ramps(
                tree,
                psi,
                radial,
                RampFamily::CappedLogLipschitz,
            ));
        }
        SpacePair::LipschitzToWeighted => {
            if let Some(c) = best_of(indicator_candidates(&anchors)) {
                finalists.push(c.spec);
            }
            finalists.extend(scan_ramps(tree, psi, radial, RampFamily::RadialCapWeighted));
        }
        SpacePair::WeightedToSup => {
            finalists.push(WitnessSpec::Constant);
            if let Some(c) = best_of(point_mass_candidates(pair, &anchors)) {
                finalists.push(c.spec);
            }
            finalists.extend(scan_ramps(tree, psi, radial, RampFamily::CappedLogSup));
            finalists.extend(scan_ramps(tree, psi, radial, RampFamily::HarmonicSup));
        }
        SpacePair::SupToWeighted => {
            finalists.push(WitnessSpec::SignAlternating);
            finalists.push(WitnessSpec::Constant);
        }
    }

    let mut best: Option<CertifiedLower> = None;
    for spec in &finalists {
        keep_best(&mut best, certify(tree, psi, pair, spec)?);
    }

    match cfg.strategy {
        SearchStrategy::WitnessOnly => {}
        SearchStrategy::CoordinateAscent => {
            let start = best
                .as_ref()
                .map(|b| b.function.clone())
                .unwrap_or_else(|| TreeFunction::constant(tree, Complex64::new(1.0, 0.0)));
            let refined = coordinate_ascent(tree, psi, pair, &start, cfg.budget);
            keep_best(&mut best, refined);
        }
        SearchStrategy::RandomBall => {
            let refined = random_ball(tree, psi, pair, cfg.budget, cfg.seed);
            keep_best(&mut best, refined);
        }
    }

    let (lower, lower_provenance) = match &best {
        Some(b) => (b.value, b.label.clone()),
        None => (0.0, "no admissible probe on this truncation".to_string()),
    };
    let bracket = Bracket {
        pair,
        lower,
        lower_provenance,
        lower_status: TailStatus::FiniteSample,
        upper,
        upper_provenance,
        upper_status,
    };
    bracket.validate()?;

    let weight_gap = if pair == SpacePair::WeightedToSup
        && upper.is_finite()
        && lower < upper - BRACKET_SLACK.max(1e-9 * upper)
    {
        Some(WeightGap {
            probe_weight_sup: quantities.probe_log_abs_sup.value,
            full_weight_sup: quantities.log_plus_abs_sup.value,
        })
    } else {
        None
    };

    Ok(NormAnalysis {
        bracket,
        certificate: best,
        weight_gap,
    })
}

/// Ramp families the anchor scans understand.
#[derive(Clone, Copy)]
enum RampFamily {
    CappedLogLipschitz,
    CappedLogSup,
    HarmonicSup,
    RadialCapWeighted,
}

impl RampFamily {
    fn scan(self, levels: &[f64]) -> Vec<Candidate> {
        match self {
            RampFamily::CappedLogLipschitz => capped_log_lipschitz_candidates(levels),
            RampFamily::CappedLogSup => capped_log_sup_candidates(levels),
            RampFamily::HarmonicSup => harmonic_sup_candidates(levels),
            RampFamily::RadialCapWeighted => radial_cap_candidates(levels),
        }
    }

    fn spec(self, cap: u64) -> WitnessSpec {
        match self {
            RampFamily::CappedLogLipschitz | RampFamily::CappedLogSup => {
                WitnessSpec::CappedLog { cap }
            }
            RampFamily::HarmonicSup => WitnessSpec::HarmonicRamp { cap },
            RampFamily::RadialCapWeighted => WitnessSpec::RadialCap { cap },
        }
    }
}

/// Picks ramp anchors: an exhaustive per-level scan for radial symbols,
/// a geometric cap ladder (certified directly) for tabulated ones.
fn scan_ramps(
    tree: &Tree,
    psi: &TreeFunction,
    radial: bool,
    family: RampFamily,
) -> Vec<WitnessSpec> {
    if tree.depth() == 0 {
        return Vec::new();
    }
    if radial {
        let levels = radial_levels(tree, psi);
        best_of(family.scan(&levels))
            .map(|c| c.spec)
            .into_iter()
            .collect()
    } else {
        geometric_caps(tree.depth())
            .into_iter()
            .map(|c| family.spec(c))
            .collect()
    }
}

/// Essential norm bracket straight from the tail quantities. Tabulated
/// symbols carry no tail information; their bracket degrades to
/// [0, operator-norm upper] with inconclusive status.
pub fn essential_norm_bracket(
    pair: SpacePair,
    quantities: &SymbolQuantities,
) -> Result<Bracket, OperatorError> {
    let (lo, lo_prov, lo_status, up, up_prov, up_status) = match pair {
        SpacePair::WeightedToLipschitz => {
            let a = &quantities.ratio_tail;
            let b = &quantities.log_weighted_diff_tail;
            (
                a.value.max(b.value),
                "max(ratio_tail, log_weighted_diff_tail) via point_mass and squared_log_ramp tail sequences".to_string(),
                combine_status(a.status, b.status),
                add_values(a.value, b.value),
                "ratio_tail + log_weighted_diff_tail".to_string(),
                combine_status(a.status, b.status),
            )
        }
        SpacePair::LipschitzToWeighted => {
            let a = &quantities.linear_abs_tail;
            let b = &quantities.square_weighted_diff_tail;
            (
                a.value.max(b.value / 2.0),
                "max(linear_abs_tail, square_weighted_diff_tail/2) via indicator_vertex and half_window_ramp tail sequences".to_string(),
                combine_status(a.status, b.status),
                add_values(a.value, b.value),
                "linear_abs_tail + square_weighted_diff_tail".to_string(),
                combine_status(a.status, b.status),
            )
        }
        SpacePair::WeightedToSup => {
            let a = &quantities.log_abs_tail;
            (
                a.value,
                "log_abs_tail via log_ramp_p tail sequence".to_string(),
                a.status,
                a.value,
                "log_abs_tail".to_string(),
                a.status,
            )
        }
        SpacePair::SupToWeighted => {
            let b = &quantities.pair_weighted_tail;
            (
                b.value,
                "pair_weighted_tail via tail_sign sequence".to_string(),
                b.status,
                b.value,
                "pair_weighted_tail".to_string(),
                b.status,
            )
        }
    };

    let bracket = if lo.is_nan() || up.is_nan() {
        let (norm_up, norm_prov, _) = norm_upper(pair, quantities);
        Bracket {
            pair,
            lower: 0.0,
            lower_provenance: "tail data unavailable for tabulated symbols".to_string(),
            lower_status: TailStatus::Inconclusive,
            upper: norm_up,
            upper_provenance: format!("operator norm upper bound ({norm_prov})"),
            upper_status: TailStatus::Inconclusive,
        }
    } else {
        Bracket {
            pair,
            lower: lo,
            lower_provenance: lo_prov,
            lower_status: lo_status,
            upper: up,
            upper_provenance: up_prov,
            upper_status: up_status,
        }
    };
    bracket.validate()?;
    Ok(bracket)
}

/// One probe's isometry defect |‖ψ·p‖_target − ‖p‖_source|, with the norms.
pub fn probe_defect(
    pair: SpacePair,
    psi: &TreeFunction,
    tree: &Tree,
    spec: &WitnessSpec,
) -> Result<(f64, f64, f64), OperatorError> {
    let w = witness::build(spec, tree, source_space(pair), Some(psi))?;
    let image_norm = target_space(pair).norm(&apply(psi, &w.function), tree);
    Ok(((image_norm - w.norm).abs(), w.norm, image_norm))
}

#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub defect: f64,
    pub probe: String,
    pub probe_norm: f64,
    pub image_norm: f64,
}

/// Max isometry defect over the fixed probe set: the constant function,
/// (1/2)χ_o, the point-mass and vertex-indicator families at every level,
/// and the indicator of levels ≤ 1.
pub fn isometry_defect(
    pair: SpacePair,
    psi: &TreeFunction,
    tree: &Tree,
) -> Result<IsometryReport, OperatorError> {
    let mut report: Option<IsometryReport> = None;
    let mut consider = |label: String, defect: f64, probe_norm: f64, image_norm: f64| {
        let better = match &report {
            Some(r) => defect > r.defect,
            None => true,
        };
        if better {
            report = Some(IsometryReport {
                defect,
                probe: label,
                probe_norm,
                image_norm,
            });
        }
    };

    let mut specs: Vec<WitnessSpec> = vec![WitnessSpec::Constant];
    for l in 0..=tree.depth() as u64 {
        specs.push(WitnessSpec::PointMass { level: l });
        specs.push(WitnessSpec::IndicatorVertex { level: l });
    }
    for spec in &specs {
        let (d, pn, im) = probe_defect(pair, psi, tree, spec)?;
        if pn > 0.0 {
            consider(spec.to_string(), d, pn, im);
        }
    }

    // Indicator of the root and its children (the level ≤ 1 ball).
    let mut low = TreeFunction::zero(tree);
    for v in 0..tree.vertex_count() as u32 {
        if tree.level(v) <= 1 {
            low.set_value(v, Complex64::new(1.0, 0.0));
        }
    }
    let src = source_space(pair).norm(&low, tree);
    if src > 0.0 {
        let im = target_space(pair).norm(&apply(psi, &low), tree);
        consider(
            "indicator_levels_le_1".to_string(),
            (im - src).abs(),
            src,
            im,
        );
    }

    Ok(report.expect("probe set is nonempty"))
}

/// Deterministic coordinate ascent: sweep vertices in id order, move each
/// real coordinate to the better endpoint of its feasible interval under
/// the source-norm cap. Exact line search because every target norm is a
/// pointwise maximum. Quadratic in tree size; intended for modest
/// truncations — the certificate scan is the fast path.
fn coordinate_ascent(
    tree: &Tree,
    psi: &TreeFunction,
    pair: SpacePair,
    start: &TreeFunction,
    budget: u64,
) -> Option<CertifiedLower> {
    let source = source_space(pair);
    let target = target_space(pair);
    let mut f = start.clone();
    let cap = source.norm(&f, tree);
    if !cap.is_finite() || cap <= 0.0 {
        return None;
    }
    let mut best_target = target.norm(&apply(psi, &f), tree);
    let mut moves = 0u64;
    'outer: loop {
        let mut improved = false;
        for v in 0..tree.vertex_count() as u32 {
            if moves >= budget {
                break 'outer;
            }
            let x0 = f.value(v);
            let (lo, hi) = feasible_interval(tree, &mut f, v, source, cap);
            let mut chosen: Option<(f64, f64)> = None;
            for x in [lo, hi] {
                if !x.is_finite() {
                    continue;
                }
                f.set_value(v, Complex64::new(x, x0.im));
                let t = target.norm(&apply(psi, &f), tree);
                let better = match chosen {
                    Some((bt, bx)) => t > bt || (t == bt && x < bx),
                    None => t > best_target,
                };
                if better {
                    chosen = Some((t, x));
                }
            }
            match chosen {
                Some((t, x)) if t > best_target => {
                    f.set_value(v, Complex64::new(x, x0.im));
                    best_target = t;
                    moves += 1;
                    improved = true;
                }
                _ => f.set_value(v, x0),
            }
        }
        if !improved {
            break;
        }
    }
    let source_norm = source.norm(&f, tree);
    if source_norm.is_nan() || source_norm <= 0.0 {
        return None;
    }
    let value = target.norm(&apply(psi, &f), tree) / source_norm;
    Some(CertifiedLower {
        label: format!("coordinate_ascent(moves={moves})"),
        function: f,
        source_norm,
        value,
    })
}

/// Feasible interval of the real coordinate at `v` under `norm(f) ≤ cap`:
/// the constraint is convex in the coordinate, so the set is an interval
/// found by doubling expansion plus bisection from the current point.
fn feasible_interval(
    tree: &Tree,
    f: &mut TreeFunction,
    v: u32,
    source: SourceSpace,
    cap: f64,
) -> (f64, f64) {
    let saved = f.value(v);
    let bound = cap + 1e-12 * cap;
    let mut feasible = |x: f64| -> bool {
        f.set_value(v, Complex64::new(x, saved.im));
        source.norm(f, tree) <= bound
    };
    let x0 = saved.re;
    let mut endpoint = |dir: f64| -> f64 {
        let mut step = (cap.abs() + x0.abs() + 1.0).max(1.0);
        let mut inside = x0;
        let mut outside = None;
        for _ in 0..64 {
            let cand = x0 + dir * step;
            if feasible(cand) {
                inside = cand;
                step *= 2.0;
            } else {
                outside = Some(cand);
                break;
            }
        }
        let mut out = match outside {
            Some(o) => o,
            None => {
                return inside;
            }
        };
        for _ in 0..80 {
            let mid = 0.5 * (inside + out);
            if feasible(mid) {
                inside = mid;
            } else {
                out = mid;
            }
        }
        inside
    };
    let hi = endpoint(1.0);
    let lo = endpoint(-1.0);
    f.set_value(v, saved);
    (lo, hi)
}

/// Seeded uniform sampling of the real unit ball; keeps the best ratio.
fn random_ball(
    tree: &Tree,
    psi: &TreeFunction,
    pair: SpacePair,
    budget: u64,
    seed: u64,
) -> Option<CertifiedLower> {
    let source = source_space(pair);
    let target = target_space(pair);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tree.vertex_count();
    let mut best: Option<(f64, TreeFunction, f64, u64)> = None;
    for draw in 0..budget {
        let values: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), 0.0))
            .collect();
        let f = TreeFunction::from_internal_values(values);
        let s = source.norm(&f, tree);
        if s.is_nan() || s <= 1e-300 {
            continue;
        }
        let r = target.norm(&apply(psi, &f), tree) / s;
        let better = match &best {
            Some((br, ..)) => r > *br,
            None => true,
        };
        if better {
            best = Some((r, f, s, draw));
        }
    }
    best.map(|(value, function, source_norm, draw)| CertifiedLower {
        label: format!("random_ball(seed={seed}, draw={draw})"),
        function,
        source_norm,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{quantities_from_profile, quantities_from_radial};
    use crate::radial::RadialExpr;
    use crate::tree::TreeLimits;

    fn limits() -> TreeLimits {
        TreeLimits::with_max(10_000_000)
    }

    fn mixed_tree(branch_depth: u32, depth: u32) -> Tree {
        let t = Tree::homogeneous(2, 2, branch_depth, &limits()).expect("base");
        let mut parents: Vec<usize> = (1..t.vertex_count())
            .map(|v| t.parent(v as u32).expect("non-root") as usize)
            .collect();
        let mut tips: Vec<usize> = t
            .vertices_at_level(branch_depth)
            .map(|v| v as usize)
            .collect();
        for _ in branch_depth..depth {
            let mut next = Vec::with_capacity(tips.len());
            for &tip in &tips {
                parents.push(tip);
                next.push(parents.len());
            }
            tips = next;
        }
        Tree::from_parents(&parents, &limits()).expect("mixed tree")
    }

    fn radial_setup(text: &str, tree: &Tree) -> (TreeFunction, SymbolQuantities) {
        let expr = RadialExpr::parse(text).expect("parse");
        let psi = TreeFunction::from_radial(tree, &expr).expect("materialize");
        let q = quantities_from_radial(&expr).expect("quantities");
        (psi, q)
    }

    fn analyze(pair: SpacePair, text: &str, tree: &Tree, cfg: &SearchConfig) -> NormAnalysis {
        let (psi, q) = radial_setup(text, tree);
        norm_bracket(pair, &psi, tree, &q, true, cfg).expect("bracket")
    }

    #[test]
    fn constant_symbol_bracket_collapses_to_its_modulus() {
        let t = mixed_tree(3, 8);
        let cfg = SearchConfig::default();
        for (text, c) in [("2.5", 2.5), ("0-1.5", 1.5)] {
            let a = analyze(SpacePair::WeightedToLipschitz, text, &t, &cfg);
            assert!(
                (a.bracket.lower - c).abs() < 1e-12,
                "{text}: {}",
                a.bracket.lower
            );
            assert!((a.bracket.upper - c).abs() < 1e-12);
        }
    }

    #[test]
    fn decaying_symbol_anchors_the_lower_at_the_root_mass() {
        let t = mixed_tree(3, 8);
        let a = analyze(
            SpacePair::WeightedToLipschitz,
            "3/(1+n)^2",
            &t,
            &SearchConfig::default(),
        );
        assert!(
            (a.bracket.lower - 3.0).abs() < 1e-12,
            "lower {}",
            a.bracket.lower
        );
        assert_eq!(a.bracket.lower_provenance, "point_mass(level=0)");
        let upper = 3.0 + 2.25 * std::f64::consts::LN_2;
        assert!(
            (a.bracket.upper - upper).abs() < 1e-12,
            "upper {}",
            a.bracket.upper
        );
    }

    #[test]
    fn formula_upper_violations_surface_as_hard_errors() {
        // The formula upper bound pairs each difference weight log(1+n) with
        // the growth-lemma weight (1+log n); the mismatch at small levels is
        // real, and a capped-log certificate can exceed the formula value.
        // The bracket invariant demands a hard error here, never a clamp.
        let t = mixed_tree(2, 32);
        let (psi, q) = radial_setup("log(1+n)", &t);
        let err = norm_bracket(
            SpacePair::WeightedToLipschitz,
            &psi,
            &t,
            &q,
            true,
            &SearchConfig::default(),
        )
        .expect_err("certificate beats the formula value");
        match err {
            OperatorError::BracketInversion { pair, lower, upper } => {
                assert_eq!(pair, SpacePair::WeightedToLipschitz);
                let ln2 = std::f64::consts::LN_2;
                let ln3 = 3.0_f64.ln();
                let certified = (ln3 * ln3 - ln2 * ln2) / (2.0 * 1.5_f64.ln());
                let formula = ln2 * ln2 + ln3 / 3.0;
                assert!((lower - certified).abs() < 1e-9, "lower {lower}");
                assert!((upper - formula).abs() < 1e-9, "upper {upper}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn chi_root_table_symbol_attains_the_pair_sum() {
        let t = mixed_tree(2, 5);
        let mut vals = vec![Complex64::new(0.0, 0.0); t.vertex_count()];
        vals[0] = Complex64::new(1.0, 0.0);
        let psi = TreeFunction::from_values(&t, &vals).expect("table");
        let q = quantities_from_profile(&psi.level_profile(&t), modulus(psi.value(0)));
        let a = norm_bracket(
            SpacePair::SupToWeighted,
            &psi,
            &t,
            &q,
            false,
            &SearchConfig::default(),
        )
        .expect("bracket");
        assert!((a.bracket.lower - 2.0).abs() < 1e-12);
        assert!((a.bracket.upper - 2.0).abs() < 1e-12);
        assert_eq!(a.bracket.lower_provenance, "sign_alternating");
        assert_eq!(a.bracket.upper_status, TailStatus::FiniteSample);
    }

    #[test]
    fn sup_target_norm_is_exact_when_the_sup_is_attained_early() {
        let t = mixed_tree(2, 64);
        let a = analyze(
            SpacePair::WeightedToSup,
            "(1-min(n,1))*0.5 + min(n,1)/(1+log(max(n,1)))",
            &t,
            &SearchConfig::default(),
        );
        assert!(
            (a.bracket.upper - 1.0).abs() < 1e-12,
            "upper {}",
            a.bracket.upper
        );
        assert!(
            (a.bracket.lower - 1.0).abs() < 1e-12,
            "lower {}",
            a.bracket.lower
        );
        assert!(a.weight_gap.is_none());
    }

    #[test]
    fn sup_target_weight_gap_is_flagged_when_certificates_fall_short() {
        let t = mixed_tree(2, 64);
        let a = analyze(
            SpacePair::WeightedToSup,
            "min(1,max(0,n-1)) * 0.9/(1+log(max(n,1)))",
            &t,
            &SearchConfig::default(),
        );
        assert!(
            (a.bracket.upper - 0.9).abs() < 1e-12,
            "upper {}",
            a.bracket.upper
        );
        assert!(a.bracket.lower > 0.8, "lower {}", a.bracket.lower);
        assert!(a.bracket.lower < 0.9 - 1e-9);
        let gap = a.weight_gap.expect("gap flagged");
        assert!(gap.probe_weight_sup < gap.full_weight_sup);
        assert!((gap.full_weight_sup - 0.9).abs() < 1e-9);
    }

    #[test]
    fn diverging_upper_still_yields_a_certified_lower() {
        let t = mixed_tree(2, 16);
        let a = analyze(
            SpacePair::LipschitzToWeighted,
            "1",
            &t,
            &SearchConfig::default(),
        );
        assert!(a.bracket.upper.is_infinite());
        assert_eq!(a.bracket.upper_status, TailStatus::Diverged);
        assert!(a.bracket.lower >= 16.0, "lower {}", a.bracket.lower);
    }

    #[test]
    fn radial_cap_scan_finds_the_aligned_step() {
        // ψ = −3.5/n past level 4: the weighted-difference quantity peaks at
        // the step, and min(n,5) certifies it exactly.
        let t = mixed_tree(2, 32);
        let a = analyze(
            SpacePair::LipschitzToWeighted,
            "0 - min(1,max(0,n-4)) * 3.5/max(n,1)",
            &t,
            &SearchConfig::default(),
        );
        assert!(
            (a.bracket.lower - 17.5).abs() < 1e-9,
            "lower {}",
            a.bracket.lower
        );
        assert_eq!(a.bracket.lower_provenance, "radial_cap(cap=5)");
        assert!(
            (a.bracket.upper - 21.7).abs() < 1e-9,
            "upper {}",
            a.bracket.upper
        );
    }

    #[test]
    fn certified_lower_recomputes_from_the_stored_probe() {
        let t = mixed_tree(2, 32);
        for (pair, text) in [
            (SpacePair::WeightedToLipschitz, "1/(1+n)"),
            (SpacePair::LipschitzToWeighted, "1/(1+n)^2"),
            (SpacePair::WeightedToSup, "1/(1+n)"),
            (SpacePair::SupToWeighted, "1/(1+n)^2"),
        ] {
            let (psi, q) = radial_setup(text, &t);
            let a =
                norm_bracket(pair, &psi, &t, &q, true, &SearchConfig::default()).expect("bracket");
            let cert = a.certificate.expect("certificate");
            let again =
                target_space(pair).norm(&apply(&psi, &cert.function), &t) / cert.source_norm;
            let rel = (again - a.bracket.lower).abs() / a.bracket.lower.max(1e-300);
            assert!(
                rel <= 1e-12,
                "{pair:?} {text}: {again} vs {}",
                a.bracket.lower
            );
            assert!(a.bracket.lower <= a.bracket.upper + BRACKET_SLACK);
        }
    }

    #[test]
    fn essential_bracket_reproduces_the_sup_target_tail_limit() {
        let (_, q) = radial_setup("min(1,max(0,n-1))/log(max(n,2))", &mixed_tree(2, 8));
        let b = essential_norm_bracket(SpacePair::WeightedToSup, &q).expect("bracket");
        assert!((b.lower - 1.0).abs() < 1e-9, "lower {}", b.lower);
        assert!((b.upper - 1.0).abs() < 1e-9);
        assert_eq!(b.lower_status, TailStatus::Stabilized);
    }

    #[test]
    fn essential_bracket_sits_strictly_below_the_norm_for_the_pair_example() {
        let t = mixed_tree(2, 16);
        let (psi, q) = radial_setup("(1-min(n,1)) + min(n,1)/max(n,1)", &t);
        let b = essential_norm_bracket(SpacePair::SupToWeighted, &q).expect("essential");
        assert!((b.lower - 2.0).abs() < 1e-9, "lower {}", b.lower);
        assert!((b.upper - 2.0).abs() < 1e-9);
        let a = norm_bracket(
            SpacePair::SupToWeighted,
            &psi,
            &t,
            &q,
            true,
            &SearchConfig::default(),
        )
        .expect("norm");
        assert!(
            (a.bracket.upper - 4.0).abs() < 1e-9,
            "eta {}",
            a.bracket.upper
        );
        assert!(b.upper <= a.bracket.upper + BRACKET_SLACK);
    }

    #[test]
    fn compact_symbol_gets_a_zero_essential_bracket() {
        let (_, q) = radial_setup("1/((1+n)*(1+log(1+n)))", &mixed_tree(2, 8));
        let b = essential_norm_bracket(SpacePair::WeightedToLipschitz, &q).expect("bracket");
        assert!(b.lower.abs() < 1e-9, "lower {}", b.lower);
        assert!(b.upper.abs() < 1e-9, "upper {}", b.upper);
    }

    #[test]
    fn tabulated_essential_bracket_degrades_to_the_norm_upper() {
        let t = mixed_tree(2, 6);
        let vals: Vec<Complex64> = (0..t.vertex_count())
            .map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.0))
            .collect();
        let psi = TreeFunction::from_values(&t, &vals).expect("table");
        let q = quantities_from_profile(&psi.level_profile(&t), modulus(psi.value(0)));
        let b = essential_norm_bracket(SpacePair::WeightedToLipschitz, &q).expect("bracket");
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.lower_status, TailStatus::Inconclusive);
        assert!(b.upper.is_finite());
    }

    #[test]
    fn isometry_defect_reproduces_the_worked_probe_values() {
        let t = mixed_tree(3, 8);
        let one = TreeFunction::constant(&t, Complex64::new(1.0, 0.0));
        let (d, src, img) = probe_defect(
            SpacePair::WeightedToLipschitz,
            &one,
            &t,
            &WitnessSpec::PointMass { level: 3 },
        )
        .expect("probe");
        assert!(
            (d - 0.75).abs() < 1e-12,
            "defect {d} (src {src}, img {img})"
        );
        let (d, ..) = probe_defect(
            SpacePair::LipschitzToWeighted,
            &one,
            &t,
            &WitnessSpec::IndicatorVertex { level: 2 },
        )
        .expect("probe");
        assert!((d - 2.0).abs() < 1e-12, "defect {d}");
        let r = isometry_defect(SpacePair::WeightedToLipschitz, &one, &t).expect("report");
        assert!(r.defect >= 0.75);

        let zero = TreeFunction::constant(&t, Complex64::new(0.0, 0.0));
        let r = isometry_defect(SpacePair::SupToWeighted, &zero, &t).expect("report");
        assert!((r.defect - 1.0).abs() < 1e-12);
        assert_eq!(r.probe, "constant");
    }

    #[test]
    fn coordinate_ascent_never_loses_to_the_witness_scan_and_is_deterministic() {
        let t = mixed_tree(2, 5);
        let base = analyze(
            SpacePair::SupToWeighted,
            "1/(1+n)",
            &t,
            &SearchConfig::default(),
        );
        let cfg = SearchConfig {
            budget: 200,
            seed: 7,
            strategy: SearchStrategy::CoordinateAscent,
        };
        let a1 = analyze(SpacePair::SupToWeighted, "1/(1+n)", &t, &cfg);
        let a2 = analyze(SpacePair::SupToWeighted, "1/(1+n)", &t, &cfg);
        assert_eq!(a1.bracket.lower.to_bits(), a2.bracket.lower.to_bits());
        assert!(a1.bracket.lower >= base.bracket.lower - 1e-12);
        assert!(a1.bracket.lower <= a1.bracket.upper + BRACKET_SLACK);
    }

    #[test]
    fn random_ball_is_seed_deterministic_and_stays_sound() {
        let t = mixed_tree(2, 4);
        let cfg = SearchConfig {
            budget: 50,
            seed: 11,
            strategy: SearchStrategy::RandomBall,
        };
        let a1 = analyze(SpacePair::WeightedToLipschitz, "1/(1+n)", &t, &cfg);
        let a2 = analyze(SpacePair::WeightedToLipschitz, "1/(1+n)", &t, &cfg);
        assert_eq!(a1.bracket.lower.to_bits(), a2.bracket.lower.to_bits());
        assert!(a1.bracket.lower <= a1.bracket.upper + BRACKET_SLACK);
    }
}
