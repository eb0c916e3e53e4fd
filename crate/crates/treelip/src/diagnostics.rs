//! Symbol diagnostics: the weighted suprema and tail limits of a symbol that
//! govern boundedness, compactness, and norms of its multiplication
//! operator, plus the resulting classification verdicts.
//!
//! Radial symbols are sampled in double-double precision out to level 2^50
//! and every quantity carries a tail ladder with a stabilized / diverged /
//! inconclusive status. Tabulated symbols are exact on their truncation, so
//! supremum quantities come back exact with finite-sample status and tail
//! quantities are never extrapolated.

use crate::function::LevelProfile;
use crate::radial::{ExprError, RadialExpr};
use crate::tail::{
    estimate_inf, estimate_limsup, estimate_sup, sample_radial, TailEstimate, TailStatus,
};

/// Tolerance below which a stabilized tail quantity counts as zero.
pub const TOL_ZERO: f64 = 1e-9;

/// The four operator source/target pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpacePair {
    /// Weighted Lipschitz into Lipschitz ("Lw->L").
    WeightedToLipschitz,
    /// Lipschitz into weighted Lipschitz ("L->Lw").
    LipschitzToWeighted,
    /// Weighted Lipschitz into bounded functions ("Lw->Linf").
    WeightedToSup,
    /// Bounded functions into weighted Lipschitz ("Linf->Lw").
    SupToWeighted,
}

impl SpacePair {
    pub const ALL: [SpacePair; 4] = [
        SpacePair::WeightedToLipschitz,
        SpacePair::LipschitzToWeighted,
        SpacePair::WeightedToSup,
        SpacePair::SupToWeighted,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SpacePair::WeightedToLipschitz => "Lw->L",
            SpacePair::LipschitzToWeighted => "L->Lw",
            SpacePair::WeightedToSup => "Lw->Linf",
            SpacePair::SupToWeighted => "Linf->Lw",
        }
    }

    pub fn parse(code: &str) -> Option<SpacePair> {
        match code {
            "Lw->L" => Some(SpacePair::WeightedToLipschitz),
            "L->Lw" => Some(SpacePair::LipschitzToWeighted),
            "Lw->Linf" => Some(SpacePair::WeightedToSup),
            "Linf->Lw" => Some(SpacePair::SupToWeighted),
            _ => None,
        }
    }
}

impl std::fmt::Display for SpacePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// The weighted suprema and tail limits of one symbol.
///
/// Writing a(n) = |psi(n)|, d(n) = |psi(n) - psi(n-1)|, and
/// p(n) = |psi(n)| + |psi(n-1)| for the radial case (per-level suprema of
/// the corresponding vertex quantities in general):
#[derive(Clone, Debug)]
pub struct SymbolQuantities {
    /// |psi(root)|.
    pub root_modulus: f64,
    /// sup over n >= 1 of log(1+n) * d(n).
    pub log_weighted_diff_sup: TailEstimate,
    /// sup over n >= 0 of a(n) / (n+1).
    pub ratio_sup: TailEstimate,
    /// sup over n >= 1 of n^2 * d(n).
    pub square_weighted_diff_sup: TailEstimate,
    /// sup over n >= 0 of (n+1) * a(n).
    pub linear_weighted_abs_sup: TailEstimate,
    /// max(|psi(root)|, sup over n >= 1 of (1 + log n) * a(n)).
    pub log_plus_abs_sup: TailEstimate,
    /// |psi(root)| + sup over n >= 1 of n * p(n).
    pub pair_weighted_sup: TailEstimate,
    /// sup over n >= 1 of log(1+n) * a(n); the probe-attainable companion of
    /// `log_plus_abs_sup` (smaller weight, used by lower-bound certificates).
    pub probe_log_abs_sup: TailEstimate,
    /// limsup of a(n) / (n+1).
    pub ratio_tail: TailEstimate,
    /// limsup of log(n) * d(n).
    pub log_weighted_diff_tail: TailEstimate,
    /// limsup of n * a(n).
    pub linear_abs_tail: TailEstimate,
    /// limsup of n^2 * d(n).
    pub square_weighted_diff_tail: TailEstimate,
    /// limsup of log(n) * a(n).
    pub log_abs_tail: TailEstimate,
    /// limsup of n * p(n).
    pub pair_weighted_tail: TailEstimate,
    /// inf over n >= 0 of a(n) / (n+1).
    pub ratio_inf: TailEstimate,
}

impl SymbolQuantities {
    /// Name/value pairs for report emission, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, &TailEstimate)> {
        vec![
            ("log_weighted_diff_sup", &self.log_weighted_diff_sup),
            ("ratio_sup", &self.ratio_sup),
            ("square_weighted_diff_sup", &self.square_weighted_diff_sup),
            ("linear_weighted_abs_sup", &self.linear_weighted_abs_sup),
            ("log_plus_abs_sup", &self.log_plus_abs_sup),
            ("pair_weighted_sup", &self.pair_weighted_sup),
            ("probe_log_abs_sup", &self.probe_log_abs_sup),
            ("ratio_tail", &self.ratio_tail),
            ("log_weighted_diff_tail", &self.log_weighted_diff_tail),
            ("linear_abs_tail", &self.linear_abs_tail),
            ("square_weighted_diff_tail", &self.square_weighted_diff_tail),
            ("log_abs_tail", &self.log_abs_tail),
            ("pair_weighted_tail", &self.pair_weighted_tail),
            ("ratio_inf", &self.ratio_inf),
        ]
    }
}

/// Per-level terms shared by the radial and tabulated constructors.
struct Terms {
    levels: Vec<u64>,
    log_diff: Vec<f64>,
    ratio: Vec<f64>,
    sq_diff: Vec<f64>,
    lin_abs_plus: Vec<f64>,
    log_plus_abs: Vec<f64>,
    pair_weighted: Vec<f64>,
    probe_log_abs: Vec<f64>,
    log_tail_diff: Vec<f64>,
    lin_abs: Vec<f64>,
    log_abs: Vec<f64>,
}

fn build_terms(levels: Vec<u64>, abs: &[f64], diff: &[f64], pair: &[f64]) -> Terms {
    let n = levels.len();
    let mut t = Terms {
        levels,
        log_diff: vec![f64::NAN; n],
        ratio: vec![f64::NAN; n],
        sq_diff: vec![f64::NAN; n],
        lin_abs_plus: vec![f64::NAN; n],
        log_plus_abs: vec![f64::NAN; n],
        pair_weighted: vec![f64::NAN; n],
        probe_log_abs: vec![f64::NAN; n],
        log_tail_diff: vec![f64::NAN; n],
        lin_abs: vec![f64::NAN; n],
        log_abs: vec![f64::NAN; n],
    };
    for i in 0..n {
        let lvl = t.levels[i];
        let lf = lvl as f64;
        let a = abs[i];
        if !a.is_nan() {
            t.ratio[i] = a / (lf + 1.0);
            t.lin_abs_plus[i] = a * (lf + 1.0);
            if lvl >= 1 {
                t.log_plus_abs[i] = a * (1.0 + lf.ln());
                t.probe_log_abs[i] = a * (1.0 + lf).ln();
                t.log_abs[i] = a * lf.ln();
                t.lin_abs[i] = a * lf;
            }
        }
        if lvl >= 1 {
            let d = diff[i];
            let p = pair[i];
            if !d.is_nan() {
                t.log_diff[i] = d * (1.0 + lf).ln();
                t.log_tail_diff[i] = d * lf.ln();
                t.sq_diff[i] = d * lf * lf;
            }
            if !p.is_nan() {
                t.pair_weighted[i] = p * lf;
            }
        }
    }
    t
}

fn assemble_radial(t: &Terms, root_modulus: f64, root_signed_is_finite: bool) -> SymbolQuantities {
    let levels = &t.levels;
    // max(root term, tail sup) with the status of the tail estimate.
    let with_root = |mut est: TailEstimate, root: f64| -> TailEstimate {
        if est.status != TailStatus::Diverged && root >= est.value {
            est.value = root;
            est.attained_level = Some(0);
        }
        est
    };
    let plus_root = |mut est: TailEstimate, root: f64| -> TailEstimate {
        if est.status != TailStatus::Diverged {
            est.value += root;
        }
        est
    };
    let root = if root_signed_is_finite {
        root_modulus
    } else {
        f64::INFINITY
    };
    SymbolQuantities {
        root_modulus,
        log_weighted_diff_sup: estimate_sup(levels, &t.log_diff),
        ratio_sup: estimate_sup(levels, &t.ratio),
        square_weighted_diff_sup: estimate_sup(levels, &t.sq_diff),
        linear_weighted_abs_sup: estimate_sup(levels, &t.lin_abs_plus),
        log_plus_abs_sup: with_root(estimate_sup(levels, &t.log_plus_abs), root),
        pair_weighted_sup: plus_root(estimate_sup(levels, &t.pair_weighted), root),
        probe_log_abs_sup: estimate_sup(levels, &t.probe_log_abs),
        ratio_tail: estimate_limsup(levels, &t.ratio),
        log_weighted_diff_tail: estimate_limsup(levels, &t.log_tail_diff),
        linear_abs_tail: estimate_limsup(levels, &t.lin_abs),
        square_weighted_diff_tail: estimate_limsup(levels, &t.sq_diff),
        log_abs_tail: estimate_limsup(levels, &t.log_abs),
        pair_weighted_tail: estimate_limsup(levels, &t.pair_weighted),
        ratio_inf: estimate_inf(levels, &t.ratio),
    }
}

/// Quantities of a radial symbol, with tail ladders out to level 2^50.
pub fn quantities_from_radial(expr: &RadialExpr) -> Result<SymbolQuantities, ExprError> {
    let s = sample_radial(expr)?;
    let t = build_terms(s.levels.clone(), &s.abs, &s.diff, &s.pair);
    let root_modulus = s.value_at_root.abs();
    Ok(assemble_radial(
        &t,
        root_modulus,
        s.value_at_root.is_finite(),
    ))
}

/// Quantities of a tabulated symbol: exact suprema over the truncation with
/// finite-sample status; tail limits are never extrapolated from a table.
pub fn quantities_from_profile(profile: &LevelProfile, root_modulus: f64) -> SymbolQuantities {
    let levels: Vec<u64> = (0..=profile.depth() as u64).collect();
    let t = build_terms(
        levels,
        &profile.sup_abs,
        &profile.sup_diff,
        &profile.sup_pair,
    );
    let sup = |terms: &[f64], include_root: bool| -> TailEstimate {
        let mut best = f64::NEG_INFINITY;
        let mut at = None;
        for (i, &x) in terms.iter().enumerate() {
            if x.is_nan() || (i == 0 && !include_root) {
                continue;
            }
            if x > best {
                best = x;
                at = Some(t.levels[i]);
            }
        }
        if best == f64::NEG_INFINITY {
            TailEstimate::finite_sample(0.0, None)
        } else {
            TailEstimate::finite_sample(best, at)
        }
    };
    let inf = |terms: &[f64]| -> TailEstimate {
        let mut best = f64::INFINITY;
        let mut at = None;
        for (i, &x) in terms.iter().enumerate() {
            if x.is_nan() {
                continue;
            }
            if x < best {
                best = x;
                at = Some(t.levels[i]);
            }
        }
        if best == f64::INFINITY {
            TailEstimate::finite_sample(0.0, None)
        } else {
            TailEstimate::finite_sample(best, at)
        }
    };
    let unknown_tail = || TailEstimate::finite_sample(f64::NAN, None);
    let mut log_plus = sup(&t.log_plus_abs, false);
    if root_modulus >= log_plus.value || log_plus.value.is_nan() {
        log_plus.value = root_modulus;
        log_plus.attained_level = Some(0);
    }
    let mut pair_sup = sup(&t.pair_weighted, false);
    pair_sup.value += root_modulus;
    SymbolQuantities {
        root_modulus,
        log_weighted_diff_sup: sup(&t.log_diff, false),
        ratio_sup: sup(&t.ratio, true),
        square_weighted_diff_sup: sup(&t.sq_diff, false),
        linear_weighted_abs_sup: sup(&t.lin_abs_plus, true),
        log_plus_abs_sup: log_plus,
        pair_weighted_sup: pair_sup,
        probe_log_abs_sup: sup(&t.probe_log_abs, false),
        ratio_tail: unknown_tail(),
        log_weighted_diff_tail: unknown_tail(),
        linear_abs_tail: unknown_tail(),
        square_weighted_diff_tail: unknown_tail(),
        log_abs_tail: unknown_tail(),
        pair_weighted_tail: unknown_tail(),
        ratio_inf: inf(&t.ratio),
    }
}

/// Three-valued answer for properties of the operator on the infinite tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        }
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Unknown,
        }
    }
}

/// Is the quantity finite on the infinite tree?
fn finite(est: &TailEstimate) -> Verdict {
    match est.status {
        TailStatus::Stabilized => Verdict::Yes,
        TailStatus::Diverged => Verdict::No,
        TailStatus::FiniteSample | TailStatus::Inconclusive => Verdict::Unknown,
    }
}

/// Does the tail quantity vanish?
fn vanishes(est: &TailEstimate) -> Verdict {
    match est.status {
        TailStatus::Stabilized => {
            if est.value.abs() <= TOL_ZERO {
                Verdict::Yes
            } else {
                Verdict::No
            }
        }
        TailStatus::Diverged => Verdict::No,
        TailStatus::FiniteSample | TailStatus::Inconclusive => Verdict::Unknown,
    }
}

/// Is the infimum strictly positive?
fn positive_inf(est: &TailEstimate) -> Verdict {
    match est.status {
        TailStatus::Stabilized => {
            if est.value > 0.0 {
                Verdict::Yes
            } else {
                Verdict::No
            }
        }
        TailStatus::Diverged => Verdict::Yes,
        TailStatus::FiniteSample | TailStatus::Inconclusive => Verdict::Unknown,
    }
}

/// Classification of the multiplication operator for one space pair.
#[derive(Clone, Debug)]
pub struct OperatorClassification {
    pub pair: SpacePair,
    pub little_target: bool,
    pub bounded: Verdict,
    pub compact: Verdict,
    /// Only meaningful for the pair into bounded functions.
    pub bounded_below: Option<Verdict>,
}

/// Applies the boundedness/compactness characterizations for the pair.
/// Targeting the little subspace only changes the answer for the pair out of
/// bounded functions, where landing in the little space already forces the
/// tail to vanish (boundedness and compactness coincide there).
pub fn classify(
    q: &SymbolQuantities,
    pair: SpacePair,
    little_target: bool,
) -> OperatorClassification {
    let (bounded, compact, bounded_below) = match pair {
        SpacePair::WeightedToLipschitz => {
            let bounded = finite(&q.log_weighted_diff_sup).and(finite(&q.ratio_sup));
            let compact = bounded
                .and(vanishes(&q.ratio_tail))
                .and(vanishes(&q.log_weighted_diff_tail));
            (bounded, compact, None)
        }
        SpacePair::LipschitzToWeighted => {
            let bounded =
                finite(&q.square_weighted_diff_sup).and(finite(&q.linear_weighted_abs_sup));
            let compact = bounded
                .and(vanishes(&q.linear_abs_tail))
                .and(vanishes(&q.square_weighted_diff_tail));
            (bounded, compact, None)
        }
        SpacePair::WeightedToSup => {
            let bounded = finite(&q.log_plus_abs_sup);
            let compact = bounded.and(vanishes(&q.log_abs_tail));
            (bounded, compact, Some(positive_inf(&q.ratio_inf)))
        }
        SpacePair::SupToWeighted => {
            if little_target {
                let v = vanishes(&q.pair_weighted_tail);
                (v, v, None)
            } else {
                let bounded = finite(&q.pair_weighted_sup);
                let compact = bounded.and(vanishes(&q.pair_weighted_tail));
                (bounded, compact, None)
            }
        }
    };
    OperatorClassification {
        pair,
        little_target,
        bounded,
        compact,
        bounded_below,
    }
}

/// Whether a function belongs to each of the four spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipStatus {
    In,
    Out,
    /// Finite data only: membership on the infinite tree is undecidable.
    FiniteSampleOnly,
    Inconclusive,
}

impl MembershipStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MembershipStatus::In => "in",
            MembershipStatus::Out => "out",
            MembershipStatus::FiniteSampleOnly => "finite_sample_only",
            MembershipStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpaceMembership {
    pub lipschitz: MembershipStatus,
    pub little_lipschitz: MembershipStatus,
    pub weighted: MembershipStatus,
    pub little_weighted: MembershipStatus,
}

/// Space membership of a radial function, decided by tail ladders on its
/// differences.
pub fn membership_from_radial(expr: &RadialExpr) -> Result<SpaceMembership, ExprError> {
    let s = sample_radial(expr)?;
    let n = s.levels.len();
    let mut weighted_diff = vec![f64::NAN; n];
    for ((w, &lvl), &d) in weighted_diff.iter_mut().zip(&s.levels).zip(&s.diff) {
        if lvl >= 1 && !d.is_nan() {
            *w = d * lvl as f64;
        }
    }
    let of_sup = |est: &TailEstimate| match est.status {
        TailStatus::Stabilized => MembershipStatus::In,
        TailStatus::Diverged => MembershipStatus::Out,
        _ => MembershipStatus::Inconclusive,
    };
    let of_tail = |est: &TailEstimate| match est.status {
        TailStatus::Stabilized => {
            if est.value.abs() <= TOL_ZERO {
                MembershipStatus::In
            } else {
                MembershipStatus::Out
            }
        }
        TailStatus::Diverged => MembershipStatus::Out,
        _ => MembershipStatus::Inconclusive,
    };
    let plain_sup = estimate_sup(&s.levels, &s.diff);
    let plain_tail = estimate_limsup(&s.levels, &s.diff);
    let w_sup = estimate_sup(&s.levels, &weighted_diff);
    let w_tail = estimate_limsup(&s.levels, &weighted_diff);
    Ok(SpaceMembership {
        lipschitz: of_sup(&plain_sup),
        little_lipschitz: of_tail(&plain_tail),
        weighted: of_sup(&w_sup),
        little_weighted: of_tail(&w_tail),
    })
}

/// Membership statement possible from a finite table: none beyond the sample.
pub fn membership_from_table() -> SpaceMembership {
    SpaceMembership {
        lipschitz: MembershipStatus::FiniteSampleOnly,
        little_lipschitz: MembershipStatus::FiniteSampleOnly,
        weighted: MembershipStatus::FiniteSampleOnly,
        little_weighted: MembershipStatus::FiniteSampleOnly,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tail::TailStatus;

    fn radial(src: &str) -> SymbolQuantities {
        let expr = RadialExpr::parse(src).expect("parse");
        quantities_from_radial(&expr).expect("sample")
    }

    #[test]
    fn log_symbol_has_known_ratio_and_diff_suprema() {
        let q = radial("log(1+n)");
        // sup |psi(n)|/(n+1) = log(3)/3 at level 2.
        assert!((q.ratio_sup.value - 3f64.ln() / 3.0).abs() < 1e-15);
        assert_eq!(q.ratio_sup.attained_level, Some(2));
        assert_eq!(q.ratio_sup.status, TailStatus::Stabilized);
        // sup log(1+n)*d(n) = (log 2)^2 at level 1.
        assert!((q.log_weighted_diff_sup.value - 2f64.ln().powi(2)).abs() < 1e-15);
        assert_eq!(q.log_weighted_diff_sup.attained_level, Some(1));
        // Tail quantities vanish: the operator into Lipschitz is compact.
        assert_eq!(q.ratio_tail.value, 0.0);
        assert_eq!(q.log_weighted_diff_tail.value, 0.0);
        let c = classify(&q, SpacePair::WeightedToLipschitz, false);
        assert_eq!(c.bounded, Verdict::Yes);
        assert_eq!(c.compact, Verdict::Yes);
    }

    #[test]
    fn inverse_square_symbol_has_known_weighted_diff_suprema() {
        let q = radial("1/(n+1)^2");
        // sup n^2 d(n) = 3/4 at level 1; sup (n+1)|psi| = 1 at the root.
        assert!((q.square_weighted_diff_sup.value - 0.75).abs() < 1e-15);
        assert_eq!(q.square_weighted_diff_sup.attained_level, Some(1));
        assert!((q.linear_weighted_abs_sup.value - 1.0).abs() < 1e-15);
        assert_eq!(q.linear_weighted_abs_sup.attained_level, Some(0));
        assert_eq!(q.linear_abs_tail.value, 0.0);
        assert_eq!(q.square_weighted_diff_tail.value, 0.0);
        let c = classify(&q, SpacePair::LipschitzToWeighted, false);
        assert_eq!(c.bounded, Verdict::Yes);
        assert_eq!(c.compact, Verdict::Yes);
    }

    #[test]
    fn harmonic_like_symbol_keeps_linear_weight_one_everywhere() {
        let q = radial("1/(n+1)");
        assert!((q.linear_weighted_abs_sup.value - 1.0).abs() < 1e-15);
        assert!((q.linear_abs_tail.value - 1.0).abs() < 1e-12);
        let c = classify(&q, SpacePair::LipschitzToWeighted, false);
        assert_eq!(c.bounded, Verdict::Yes);
        assert_eq!(c.compact, Verdict::No);
    }

    #[test]
    fn log_reciprocal_symbol_attains_sup_weight_one_exactly() {
        // psi(n) = 1/(1+log n) for n >= 1, psi(0) = 0.5: every level's
        // (1+log n)|psi(n)| is exactly 1.
        let q = radial("min(1,max(0,n)) / (1+log(max(n,1))) + (1 - min(1,max(0,n))) * 0.5");
        assert_eq!(q.log_plus_abs_sup.status, TailStatus::Stabilized);
        assert!((q.log_plus_abs_sup.value - 1.0).abs() < 1e-12);
        let c = classify(&q, SpacePair::WeightedToSup, false);
        assert_eq!(c.bounded, Verdict::Yes);
        // log n * psi creeps up to 1 at a 1/log rate: the horizon cannot
        // resolve the limit, and the estimate says so instead of guessing.
        assert_eq!(q.log_abs_tail.status, TailStatus::Inconclusive);
        assert!(q.log_abs_tail.value > 0.9 && q.log_abs_tail.value < 1.0);
        assert_eq!(c.compact, Verdict::Unknown);
        // The smaller probe weight log(1+n) also falls short of 1 at the
        // horizon; the gap between the two suprema is what reports flag.
        assert_eq!(q.probe_log_abs_sup.status, TailStatus::Inconclusive);
        assert!(q.probe_log_abs_sup.value > 0.9 && q.probe_log_abs_sup.value < 1.0);
    }

    #[test]
    fn root_indicator_quantities_are_exact() {
        let q = radial("0.7 * (1 - min(1, max(0, n)))");
        assert_eq!(q.root_modulus, 0.7);
        assert_eq!(q.log_plus_abs_sup.value, 0.7);
        assert_eq!(q.log_plus_abs_sup.attained_level, Some(0));
        // Pair-weighted sup: root + sup n*(a(n)+a(n-1)) = 0.7 + 0.7 = 1.4.
        assert!((q.pair_weighted_sup.value - 1.4).abs() < 1e-15);
        // Unweighted root indicator: eta = 1 + 1 = 2.
        let q = radial("1 - min(1, max(0, n))");
        assert!((q.pair_weighted_sup.value - 2.0).abs() < 1e-15);
        assert_eq!(q.pair_weighted_tail.value, 0.0);
    }

    #[test]
    fn reciprocal_level_symbol_matches_the_worked_bracket_inputs() {
        // psi(0) = 1, psi(n) = 1/n: sup term at level 2 gives 1 + 3 = 4,
        // tail gives 2.
        let q = radial("1/max(n,1)");
        assert!((q.pair_weighted_sup.value - 4.0).abs() < 1e-15);
        assert!((q.pair_weighted_tail.value - 2.0).abs() < 1e-9);
        let c = classify(&q, SpacePair::SupToWeighted, false);
        assert_eq!(c.bounded, Verdict::Yes);
        assert_eq!(c.compact, Verdict::No);
        // Into the little subspace the tail must vanish, so not bounded.
        let c0 = classify(&q, SpacePair::SupToWeighted, true);
        assert_eq!(c0.bounded, Verdict::No);
    }

    #[test]
    fn log_reciprocal_tail_weight_is_exactly_one() {
        let q = radial("min(1, max(0, n-1)) / log(max(n, 2))");
        assert_eq!(q.log_abs_tail.status, TailStatus::Stabilized);
        assert!((q.log_abs_tail.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_symbol_diff_tails_vanish() {
        let q = radial("3");
        assert_eq!(q.log_weighted_diff_tail.value, 0.0);
        assert_eq!(q.log_weighted_diff_sup.value, 0.0);
        // ratio sup = 3 at the root, tail ratio 0: bounded and compact.
        assert_eq!(q.ratio_sup.value, 3.0);
        let c = classify(&q, SpacePair::WeightedToLipschitz, false);
        assert_eq!(c.bounded, Verdict::Yes);
        assert_eq!(c.compact, Verdict::Yes);
        // Into bounded functions a constant is never compact and the sup
        // weight diverges.
        let q1 = radial("1");
        let c1 = classify(&q1, SpacePair::WeightedToSup, false);
        assert_eq!(c1.bounded, Verdict::No);
    }

    #[test]
    fn bounded_below_tracks_the_ratio_infimum() {
        let q = radial("1/(n+1)");
        let c = classify(&q, SpacePair::WeightedToSup, false);
        assert_eq!(c.bounded_below, Some(Verdict::No));
        assert_eq!(q.ratio_inf.value, 0.0);

        let q = radial("n+1");
        let c = classify(&q, SpacePair::WeightedToSup, false);
        assert_eq!(c.bounded_below, Some(Verdict::Yes));
        assert!((q.ratio_inf.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_quantities_never_exceed_their_sup_companions() {
        for src in [
            "log(1+n)",
            "1/(n+1)",
            "1/(n+1)^2",
            "1/max(n,1)",
            "sqrt(n+1)/(n+2)",
            "min(1, max(0, n-1)) / log(max(n, 2))",
        ] {
            let q = radial(src);
            let pairs = [
                (&q.ratio_tail, &q.ratio_sup),
                (&q.log_weighted_diff_tail, &q.log_weighted_diff_sup),
                (&q.square_weighted_diff_tail, &q.square_weighted_diff_sup),
                (&q.pair_weighted_tail, &q.pair_weighted_sup),
                (&q.log_abs_tail, &q.log_plus_abs_sup),
            ];
            for (tail, sup) in pairs {
                if tail.value.is_finite() && sup.value.is_finite() {
                    assert!(
                        tail.value <= sup.value + 1e-15,
                        "{src}: tail {} > sup {}",
                        tail.value,
                        sup.value
                    );
                }
            }
            // Linear tail vs the (n+1)-weighted sup.
            if q.linear_abs_tail.value.is_finite() {
                assert!(q.linear_abs_tail.value <= q.linear_weighted_abs_sup.value + 1e-15);
            }
        }
    }

    #[test]
    fn membership_ladders_match_known_symbols() {
        let m = membership_from_radial(&RadialExpr::parse("log(1+n)").unwrap()).unwrap();
        assert_eq!(m.lipschitz, MembershipStatus::In);
        assert_eq!(m.little_lipschitz, MembershipStatus::In);
        assert_eq!(m.weighted, MembershipStatus::In);
        // n * d(n) -> 1, so not in the little weighted space.
        assert_eq!(m.little_weighted, MembershipStatus::Out);

        let m = membership_from_radial(&RadialExpr::parse("(log(1+n))^0.5").unwrap()).unwrap();
        assert_eq!(m.weighted, MembershipStatus::In);
        // n * d(n) ~ (log n)^(-1/2)/2 -> 0: in the little weighted space.
        assert_eq!(m.little_weighted, MembershipStatus::In);

        let m = membership_from_radial(&RadialExpr::parse("n").unwrap()).unwrap();
        assert_eq!(m.lipschitz, MembershipStatus::In);
        assert_eq!(m.weighted, MembershipStatus::Out);
    }

    #[test]
    fn profile_quantities_are_exact_and_make_no_tail_claims() {
        use crate::function::TreeFunction;
        use crate::tree::{Tree, TreeLimits};
        let t = Tree::homogeneous(2, 2, 6, &TreeLimits::with_max(1000)).expect("tree");
        let expr = RadialExpr::parse("1/(n+1)^2").expect("parse");
        let f = TreeFunction::from_radial(&t, &expr).expect("radial");
        let q = quantities_from_profile(&f.level_profile(&t), f.value(0).norm());
        assert!((q.square_weighted_diff_sup.value - 0.75).abs() < 1e-15);
        assert_eq!(q.square_weighted_diff_sup.status, TailStatus::FiniteSample);
        assert!(q.linear_abs_tail.value.is_nan());
        let c = classify(&q, SpacePair::LipschitzToWeighted, false);
        assert_eq!(c.bounded, Verdict::Unknown);
        assert_eq!(c.compact, Verdict::Unknown);
    }

    #[test]
    fn pair_codes_round_trip() {
        for pair in SpacePair::ALL {
            assert_eq!(SpacePair::parse(pair.code()), Some(pair));
        }
        assert_eq!(SpacePair::parse("L->L"), None);
    }
}
