//! Witness functions: explicit unit-norm probes whose images under the
//! multiplication operator certify lower norm bounds.
//!
//! Each family has a construction on any finite tree, a source-space norm
//! computed on that tree, and, where the extremum is attained inside the
//! truncation, a closed-form norm. Radially defined families are built
//! through the same expression evaluator as radial symbols, so their stored
//! values are bit-for-bit reproducible.

use num_complex::Complex64;

use crate::dd;
use crate::diagnostics::SpacePair;
use crate::function::{modulus, FunctionError, TreeFunction};
use crate::radial::{ExprError, RadialExpr};
use crate::tree::Tree;

/// The three norms a probe can be normalized in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceSpace {
    Lipschitz,
    Weighted,
    Sup,
}

impl SourceSpace {
    pub fn norm(self, f: &TreeFunction, tree: &Tree) -> f64 {
        match self {
            SourceSpace::Lipschitz => f.lipschitz_norm(tree),
            SourceSpace::Weighted => f.weighted_norm(tree),
            SourceSpace::Sup => f.sup_norm(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceSpace::Lipschitz => "Lipschitz",
            SourceSpace::Weighted => "weighted Lipschitz",
            SourceSpace::Sup => "bounded",
        }
    }
}

/// Source and target norms for each operator pair.
pub fn source_space(pair: SpacePair) -> SourceSpace {
    match pair {
        SpacePair::WeightedToLipschitz | SpacePair::WeightedToSup => SourceSpace::Weighted,
        SpacePair::LipschitzToWeighted => SourceSpace::Lipschitz,
        SpacePair::SupToWeighted => SourceSpace::Sup,
    }
}

pub fn target_space(pair: SpacePair) -> SourceSpace {
    match pair {
        SpacePair::WeightedToLipschitz => SourceSpace::Lipschitz,
        SpacePair::LipschitzToWeighted | SpacePair::SupToWeighted => SourceSpace::Weighted,
        SpacePair::WeightedToSup => SourceSpace::Sup,
    }
}

/// A witness family plus its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessSpec {
    /// chi_v / (level+1) at the first vertex of the level; level 0 gives
    /// (1/2) chi_root. Unit weighted norm when the vertex has children.
    PointMass { level: u64 },
    /// chi_v at the first vertex of the level; unit Lipschitz norm.
    IndicatorVertex { level: u64 },
    /// f = 1 everywhere; unit norm in every space.
    Constant,
    /// f(n) = log(1 + min(n, cap)); weighted norm cap*log(1+1/cap) < 1.
    CappedLog { cap: u64 },
    /// f(n) = (log(1+n))^exponent for exponent in (0, 1].
    LogPower { exponent: f64 },
    /// f(n) = log^2(1 + min(n, cap-1)) / log(cap).
    SquaredLogRamp { cap: u64 },
    /// f(n) = max(0, 2 log(min(max(n,1), cap)) - log(cap)); zero through
    /// sqrt(cap), then a ramp to height log(cap). Requires cap >= 4.
    SqrtWindowRamp { cap: u64 },
    /// f(n) = (log(min(max(n,1), cap)))^(power+1) / (log cap)^power.
    LogRampP { cap: u64, power: u32 },
    /// f(n) = H(min(n, cap)), the harmonic-number ramp; weighted norm 1 on
    /// the ideal tree (each step size is exactly 1/n).
    HarmonicRamp { cap: u64 },
    /// f(n) = min(n, cap); unit Lipschitz norm.
    RadialCap { cap: u64 },
    /// f(n) = [n >= 1] * (min(n, cap-1) + 1)^2 / cap.
    QuadraticRamp { cap: u64 },
    /// f(n) = max(0, min(2n - cap + 2, cap)); slope-two ramp, height cap.
    HalfWindowRamp { cap: u64 },
    /// Indicator of levels in [start, factor*start] with the requested
    /// parity; unit sup norm.
    ParityAnnulus { start: u64, factor: u64, odd: bool },
    /// f(v) = +-conj(psi(v))/|psi(v)| by level parity, 0 where psi = 0; the
    /// image's differences are exactly |psi(v)| + |psi(parent)|.
    SignAlternating,
    /// Sign-alternating probe zeroed below `cutoff`.
    TailSign { cutoff: u64 },
}

impl WitnessSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            WitnessSpec::PointMass { .. } => "point_mass",
            WitnessSpec::IndicatorVertex { .. } => "indicator_vertex",
            WitnessSpec::Constant => "constant",
            WitnessSpec::CappedLog { .. } => "capped_log",
            WitnessSpec::LogPower { .. } => "log_power",
            WitnessSpec::SquaredLogRamp { .. } => "squared_log_ramp",
            WitnessSpec::SqrtWindowRamp { .. } => "sqrt_window_ramp",
            WitnessSpec::LogRampP { .. } => "log_ramp_p",
            WitnessSpec::HarmonicRamp { .. } => "harmonic_ramp",
            WitnessSpec::RadialCap { .. } => "radial_cap",
            WitnessSpec::QuadraticRamp { .. } => "quadratic_ramp",
            WitnessSpec::HalfWindowRamp { .. } => "half_window_ramp",
            WitnessSpec::ParityAnnulus { .. } => "parity_annulus",
            WitnessSpec::SignAlternating => "sign_alternating",
            WitnessSpec::TailSign { .. } => "tail_sign",
        }
    }
}

impl std::fmt::Display for WitnessSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessSpec::PointMass { level } => write!(f, "point_mass(level={level})"),
            WitnessSpec::IndicatorVertex { level } => write!(f, "indicator_vertex(level={level})"),
            WitnessSpec::Constant => write!(f, "constant"),
            WitnessSpec::CappedLog { cap } => write!(f, "capped_log(cap={cap})"),
            WitnessSpec::LogPower { exponent } => write!(f, "log_power(exponent={exponent})"),
            WitnessSpec::SquaredLogRamp { cap } => write!(f, "squared_log_ramp(cap={cap})"),
            WitnessSpec::SqrtWindowRamp { cap } => write!(f, "sqrt_window_ramp(cap={cap})"),
            WitnessSpec::LogRampP { cap, power } => {
                write!(f, "log_ramp_p(cap={cap}, power={power})")
            }
            WitnessSpec::HarmonicRamp { cap } => write!(f, "harmonic_ramp(cap={cap})"),
            WitnessSpec::RadialCap { cap } => write!(f, "radial_cap(cap={cap})"),
            WitnessSpec::QuadraticRamp { cap } => write!(f, "quadratic_ramp(cap={cap})"),
            WitnessSpec::HalfWindowRamp { cap } => write!(f, "half_window_ramp(cap={cap})"),
            WitnessSpec::ParityAnnulus { start, factor, odd } => {
                let parity = if *odd { "odd" } else { "even" };
                write!(
                    f,
                    "parity_annulus(start={start}, factor={factor}, parity={parity})"
                )
            }
            WitnessSpec::SignAlternating => write!(f, "sign_alternating"),
            WitnessSpec::TailSign { cutoff } => write!(f, "tail_sign(cutoff={cutoff})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("witness parameter out of range: {0}")]
    InvalidParam(String),
    #[error("witness level {level} exceeds the tree depth {depth}")]
    LevelBeyondDepth { level: u64, depth: u32 },
    #[error("this witness family needs the symbol to align signs against")]
    NeedsSymbol,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// A materialized probe: the function, its source norm on this tree, and
/// closed forms when the attaining level sits inside the truncation.
#[derive(Clone, Debug)]
pub struct Witness {
    pub spec: WitnessSpec,
    pub source: SourceSpace,
    pub function: TreeFunction,
    /// Source-space norm on the given tree, from the norm definitions.
    pub norm: f64,
    /// Closed-form value of `norm` when applicable to this truncation.
    pub closed_form_norm: Option<f64>,
    /// Known norm on the infinite tree, when it differs or is a limit.
    pub infinite_tree_norm: Option<f64>,
}

/// Radial expression for the families that admit one.
pub fn radial_form(spec: &WitnessSpec) -> Option<RadialExpr> {
    use RadialExpr as E;
    let e = match spec {
        WitnessSpec::Constant => E::lit(1.0),
        WitnessSpec::CappedLog { cap } => E::log(E::lit(1.0) + E::capped_level(*cap)),
        WitnessSpec::LogPower { exponent } => {
            E::pow(E::log(E::lit(1.0) + E::Level), E::lit(*exponent))
        }
        WitnessSpec::SquaredLogRamp { cap } => {
            let ramp = E::log(E::lit(1.0) + E::capped_level(cap - 1));
            E::pow(ramp, E::lit(2.0)) / E::log(E::lit(*cap as f64))
        }
        WitnessSpec::SqrtWindowRamp { cap } => {
            let clamped = E::min2(E::max2(E::Level, E::lit(1.0)), E::lit(*cap as f64));
            E::max2(
                E::lit(0.0),
                E::lit(2.0) * E::log(clamped) - E::log(E::lit(*cap as f64)),
            )
        }
        WitnessSpec::LogRampP { cap, power } => {
            let clamped = E::min2(E::max2(E::Level, E::lit(1.0)), E::lit(*cap as f64));
            E::pow(E::log(clamped), E::lit((*power + 1) as f64))
                / E::pow(E::log(E::lit(*cap as f64)), E::lit(*power as f64))
        }
        WitnessSpec::RadialCap { cap } => E::capped_level(*cap),
        WitnessSpec::QuadraticRamp { cap } => {
            let shifted = E::capped_level(cap.saturating_sub(1)) + E::lit(1.0);
            E::indicator_level_ge(1) * E::pow(shifted, E::lit(2.0)) / E::lit(*cap as f64)
        }
        WitnessSpec::HalfWindowRamp { cap } => {
            let c = *cap as f64;
            E::max2(
                E::lit(0.0),
                E::min2(E::lit(2.0) * E::Level - E::lit(c - 2.0), E::lit(c)),
            )
        }
        WitnessSpec::ParityAnnulus { start, factor, odd } => {
            let frac = E::lit(0.5) * E::Level - E::floor(E::lit(0.5) * E::Level);
            // 1 on levels of the requested parity, 0 on the others.
            let parity = if *odd {
                E::lit(2.0) * frac
            } else {
                E::lit(1.0) - E::lit(2.0) * frac
            };
            let window = E::indicator_level_ge(*start) - E::indicator_level_ge(factor * start + 1);
            parity * window
        }
        _ => return None,
    };
    Some(e)
}

fn validate(spec: &WitnessSpec) -> Result<(), WitnessError> {
    let bad = |msg: String| Err(WitnessError::InvalidParam(msg));
    match spec {
        WitnessSpec::CappedLog { cap }
        | WitnessSpec::HarmonicRamp { cap }
        | WitnessSpec::RadialCap { cap }
        | WitnessSpec::QuadraticRamp { cap } => {
            if *cap < 1 {
                return bad(format!("{}: cap must be >= 1", spec.family_name()));
            }
        }
        WitnessSpec::ParityAnnulus { start, factor, .. } => {
            if *start < 1 || *factor < 1 {
                return bad("parity_annulus: start and factor must be >= 1".to_string());
            }
        }
        WitnessSpec::SquaredLogRamp { cap } => {
            if *cap < 2 {
                return bad("squared_log_ramp: cap must be >= 2".to_string());
            }
        }
        WitnessSpec::SqrtWindowRamp { cap } => {
            if *cap < 4 {
                return bad("sqrt_window_ramp: cap must be >= 4".to_string());
            }
        }
        WitnessSpec::HalfWindowRamp { cap } => {
            if *cap < 2 {
                return bad("half_window_ramp: cap must be >= 2".to_string());
            }
        }
        WitnessSpec::LogRampP { cap, power } => {
            if *cap < 2 {
                return bad("log_ramp_p: cap must be >= 2".to_string());
            }
            if *power < 1 {
                return bad("log_ramp_p: power must be >= 1".to_string());
            }
        }
        WitnessSpec::LogPower { exponent } if !(*exponent > 0.0 && *exponent <= 1.0) => {
            return bad("log_power: exponent must lie in (0, 1]".to_string());
        }
        _ => {}
    }
    Ok(())
}

/// Closed-form source norm on a truncation of the given depth, when the
/// attaining level lies inside it. `has_children` refers to the anchor
/// vertex of the single-vertex families.
fn closed_form(
    spec: &WitnessSpec,
    source: SourceSpace,
    depth: u32,
    has_children: bool,
) -> Option<f64> {
    match (spec, source) {
        (WitnessSpec::PointMass { level }, SourceSpace::Weighted) => {
            let l = *level;
            if l == 0 {
                Some(if depth >= 1 { 1.0 } else { 0.5 })
            } else {
                Some(if has_children {
                    1.0
                } else {
                    l as f64 / (l as f64 + 1.0)
                })
            }
        }
        (WitnessSpec::IndicatorVertex { level }, SourceSpace::Lipschitz) => {
            Some(if *level == 0 { 2.0 } else { 1.0 })
        }
        (WitnessSpec::Constant, _) => Some(1.0),
        (WitnessSpec::CappedLog { cap }, SourceSpace::Weighted) => {
            let m = (*cap).min(depth as u64) as f64;
            if m < 1.0 {
                return None;
            }
            Some(m * ((m + 1.0) / m).ln())
        }
        (WitnessSpec::SquaredLogRamp { cap }, SourceSpace::Weighted) => {
            if (*cap - 1) > depth as u64 {
                return None;
            }
            Some(squared_log_ramp_seminorm(*cap))
        }
        (WitnessSpec::RadialCap { .. }, SourceSpace::Lipschitz) => {
            if depth >= 1 {
                Some(1.0)
            } else {
                None
            }
        }
        (WitnessSpec::QuadraticRamp { cap }, SourceSpace::Lipschitz) => {
            if (*cap).saturating_sub(1).max(1) > depth as u64 {
                return None;
            }
            Some(quadratic_ramp_norm(*cap))
        }
        (WitnessSpec::HalfWindowRamp { cap }, SourceSpace::Lipschitz) => {
            // The slope-two step first appears at level floor(cap/2).
            if (*cap / 2) > depth as u64 {
                None
            } else {
                Some(2.0)
            }
        }
        (WitnessSpec::ParityAnnulus { start, factor, odd }, SourceSpace::Sup) => {
            // Unit norm requires a level of the right parity inside both the
            // window and the truncation.
            let hi = (factor * start).min(depth as u64);
            let want = u64::from(*odd);
            (*start..=hi).any(|n| n % 2 == want).then_some(1.0)
        }
        _ => None,
    }
}

/// Weighted seminorm of the squared-log ramp with the given cap, attained at
/// level cap-1: (cap-1) log(cap/(cap-1)) log((cap-1)cap) / log(cap).
pub fn squared_log_ramp_seminorm(cap: u64) -> f64 {
    let c = cap as f64;
    (c - 1.0) * (c / (c - 1.0)).ln() * ((c - 1.0) * c).ln() / c.ln()
}

/// Lipschitz norm of the quadratic ramp: 1 for cap 1, else max(4, 2cap-1)/cap.
pub fn quadratic_ramp_norm(cap: u64) -> f64 {
    if cap == 1 {
        1.0
    } else {
        let c = cap as f64;
        (4f64).max(2.0 * c - 1.0) / c
    }
}

/// The space each family is normalized in by the constructions it serves.
pub fn natural_source(spec: &WitnessSpec) -> SourceSpace {
    match spec {
        WitnessSpec::PointMass { .. }
        | WitnessSpec::CappedLog { .. }
        | WitnessSpec::LogPower { .. }
        | WitnessSpec::SquaredLogRamp { .. }
        | WitnessSpec::SqrtWindowRamp { .. }
        | WitnessSpec::LogRampP { .. }
        | WitnessSpec::HarmonicRamp { .. } => SourceSpace::Weighted,
        WitnessSpec::IndicatorVertex { .. }
        | WitnessSpec::RadialCap { .. }
        | WitnessSpec::QuadraticRamp { .. }
        | WitnessSpec::HalfWindowRamp { .. } => SourceSpace::Lipschitz,
        WitnessSpec::Constant
        | WitnessSpec::ParityAnnulus { .. }
        | WitnessSpec::SignAlternating
        | WitnessSpec::TailSign { .. } => SourceSpace::Sup,
    }
}

/// Builds the witness in its family's natural source space.
pub fn make_witness(
    spec: &WitnessSpec,
    tree: &Tree,
    psi: Option<&TreeFunction>,
) -> Result<Witness, WitnessError> {
    build(spec, tree, natural_source(spec), psi)
}

/// Builds the witness on the tree and computes its source norm there.
/// `psi` is required by the sign-aligned families.
pub fn build(
    spec: &WitnessSpec,
    tree: &Tree,
    source: SourceSpace,
    psi: Option<&TreeFunction>,
) -> Result<Witness, WitnessError> {
    validate(spec)?;
    let depth = tree.depth();
    let mut anchor_has_children = false;
    let function = match spec {
        WitnessSpec::PointMass { level } => {
            let l = *level;
            if l > depth as u64 {
                return Err(WitnessError::LevelBeyondDepth { level: l, depth });
            }
            let v = tree.vertices_at_level(l as u32).start;
            anchor_has_children = !tree.is_leaf(v);
            let mut f = TreeFunction::zero(tree);
            let weight = if l == 0 { 0.5 } else { 1.0 / (l as f64 + 1.0) };
            f.set_value(v, Complex64::new(weight, 0.0));
            f
        }
        WitnessSpec::IndicatorVertex { level } => {
            let l = *level;
            if l > depth as u64 {
                return Err(WitnessError::LevelBeyondDepth { level: l, depth });
            }
            let v = tree.vertices_at_level(l as u32).start;
            anchor_has_children = !tree.is_leaf(v);
            let mut f = TreeFunction::zero(tree);
            f.set_value(v, Complex64::new(1.0, 0.0));
            f
        }
        WitnessSpec::HarmonicRamp { cap } => {
            let mut by_level = Vec::with_capacity(depth as usize + 1);
            for n in 0..=depth as u64 {
                by_level.push(dd::harmonic(n.min(*cap)).to_f64());
            }
            let values: Vec<Complex64> = (0..tree.vertex_count() as u32)
                .map(|v| Complex64::new(by_level[tree.level(v) as usize], 0.0))
                .collect();
            TreeFunction::from_internal_values(values)
        }
        WitnessSpec::SignAlternating => sign_aligned(tree, psi, 0)?,
        WitnessSpec::TailSign { cutoff } => sign_aligned(tree, psi, *cutoff)?,
        radial => {
            let expr = radial_form(radial).expect("all remaining families are radial");
            TreeFunction::from_radial(tree, &expr)?
        }
    };
    let norm = source.norm(&function, tree);
    let closed = closed_form(spec, source, depth, anchor_has_children);
    let infinite = infinite_norm(spec, source);
    Ok(Witness {
        spec: spec.clone(),
        source,
        function,
        norm,
        closed_form_norm: closed,
        infinite_tree_norm: infinite,
    })
}

/// f(v) = parity(level) * conj(psi(v))/|psi(v)|, zero where psi vanishes;
/// levels below `cutoff` are zeroed. The image psi*f then takes the value
/// +-|psi(v)| with alternating signs, so differences add moduli exactly.
fn sign_aligned(
    tree: &Tree,
    psi: Option<&TreeFunction>,
    cutoff: u64,
) -> Result<TreeFunction, WitnessError> {
    let psi = psi.ok_or(WitnessError::NeedsSymbol)?;
    let mut f = TreeFunction::zero(tree);
    for v in 0..tree.vertex_count() as u32 {
        let lvl = tree.level(v) as u64;
        if lvl < cutoff {
            continue;
        }
        let z = psi.value(v);
        let m = modulus(z);
        if m == 0.0 {
            continue;
        }
        let sign = if lvl.is_multiple_of(2) { 1.0 } else { -1.0 };
        f.set_value(v, z.conj() * (sign / m));
    }
    Ok(f)
}

/// Known norm on the infinite tree, when it is a limit not visible in a
/// truncation.
fn infinite_norm(spec: &WitnessSpec, source: SourceSpace) -> Option<f64> {
    match (spec, source) {
        (WitnessSpec::HarmonicRamp { .. }, SourceSpace::Weighted) => Some(1.0),
        (WitnessSpec::LogPower { exponent }, SourceSpace::Weighted) if *exponent == 1.0 => {
            Some(1.0)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeLimits;

    fn limits() -> TreeLimits {
        TreeLimits::with_max(10_000_000)
    }

    /// Branching near the root, then unary spines down to `depth`.
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

    #[test]
    fn point_mass_norm_is_one_with_children_and_shrinks_at_leaves() {
        let t = mixed_tree(3, 8);
        let w = build(
            &WitnessSpec::PointMass { level: 3 },
            &t,
            SourceSpace::Weighted,
            None,
        )
        .expect("build");
        assert_eq!(w.closed_form_norm, Some(1.0));
        assert!((w.norm - 1.0).abs() < 1e-15);
        let w = build(
            &WitnessSpec::PointMass { level: 8 },
            &t,
            SourceSpace::Weighted,
            None,
        )
        .expect("build");
        assert_eq!(w.closed_form_norm, Some(8.0 / 9.0));
        assert!((w.norm - 8.0 / 9.0).abs() < 1e-15);
        let w = build(
            &WitnessSpec::PointMass { level: 0 },
            &t,
            SourceSpace::Weighted,
            None,
        )
        .expect("build");
        assert!((w.norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertex_indicator_has_unit_lipschitz_norm() {
        let t = mixed_tree(3, 8);
        for level in [1u64, 2, 5, 8] {
            let w = build(
                &WitnessSpec::IndicatorVertex { level },
                &t,
                SourceSpace::Lipschitz,
                None,
            )
            .expect("build");
            assert!((w.norm - 1.0).abs() < 1e-15, "level {level}: {}", w.norm);
        }
    }

    #[test]
    fn quadratic_ramp_norms_match_the_closed_form() {
        let t = mixed_tree(2, 16);
        for (cap, expect) in [
            (1u64, 1.0),
            (2, 2.0),
            (3, 5.0 / 3.0),
            (4, 7.0 / 4.0),
            (5, 1.8),
        ] {
            let w = build(
                &WitnessSpec::QuadraticRamp { cap },
                &t,
                SourceSpace::Lipschitz,
                None,
            )
            .expect("build");
            assert_eq!(w.closed_form_norm, Some(expect), "cap {cap}");
            assert!(
                (w.norm - expect).abs() < 1e-12,
                "cap {cap}: computed {} expected {expect}",
                w.norm
            );
        }
    }

    #[test]
    fn squared_log_ramp_matches_closed_form_and_sandwich() {
        let t = mixed_tree(2, 128);
        for cap in [4u64, 10, 100] {
            let w = build(
                &WitnessSpec::SquaredLogRamp { cap },
                &t,
                SourceSpace::Weighted,
                None,
            )
            .expect("build");
            let formula = squared_log_ramp_seminorm(cap);
            assert!(
                (w.norm - formula).abs() < 1e-12,
                "cap {cap}: computed {} formula {formula}",
                w.norm
            );
            let lo = 2f64.ln().powi(2) / (cap as f64).ln();
            assert!(lo <= w.norm && w.norm < 2.0, "sandwich failed at cap {cap}");
        }
        // Frozen value at cap 10: 9 log(10/9) log(90) / log(10).
        assert!((squared_log_ramp_seminorm(10) - 1.8530999866347466).abs() < 1e-12);
    }

    #[test]
    fn capped_log_norm_approaches_one_from_below() {
        let t = mixed_tree(2, 64);
        let mut last = 0.0;
        for cap in [1u64, 2, 4, 16, 60] {
            let w = build(
                &WitnessSpec::CappedLog { cap },
                &t,
                SourceSpace::Weighted,
                None,
            )
            .expect("build");
            let c = cap as f64;
            let formula = c * ((c + 1.0) / c).ln();
            assert!((w.norm - formula).abs() < 1e-13, "cap {cap}");
            assert!(w.norm < 1.0);
            assert!(w.norm > last);
            last = w.norm;
        }
    }

    #[test]
    fn harmonic_ramp_weighted_norm_is_one_to_rounding() {
        let t = mixed_tree(2, 100);
        let w = build(
            &WitnessSpec::HarmonicRamp { cap: 80 },
            &t,
            SourceSpace::Weighted,
            None,
        )
        .expect("build");
        assert!((w.norm - 1.0).abs() < 1e-11, "norm {}", w.norm);
        assert_eq!(w.infinite_tree_norm, Some(1.0));
    }

    #[test]
    fn half_window_ramp_has_lipschitz_norm_two() {
        let t = mixed_tree(2, 32);
        for cap in [2u64, 5, 10, 31] {
            let w = build(
                &WitnessSpec::HalfWindowRamp { cap },
                &t,
                SourceSpace::Lipschitz,
                None,
            )
            .expect("build");
            assert!((w.norm - 2.0).abs() < 1e-15, "cap {cap}: {}", w.norm);
        }
    }

    #[test]
    fn sqrt_window_ramp_stays_below_four_and_reaches_log_cap() {
        let t = mixed_tree(2, 64);
        for cap in [4u64, 9, 25, 49] {
            let w = build(
                &WitnessSpec::SqrtWindowRamp { cap },
                &t,
                SourceSpace::Weighted,
                None,
            )
            .expect("build");
            assert!(w.norm < 4.0, "cap {cap}: {}", w.norm);
            let top = w.function.value(t.vertices_at_level(cap as u32).start).re;
            assert!((top - (cap as f64).ln()).abs() < 1e-12);
        }
        assert!(matches!(
            build(
                &WitnessSpec::SqrtWindowRamp { cap: 3 },
                &t,
                SourceSpace::Weighted,
                None
            ),
            Err(WitnessError::InvalidParam(_))
        ));
    }

    #[test]
    fn log_ramp_norm_is_at_most_power_plus_one_up_to_the_edge_step() {
        // The discrete step at level cap inflates the slope bound p+1 by at
        // most cap/(cap-1); the witness stays that close to unit strength.
        let t = mixed_tree(2, 64);
        for (cap, power) in [(8u64, 1u32), (16, 2), (32, 3)] {
            let w = build(
                &WitnessSpec::LogRampP { cap, power },
                &t,
                SourceSpace::Weighted,
                None,
            )
            .expect("build");
            let bound = (power + 1) as f64 * cap as f64 / (cap as f64 - 1.0);
            assert!(
                w.norm <= bound + 1e-12,
                "cap {cap} power {power}: {} > {bound}",
                w.norm
            );
            assert!(w.norm > (power + 1) as f64 * 0.9);
        }
    }

    #[test]
    fn parity_annulus_is_a_unit_sup_probe_supported_on_one_parity() {
        let t = mixed_tree(2, 40);
        for (start, factor, odd) in [(3u64, 2u64, false), (8, 3, true), (5, 1, true)] {
            let spec = WitnessSpec::ParityAnnulus { start, factor, odd };
            let w = make_witness(&spec, &t, None).expect("build");
            assert_eq!(w.norm, 1.0, "{spec}");
            assert_eq!(w.closed_form_norm, Some(1.0));
            let want = u64::from(odd);
            for v in 0..t.vertex_count() as u32 {
                let lvl = t.level(v) as u64;
                let x = w.function.value(v).re;
                let expected = if lvl >= start && lvl <= factor * start && lvl % 2 == want {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(x, expected, "{spec} level {lvl}");
            }
        }
    }

    #[test]
    fn sign_alternating_image_differences_add_moduli() {
        use crate::radial::RadialExpr;
        let t = mixed_tree(3, 10);
        let psi =
            TreeFunction::from_radial(&t, &RadialExpr::parse("1/(1+n)").unwrap()).expect("symbol");
        let w = build(
            &WitnessSpec::SignAlternating,
            &t,
            SourceSpace::Sup,
            Some(&psi),
        )
        .expect("build");
        assert_eq!(w.norm, 1.0);
        let image = psi.multiply(&w.function);
        for v in 1..t.vertex_count() as u32 {
            let p = t.parent(v).unwrap();
            let expect = modulus(psi.value(v)) + modulus(psi.value(p));
            assert!(
                (image.difference(&t, v) - expect).abs() < 1e-15,
                "vertex {v}"
            );
        }
        // Complex symbols align through the conjugate phase.
        let vals: Vec<Complex64> = (0..t.vertex_count())
            .map(|i| Complex64::new((i as f64 * 0.37).cos(), (i as f64 * 0.11).sin()))
            .collect();
        let psi = TreeFunction::from_values(&t, &vals).expect("table");
        let w = build(
            &WitnessSpec::SignAlternating,
            &t,
            SourceSpace::Sup,
            Some(&psi),
        )
        .expect("build");
        let image = psi.multiply(&w.function);
        for v in 1..t.vertex_count() as u32 {
            let p = t.parent(v).unwrap();
            let expect = modulus(psi.value(v)) + modulus(psi.value(p));
            assert!(
                (image.difference(&t, v) - expect).abs() < 1e-12,
                "vertex {v}: {} vs {expect}",
                image.difference(&t, v)
            );
        }
    }

    #[test]
    fn tail_sign_vanishes_below_the_cutoff() {
        let t = mixed_tree(2, 12);
        let psi = TreeFunction::constant(&t, Complex64::new(0.5, 0.0));
        let w = build(
            &WitnessSpec::TailSign { cutoff: 5 },
            &t,
            SourceSpace::Sup,
            Some(&psi),
        )
        .expect("build");
        for v in 0..t.vertex_count() as u32 {
            let m = modulus(w.function.value(v));
            if (t.level(v) as u64) < 5 {
                assert_eq!(m, 0.0);
            } else {
                assert!((m - 1.0).abs() < 1e-15);
            }
        }
        assert!(matches!(
            build(&WitnessSpec::SignAlternating, &t, SourceSpace::Sup, None),
            Err(WitnessError::NeedsSymbol)
        ));
    }

    #[test]
    fn radial_families_share_the_expression_evaluator() {
        let t = mixed_tree(2, 20);
        let spec = WitnessSpec::CappedLog { cap: 7 };
        let expr = radial_form(&spec).expect("radial");
        let w = build(&spec, &t, SourceSpace::Weighted, None).expect("build");
        for v in 0..t.vertex_count() as u32 {
            let direct = expr.eval(t.level(v) as u64).expect("eval");
            assert_eq!(w.function.value(v).re.to_bits(), direct.to_bits());
        }
    }
}
