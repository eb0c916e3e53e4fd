//! Tail analysis for radial data: sampling grids, suffix ladders, and the
//! classifier that decides whether a level-indexed quantity stabilizes,
//! diverges, or cannot be resolved at the sampling horizon.
//!
//! Quantities are sampled densely on an initial segment of levels and then
//! geometrically (eight points per octave) out to level 2^50. The ladder
//! records suffix aggregates at thresholds 2^k; the windows record per-octave
//! aggregates. Classification applies, in order: declared blow-up (top rung
//! past 1e12 with increasing windows), slope analysis of the trailing
//! windows (detecting power and log-power growth or decay), suffix
//! stabilization (last five rungs within relative 1e-12), and a zero floor.
//! Anything else is reported as inconclusive rather than extrapolated.

use crate::dd::Dd;
use crate::radial::{ExprError, RadialExpr};

/// Levels run out to 2^50; octave `k` covers `[2^k, 2^(k+1))`.
pub const TOP_EXPONENT: u32 = 50;

/// Dense sampling covers every level through this one.
pub const DENSE_TOP: u64 = 4096;

const STABLE_REL: f64 = 1e-12;
const WINDOW_FLAT_REL: f64 = 1e-11;
const ZERO_FLOOR: f64 = 1e-300;
const BLOWUP_ABS: f64 = 1e12;

/// Sorted sample levels: all of `0..=DENSE_TOP`, then eight per octave up to
/// and including 2^50.
pub fn sample_levels() -> Vec<u64> {
    let mut levels: Vec<u64> = (0..=DENSE_TOP).collect();
    let mut k = DENSE_TOP.trailing_zeros();
    while (1u64 << k) < DENSE_TOP {
        k += 1;
    }
    let mut x = DENSE_TOP as f64;
    let step = 2f64.powf(0.125);
    loop {
        x *= step;
        let lvl = x.floor() as u64;
        if lvl > (1u64 << TOP_EXPONENT) {
            break;
        }
        if lvl > *levels.last().expect("nonempty") {
            levels.push(lvl);
        }
    }
    let top = 1u64 << TOP_EXPONENT;
    if *levels.last().expect("nonempty") < top {
        levels.push(top);
    }
    levels
}

/// Verdict about the tail of a level-indexed quantity.
#[derive(Clone, Debug, PartialEq)]
pub enum LadderVerdict {
    /// Suffix aggregates stabilize to this value.
    TendsTo(f64),
    TendsToZero,
    TendsToInfinity,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderRung {
    pub exponent: u32,
    /// Aggregate over all samples at levels >= 2^exponent.
    pub value: f64,
}

/// Suffix ladder plus per-octave windows for one quantity.
#[derive(Clone, Debug)]
pub struct TailLadder {
    pub rungs: Vec<LadderRung>,
    /// windows[k] aggregates samples with 2^k <= level < 2^(k+1); the final
    /// entry holds the single sample at 2^TOP_EXPONENT. NaN where empty.
    pub windows: Vec<f64>,
    pub verdict: LadderVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Aggregate {
    Sup,
    Inf,
}

fn build_ladder(levels: &[u64], terms: &[f64], agg: Aggregate) -> TailLadder {
    assert_eq!(levels.len(), terms.len());
    let worst = match agg {
        Aggregate::Sup => f64::NEG_INFINITY,
        Aggregate::Inf => f64::INFINITY,
    };
    let fold = |a: f64, b: f64| match agg {
        Aggregate::Sup => a.max(b),
        Aggregate::Inf => a.min(b),
    };
    let nw = TOP_EXPONENT as usize + 1;
    let mut windows = vec![worst; nw];
    for (&lvl, &t) in levels.iter().zip(terms) {
        if lvl == 0 || t.is_nan() {
            continue;
        }
        let k = (63 - lvl.leading_zeros()) as usize;
        windows[k.min(nw - 1)] = fold(windows[k.min(nw - 1)], t);
    }
    let mut rungs = Vec::with_capacity(nw);
    let mut acc = worst;
    for k in (0..nw).rev() {
        if windows[k].is_finite() || windows[k] == f64::INFINITY {
            acc = fold(acc, windows[k]);
        }
        rungs.push(LadderRung {
            exponent: k as u32,
            value: acc,
        });
    }
    rungs.reverse();
    let windows: Vec<f64> = windows
        .into_iter()
        .map(|w| if w == worst { f64::NAN } else { w })
        .collect();
    let verdict = classify(&rungs, &windows);
    TailLadder {
        rungs,
        windows,
        verdict,
    }
}

/// Ladder of suffix suprema (limsup estimation).
pub fn suffix_sup_ladder(levels: &[u64], terms: &[f64]) -> TailLadder {
    build_ladder(levels, terms, Aggregate::Sup)
}

/// Ladder of suffix infima (liminf estimation).
pub fn suffix_inf_ladder(levels: &[u64], terms: &[f64]) -> TailLadder {
    build_ladder(levels, terms, Aggregate::Inf)
}

fn classify(rungs: &[LadderRung], windows: &[f64]) -> LadderVerdict {
    let last = match rungs.last() {
        Some(r) => r.value,
        None => return LadderVerdict::Inconclusive,
    };
    if !last.is_finite() && rungs[0].value == f64::INFINITY {
        return LadderVerdict::TendsToInfinity;
    }
    if rungs.iter().any(|r| r.value == f64::INFINITY) || last == f64::INFINITY {
        return LadderVerdict::TendsToInfinity;
    }

    // Trailing usable windows (skip NaN gaps); keep their octave indices.
    let usable: Vec<(usize, f64)> = windows
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_nan())
        .map(|(k, &w)| (k, w))
        .collect();
    if usable.is_empty() {
        return LadderVerdict::Inconclusive;
    }

    // Zero tail: the suffix aggregate itself has hit the floor.
    if last.abs() <= ZERO_FLOOR {
        return LadderVerdict::TendsToZero;
    }
    let tail_zero = usable
        .iter()
        .rev()
        .take(5)
        .all(|&(_, w)| w.abs() <= ZERO_FLOOR);
    if usable.len() >= 5 && tail_zero {
        return LadderVerdict::TendsToZero;
    }

    // Slope and monotonicity analysis works on full octaves only: the last
    // window holds the single sample at the horizon and would otherwise
    // contribute a spurious flat slope.
    let stub = windows.len() - 1;
    // Declared blow-up: huge top rung with increasing trailing windows.
    let full: Vec<(usize, f64)> = usable.iter().filter(|&&(k, _)| k < stub).copied().collect();
    let tail: Vec<(usize, f64)> = full[full.len().saturating_sub(16)..].to_vec();
    let increasing = tail.len() >= 5 && tail.windows(2).rev().take(4).all(|p| p[1].1 > p[0].1);
    if last > BLOWUP_ABS && increasing {
        return LadderVerdict::TendsToInfinity;
    }

    // Slope analysis over trailing positive windows.
    let pos: Vec<(usize, f64)> = tail
        .iter()
        .filter(|&&(_, w)| w > ZERO_FLOOR)
        .copied()
        .collect();
    if pos.len() >= 7 {
        let mut power = Vec::new();
        let mut logpow = Vec::new();
        for pair in pos.windows(2) {
            let (k0, w0) = pair[0];
            let (k1, w1) = pair[1];
            if k1 == k0 + 1 {
                let r = (w1 / w0).ln();
                power.push(r);
                logpow.push(k0 as f64 * r);
            }
        }
        if power.len() >= 6 {
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let dev = |v: &[f64], m: f64| v.iter().map(|x| (x - m).abs()).fold(0.0f64, f64::max);
            let rbar = mean(&power);
            if dev(&power, rbar) <= (0.2 * rbar.abs()).max(0.01) {
                if rbar > 0.02 {
                    return LadderVerdict::TendsToInfinity;
                }
                if rbar < -0.02 {
                    return LadderVerdict::TendsToZero;
                }
            }
            let sbar = mean(&logpow);
            if dev(&logpow, sbar) <= (0.25 * sbar.abs()).max(0.05) {
                if sbar > 0.25 {
                    return LadderVerdict::TendsToInfinity;
                }
                if sbar < -0.25 {
                    return LadderVerdict::TendsToZero;
                }
            }
        }
    }

    // Suffix stabilization: last five rungs within relative 1e-12. The rungs
    // alone cannot distinguish a flat tail from one still drifting toward
    // the horizon (the suffix aggregate of a monotone sequence is constant),
    // so also require the trailing full-octave windows to be flat.
    if rungs.len() >= 5 && full.len() >= 5 {
        let lastk = &rungs[rungs.len() - 5..];
        let lo = lastk.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        let hi = lastk
            .iter()
            .map(|r| r.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let rungs_flat = hi.is_finite()
            && lo.is_finite()
            && (hi - lo).abs() <= STABLE_REL * hi.abs().max(lo.abs()).max(ZERO_FLOOR);
        let lastw = &full[full.len() - 5..];
        let wlo = lastw.iter().map(|&(_, w)| w).fold(f64::INFINITY, f64::min);
        let whi = lastw
            .iter()
            .map(|&(_, w)| w)
            .fold(f64::NEG_INFINITY, f64::max);
        let windows_flat = whi.is_finite()
            && wlo.is_finite()
            && (whi - wlo).abs() <= WINDOW_FLAT_REL * whi.abs().max(wlo.abs()).max(ZERO_FLOOR);
        if rungs_flat && windows_flat {
            return LadderVerdict::TendsTo(last);
        }
    }

    LadderVerdict::Inconclusive
}

/// Confidence attached to a tail estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailStatus {
    Stabilized,
    Diverged,
    /// Exact on a finite truncation; says nothing about the tail.
    FiniteSample,
    Inconclusive,
}

impl TailStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TailStatus::Stabilized => "stabilized",
            TailStatus::Diverged => "diverged",
            TailStatus::FiniteSample => "finite_sample",
            TailStatus::Inconclusive => "inconclusive",
        }
    }
}

/// A scalar quantity derived from level samples, with its provenance.
#[derive(Clone, Debug)]
pub struct TailEstimate {
    /// The estimate; +infinity when the quantity diverges, NaN when a tail
    /// quantity is requested from finite data alone.
    pub value: f64,
    pub status: TailStatus,
    /// Sample level attaining the reported sup or inf, when meaningful.
    pub attained_level: Option<u64>,
    pub ladder: TailLadder,
}

impl TailEstimate {
    /// An estimate that is exact on a finite truncation, with no tail claim.
    pub fn finite_sample(value: f64, attained_level: Option<u64>) -> TailEstimate {
        TailEstimate {
            value,
            status: TailStatus::FiniteSample,
            attained_level,
            ladder: TailLadder {
                rungs: Vec::new(),
                windows: Vec::new(),
                verdict: LadderVerdict::Inconclusive,
            },
        }
    }
}

fn finite_extremum(
    levels: &[u64],
    terms: &[f64],
    include_root: bool,
    agg: Aggregate,
) -> (f64, Option<u64>) {
    let mut best = match agg {
        Aggregate::Sup => f64::NEG_INFINITY,
        Aggregate::Inf => f64::INFINITY,
    };
    let mut at = None;
    for (&lvl, &t) in levels.iter().zip(terms) {
        if t.is_nan() || (lvl == 0 && !include_root) {
            continue;
        }
        let better = match agg {
            Aggregate::Sup => t > best,
            Aggregate::Inf => t < best,
        };
        if better {
            best = t;
            at = Some(lvl);
        }
    }
    (best, at)
}

/// Supremum over all sampled levels (excluding level 0 entries marked NaN),
/// with divergence detection for the uncovered tail.
pub fn estimate_sup(levels: &[u64], terms: &[f64]) -> TailEstimate {
    let ladder = suffix_sup_ladder(levels, terms);
    let (sup, at) = finite_extremum(levels, terms, true, Aggregate::Sup);
    match ladder.verdict {
        LadderVerdict::TendsToInfinity => TailEstimate {
            value: f64::INFINITY,
            status: TailStatus::Diverged,
            attained_level: None,
            ladder,
        },
        LadderVerdict::TendsTo(_) | LadderVerdict::TendsToZero => TailEstimate {
            value: if sup.is_finite() { sup } else { 0.0 },
            status: TailStatus::Stabilized,
            attained_level: at,
            ladder,
        },
        LadderVerdict::Inconclusive => TailEstimate {
            value: if sup.is_finite() { sup } else { 0.0 },
            status: TailStatus::Inconclusive,
            attained_level: at,
            ladder,
        },
    }
}

/// Limit superior of the terms as the level grows.
pub fn estimate_limsup(levels: &[u64], terms: &[f64]) -> TailEstimate {
    let ladder = suffix_sup_ladder(levels, terms);
    match ladder.verdict {
        LadderVerdict::TendsToInfinity => TailEstimate {
            value: f64::INFINITY,
            status: TailStatus::Diverged,
            attained_level: None,
            ladder,
        },
        LadderVerdict::TendsToZero => TailEstimate {
            value: 0.0,
            status: TailStatus::Stabilized,
            attained_level: None,
            ladder,
        },
        LadderVerdict::TendsTo(v) => TailEstimate {
            value: v,
            status: TailStatus::Stabilized,
            attained_level: None,
            ladder,
        },
        LadderVerdict::Inconclusive => {
            let value = ladder.rungs.last().map(|r| r.value).unwrap_or(f64::NAN);
            TailEstimate {
                value,
                status: TailStatus::Inconclusive,
                attained_level: None,
                ladder,
            }
        }
    }
}

/// Infimum over all sampled levels, including the root when its term is
/// present, with decay detection for the uncovered tail.
pub fn estimate_inf(levels: &[u64], terms: &[f64]) -> TailEstimate {
    let ladder = suffix_inf_ladder(levels, terms);
    let (min, at) = finite_extremum(levels, terms, true, Aggregate::Inf);
    match ladder.verdict {
        LadderVerdict::TendsToZero => TailEstimate {
            value: 0.0,
            status: TailStatus::Stabilized,
            attained_level: None,
            ladder,
        },
        LadderVerdict::TendsTo(_) | LadderVerdict::TendsToInfinity => TailEstimate {
            value: if min.is_finite() { min } else { 0.0 },
            status: TailStatus::Stabilized,
            attained_level: at,
            ladder,
        },
        LadderVerdict::Inconclusive => TailEstimate {
            value: if min.is_finite() { min } else { 0.0 },
            status: TailStatus::Inconclusive,
            attained_level: at,
            ladder,
        },
    }
}

/// Radial symbol sampled on the standard grid, in double-double precision.
/// Differences are taken before rounding to f64, so weighted differences at
/// deep levels keep full relative accuracy.
#[derive(Clone, Debug)]
pub struct RadialSamples {
    pub levels: Vec<u64>,
    /// |psi(n)| per sample.
    pub abs: Vec<f64>,
    /// |psi(n) - psi(n-1)| per sample; NaN at level 0.
    pub diff: Vec<f64>,
    /// |psi(n)| + |psi(n-1)| per sample; NaN at level 0.
    pub pair: Vec<f64>,
    /// psi(0), signed.
    pub value_at_root: f64,
}

fn eval_or_overflow(expr: &RadialExpr, n: u64) -> Result<Option<Dd>, ExprError> {
    match expr.eval_dd(n) {
        Ok(v) => Ok(Some(v)),
        Err(ExprError::Overflow { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Samples a radial symbol on the standard grid. Overflowing samples become
/// +infinity entries (the ladder then reports divergence); domain errors are
/// returned, since a symbol must evaluate at every level.
pub fn sample_radial(expr: &RadialExpr) -> Result<RadialSamples, ExprError> {
    let levels = sample_levels();
    let mut abs = Vec::with_capacity(levels.len());
    let mut diff = Vec::with_capacity(levels.len());
    let mut pair = Vec::with_capacity(levels.len());
    let mut value_at_root = 0.0;
    for &n in &levels {
        let here = eval_or_overflow(expr, n)?;
        if n == 0 {
            value_at_root = here.map(|v| v.to_f64()).unwrap_or(f64::INFINITY);
            abs.push(here.map(|v| v.abs().to_f64()).unwrap_or(f64::INFINITY));
            diff.push(f64::NAN);
            pair.push(f64::NAN);
            continue;
        }
        let prev = eval_or_overflow(expr, n - 1)?;
        match (here, prev) {
            (Some(h), Some(p)) => {
                abs.push(h.abs().to_f64());
                diff.push((h - p).abs().to_f64());
                pair.push((h.abs() + p.abs()).to_f64());
            }
            (Some(h), None) => {
                abs.push(h.abs().to_f64());
                diff.push(f64::INFINITY);
                pair.push(f64::INFINITY);
            }
            (None, _) => {
                abs.push(f64::INFINITY);
                diff.push(f64::INFINITY);
                pair.push(f64::INFINITY);
            }
        }
    }
    Ok(RadialSamples {
        levels,
        abs,
        diff,
        pair,
        value_at_root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_terms(f: impl Fn(u64) -> f64) -> (Vec<u64>, Vec<f64>) {
        let levels = sample_levels();
        let terms: Vec<f64> = levels
            .iter()
            .map(|&n| if n == 0 { f64::NAN } else { f(n) })
            .collect();
        (levels, terms)
    }

    #[test]
    fn grid_is_sorted_dense_then_geometric() {
        let levels = sample_levels();
        assert_eq!(levels[0], 0);
        assert_eq!(levels[4096], 4096);
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*levels.last().unwrap(), 1u64 << 50);
        assert!(
            levels.len() < 4700,
            "grid should stay small: {}",
            levels.len()
        );
        // Roughly eight samples per octave beyond the dense block.
        let in_octave = levels
            .iter()
            .filter(|&&l| ((1u64 << 30)..(1u64 << 31)).contains(&l))
            .count();
        assert_eq!(in_octave, 8);
    }

    #[test]
    fn constant_terms_stabilize() {
        let (levels, terms) = grid_terms(|_| 3.0);
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 3.0);
    }

    #[test]
    fn power_decay_is_a_zero_limit_but_a_finite_sup() {
        let (levels, terms) = grid_terms(|n| 1.0 / n as f64);
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 0.0);
        let sup = estimate_sup(&levels, &terms);
        assert_eq!(sup.status, TailStatus::Stabilized);
        assert_eq!(sup.value, 1.0);
        assert_eq!(sup.attained_level, Some(1));
    }

    #[test]
    fn log_growth_diverges_without_reaching_the_blowup_bar() {
        let (levels, terms) = grid_terms(|n| (1.0 + n as f64).ln());
        // At the horizon the terms are only ~35, far below 1e12.
        let est = estimate_sup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Diverged);
        assert_eq!(est.value, f64::INFINITY);
    }

    #[test]
    fn slow_log_decay_tends_to_zero() {
        let (levels, terms) = grid_terms(|n| ((1 + n) as f64).ln().powf(-0.5));
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn linear_growth_trips_the_declared_blowup_rule() {
        let (levels, terms) = grid_terms(|n| n as f64);
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Diverged);
    }

    #[test]
    fn approach_to_a_positive_limit_stabilizes() {
        let (levels, terms) = grid_terms(|n| 2.0 + 1.0 / n as f64);
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert!((est.value - 2.0).abs() < 1e-9, "value {}", est.value);
    }

    #[test]
    fn finite_support_tends_to_zero() {
        let (levels, terms) = grid_terms(|n| if n <= 40 { 5.0 } else { 0.0 });
        let est = estimate_limsup(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 0.0);
        let sup = estimate_sup(&levels, &terms);
        assert_eq!(sup.value, 5.0);
    }

    #[test]
    fn infimum_decay_means_zero_infimum() {
        let (levels, terms) = grid_terms(|n| 1.0 / (n as f64 + 1.0));
        let est = estimate_inf(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn growing_infimum_is_attained_on_the_dense_part() {
        let (levels, terms) = grid_terms(|n| n as f64 + 1.0);
        let est = estimate_inf(&levels, &terms);
        assert_eq!(est.status, TailStatus::Stabilized);
        assert_eq!(est.value, 2.0);
        assert_eq!(est.attained_level, Some(1));
    }

    #[test]
    fn ladder_rungs_are_monotone_for_sup() {
        let (levels, terms) = grid_terms(|n| ((n % 17) as f64) / (n as f64).sqrt());
        let ladder = suffix_sup_ladder(&levels, &terms);
        for pair in ladder.rungs.windows(2) {
            assert!(pair[0].value >= pair[1].value - 1e-15);
        }
    }

    #[test]
    fn radial_sampling_keeps_weighted_differences_accurate() {
        let expr = RadialExpr::parse("log(1+n)").expect("parse");
        let s = sample_radial(&expr).expect("sample");
        let i = s.levels.iter().position(|&l| l == 1u64 << 50).expect("top");
        let n = s.levels[i] as f64;
        assert!(((n * s.diff[i]) - 1.0).abs() < 1e-12);
        let j = s.levels.iter().position(|&l| l == 1).expect("level 1");
        assert_eq!(s.abs[j], 2f64.ln());
        assert_eq!(s.pair[j], 2f64.ln());
        assert_eq!(s.value_at_root, 0.0);
    }

    #[test]
    fn radial_sampling_turns_overflow_into_divergence() {
        let expr = RadialExpr::parse("2^n").expect("parse");
        let s = sample_radial(&expr).expect("sample");
        assert!(s.abs.contains(&f64::INFINITY));
        let est = estimate_sup(&s.levels, &s.abs);
        assert_eq!(est.status, TailStatus::Diverged);
    }

    #[test]
    fn radial_sampling_surfaces_domain_errors() {
        let expr = RadialExpr::parse("1/n").expect("parse");
        assert!(matches!(
            sample_radial(&expr),
            Err(ExprError::Domain { level: 0, .. })
        ));
    }
}
