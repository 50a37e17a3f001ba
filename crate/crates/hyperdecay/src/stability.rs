//! Hyperbolicity and interlacing classification, strict stability of
//! `Q(λ, iξ)` and the degeneracy flags that modify decay rates.

use num_complex::Complex64;
use serde::Serialize;

use crate::rootkit::{real_roots, roots, spectral_abscissa};
use crate::symbol_core::{Direction, HomogeneousSymbol, OperatorStack, UnivariatePoly};
use crate::{Error, Result};

const HYPERBOLIC_GAP: f64 = 1e-7;
const INTERLACE_GAP: f64 = 1e-9;
const TRIPLE_ROOT: f64 = 1e-8;
/// Two real roots closer than this (relative) count as a common root.
pub const COMMON_ROOT: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Hyperbolicity {
    Strict,
    Weak,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InterlaceKind {
    Strict,
    Weak,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub direction: Option<Vec<f64>>,
    /// Positions in the merged sorted sequence `λ_1, b_1, λ_2, …` that meet or cross.
    pub merged_positions: (usize, usize),
    pub values: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterlacingClass {
    pub kind: InterlaceKind,
    /// Smallest signed gap in the merged sequence, relative to the root scale.
    pub margin: f64,
    pub witness: Option<Witness>,
}

pub fn classify_hyperbolicity(sym: &HomogeneousSymbol, samples: &[Direction]) -> Result<Hyperbolicity> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no sample directions".into()));
    }
    if sym.leading_time_coeff() <= 0.0 {
        return Err(Error::InvalidInput("pure-time coefficient must be positive".into()));
    }
    let mut class = Hyperbolicity::Strict;
    for d in samples {
        let p = sym.restrict(d.components())?;
        if p.degree() == 0 {
            continue;
        }
        let r = match real_roots(&p) {
            Ok(r) => r,
            Err(Error::NonReal) => return Ok(Hyperbolicity::None),
            Err(e) => return Err(e),
        };
        let scale = root_scale(&r);
        if r.windows(2).any(|w| w[1] - w[0] <= HYPERBOLIC_GAP * scale) {
            class = Hyperbolicity::Weak;
        }
    }
    Ok(class)
}

pub(crate) fn root_scale(r: &[f64]) -> f64 {
    1.0 + r.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Interlacing of the roots of `p_low` (degree d) and `p_high` (degree d + 1).
pub fn classify_interlacing(p_low: &UnivariatePoly, p_high: &UnivariatePoly) -> Result<InterlacingClass> {
    if p_high.degree() != p_low.degree() + 1 || p_low.is_zero() {
        return Err(Error::DegreeMismatch(format!(
            "degrees {} and {}",
            p_low.degree(),
            p_high.degree()
        )));
    }
    let b = if p_low.degree() == 0 { Vec::new() } else { real_roots(p_low)? };
    let a = real_roots(p_high)?;
    Ok(interlace_sorted(&b, &a))
}

fn interlace_sorted(b: &[f64], a: &[f64]) -> InterlacingClass {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    for i in 0..a.len() {
        merged.push(a[i]);
        if i < b.len() {
            merged.push(b[i]);
        }
    }
    let scale = root_scale(&merged);
    let tol = INTERLACE_GAP * scale;
    let mut kind = InterlaceKind::Strict;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..merged.len().saturating_sub(1) {
        let gap = merged[i + 1] - merged[i];
        margin = margin.min(gap / scale);
        let here = if gap > tol {
            InterlaceKind::Strict
        } else if gap >= -tol {
            InterlaceKind::Weak
        } else {
            InterlaceKind::Fail
        };
        if here > kind {
            kind = here;
            witness = Some(Witness {
                direction: None,
                merged_positions: (i, i + 1),
                values: (merged[i], merged[i + 1]),
            });
        }
    }
    InterlacingClass { kind, margin, witness }
}

fn worse(acc: &mut Option<InterlacingClass>, next: InterlacingClass, d: &Direction) {
    let mut next = next;
    if let Some(w) = next.witness.as_mut() {
        w.direction = Some(d.components().to_vec());
    }
    match acc {
        None => *acc = Some(next),
        Some(cur) => {
            let margin = cur.margin.min(next.margin);
            if next.kind > cur.kind {
                *cur = next;
            }
            cur.margin = margin;
        }
    }
}

/// Routh–Hurwitz for `λ³ + a2 λ² + a1 λ + a0` with positive coefficients.
pub fn routh_hurwitz_cubic(a2: f64, a1: f64, a0: f64) -> Result<bool> {
    if !(a2 > 0.0 && a1 > 0.0 && a0 > 0.0) {
        return Err(Error::InvalidInput("coefficients must be positive".into()));
    }
    Ok(a0 < a1 * a2)
}

/// Strict interlacing of `P_{m-1} − P_{m-3}` and `P_m − P_{m-2}` at a real `ξ ≠ 0`.
pub fn hermite_biehler_stable(stack: &OperatorStack, xi: &[f64]) -> Result<bool> {
    if xi.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidInput("hermite_biehler_stable needs ξ ≠ 0".into()));
    }
    let part = |j: usize| -> Result<UnivariatePoly> {
        match stack.p(j) {
            Some(s) => s.restrict(xi),
            None => Ok(UnivariatePoly::zero()),
        }
    };
    let e = part(0)?.sub(&part(2)?);
    let o = part(1)?.sub(&part(3)?);
    if e.leading().re <= 0.0 || o.leading().re <= 0.0 {
        return Ok(false);
    }
    match classify_interlacing(&o, &e) {
        Ok(c) => Ok(c.kind == InterlaceKind::Strict),
        Err(Error::NonReal) | Err(Error::DegreeMismatch(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioFlag {
    /// A simple root of `P_{m-2}` is shared with `P_{m-1}`: `|ξ|⁴` damping at low frequency.
    SlowLow,
    /// `P_{m-2}` has a multiple root.
    DecayLoss,
    /// A simple root of `P_m` is shared with `P_{m-1}`: damping vanishes at high frequency.
    RegLossDecay,
    /// `P_m` has a multiple root.
    DerivativeLoss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    NotStable,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleRootCheck {
    pub none_found: bool,
    /// Smallest `max(|P_m|, |P_{m-2}|)` (relative) over real roots of `P_{m-1}`.
    pub margin: f64,
    pub witness: Option<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub model: String,
    pub order: usize,
    pub depth: usize,
    pub directions_sampled: usize,
    /// Per symbol `P_m, P_{m-1}, …`.
    pub hyperbolicity: Vec<Hyperbolicity>,
    /// `(P_{m-1}, P_m)`.
    pub interlacing_high: Option<InterlacingClass>,
    /// `(P_{m-2}, P_{m-1})`, for depth ≥ 2.
    pub interlacing_low: Option<InterlacingClass>,
    pub triple_root: Option<TripleRootCheck>,
    /// Verdict of the structural route (interlacing lemma or Hermite–Biehler).
    pub lemma_condition: bool,
    /// Largest sampled spectral abscissa and whether every sample was negative.
    pub abscissa_max: f64,
    pub abscissa_check: bool,
    pub strictly_stable: bool,
    pub verdict: Verdict,
    pub scenario_flags: Vec<ScenarioFlag>,
}

/// Radii for the direct spectral-abscissa check.
pub fn abscissa_radii() -> Vec<f64> {
    crate::rootkit::log_grid(1e-2, 1e2, 16)
}

fn abscissa_scan(stack: &OperatorStack, samples: &[Direction], radii: &[f64]) -> Result<(f64, bool)> {
    let mut max = f64::NEG_INFINITY;
    let mut ok = true;
    for d in samples {
        for &r in radii {
            let a = spectral_abscissa(stack, &d.scaled(r))?;
            max = max.max(a);
            if a >= -1e-12 * (1.0 + r) {
                ok = false;
            }
        }
    }
    Ok((max, ok))
}

fn has_multiple(r: &[f64]) -> bool {
    let scale = root_scale(r);
    r.windows(2).any(|w| w[1] - w[0] <= HYPERBOLIC_GAP * scale)
}

/// Whether some simple root of `p` lies within the common-root tolerance of a root of `q`.
fn simple_root_shared(p: &[f64], q: &[f64]) -> bool {
    let scale = root_scale(p).max(root_scale(q));
    let tol = COMMON_ROOT * scale;
    p.iter().enumerate().any(|(i, &x)| {
        let simple = p
            .iter()
            .enumerate()
            .all(|(j, &y)| j == i || (x - y).abs() > tol);
        simple && q.iter().any(|&y| (x - y).abs() <= tol)
    })
}

fn real_or_none(p: &UnivariatePoly) -> Option<Vec<f64>> {
    if p.degree() == 0 {
        return Some(Vec::new());
    }
    real_roots(p).ok()
}

fn interlace_pair(
    stack: &OperatorStack,
    j: usize,
    samples: &[Direction],
) -> Result<Option<InterlacingClass>> {
    let mut acc = None;
    for d in samples {
        let low = stack.restrict(j + 1, d)?;
        let high = stack.restrict(j, d)?;
        match classify_interlacing(&low, &high) {
            Ok(c) => worse(&mut acc, c, d),
            Err(Error::NonReal) => {
                worse(
                    &mut acc,
                    InterlacingClass {
                        kind: InterlaceKind::Fail,
                        margin: f64::NEG_INFINITY,
                        witness: None,
                    },
                    d,
                );
            }
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

fn base_report(stack: &OperatorStack, samples: &[Direction]) -> Result<StabilityReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no sample directions".into()));
    }
    let hyperbolicity = stack
        .symbols()
        .iter()
        .map(|s| classify_hyperbolicity(s, samples))
        .collect::<Result<Vec<_>>>()?;
    let interlacing_high = interlace_pair(stack, 0, samples)?;
    let interlacing_low = if stack.depth() >= 2 {
        interlace_pair(stack, 1, samples)?
    } else {
        None
    };
    let (abscissa_max, abscissa_check) = abscissa_scan(stack, samples, &abscissa_radii())?;
    Ok(StabilityReport {
        model: stack.name().to_string(),
        order: stack.order(),
        depth: stack.depth(),
        directions_sampled: samples.len(),
        hyperbolicity,
        interlacing_high,
        interlacing_low,
        triple_root: None,
        lemma_condition: false,
        abscissa_max,
        abscissa_check,
        strictly_stable: false,
        verdict: Verdict::Inconclusive,
        scenario_flags: Vec::new(),
    })
}

fn finish(mut r: StabilityReport) -> StabilityReport {
    r.strictly_stable = r.lemma_condition && r.abscissa_check;
    r.verdict = match (r.lemma_condition, r.abscissa_check) {
        (true, true) => Verdict::Stable,
        (false, false) => Verdict::NotStable,
        _ => Verdict::Inconclusive,
    };
    r
}

/// Depth-1 stacks: both symbols strictly hyperbolic and strictly interlacing.
pub fn stable_q1(stack: &OperatorStack, samples: &[Direction]) -> Result<StabilityReport> {
    if stack.depth() != 1 {
        return Err(Error::InvalidInput("stable_q1 needs a depth-1 stack".into()));
    }
    let mut r = base_report(stack, samples)?;
    r.lemma_condition = r.hyperbolicity.iter().all(|h| *h == Hyperbolicity::Strict)
        && r.interlacing_high.as_ref().is_some_and(|c| c.kind == InterlaceKind::Strict);
    Ok(finish(r))
}

/// Depth-2 stacks: the five conditions of the weak interlacing hypothesis.
pub fn verify_hypothesis_q2(stack: &OperatorStack, samples: &[Direction]) -> Result<StabilityReport> {
    if stack.depth() != 2 {
        return Err(Error::InvalidInput("verify_hypothesis_q2 needs a depth-2 stack".into()));
    }
    let mut r = base_report(stack, samples)?;
    let h = &r.hyperbolicity;
    let hyperbolic = h[0] != Hyperbolicity::None && h[2] != Hyperbolicity::None && h[1] == Hyperbolicity::Strict;
    let weakly_interlaced = |c: &Option<InterlacingClass>| c.as_ref().is_some_and(|c| c.kind != InterlaceKind::Fail);

    let mut triple = TripleRootCheck {
        none_found: true,
        margin: f64::INFINITY,
        witness: None,
    };
    let mut flags = Vec::new();
    for d in samples {
        let pm = stack.restrict(0, d)?;
        let pm1 = stack.restrict(1, d)?;
        let pm2 = stack.restrict(2, d)?;
        let (Some(a), Some(b), Some(dd)) = (real_or_none(&pm), real_or_none(&pm1), real_or_none(&pm2)) else {
            continue;
        };
        for &x in &b {
            let z = Complex64::new(x, 0.0);
            let rel = |p: &UnivariatePoly| {
                let s = p.eval_scale(z);
                if s == 0.0 { 0.0 } else { p.eval(z).norm() / s }
            };
            let v = rel(&pm).max(rel(&pm2));
            if v < triple.margin {
                triple.margin = v;
                if v <= TRIPLE_ROOT {
                    triple.none_found = false;
                    triple.witness = Some((d.components().to_vec(), x));
                }
            }
        }
        if has_multiple(&a) {
            flags.push(ScenarioFlag::DerivativeLoss);
        }
        if has_multiple(&dd) {
            flags.push(ScenarioFlag::DecayLoss);
        }
        if simple_root_shared(&a, &b) {
            flags.push(ScenarioFlag::RegLossDecay);
        }
        if simple_root_shared(&dd, &b) {
            flags.push(ScenarioFlag::SlowLow);
        }
    }
    flags.sort();
    flags.dedup();
    r.lemma_condition = hyperbolic
        && weakly_interlaced(&r.interlacing_high)
        && weakly_interlaced(&r.interlacing_low)
        && triple.none_found;
    r.triple_root = Some(triple);
    r.scenario_flags = flags;
    Ok(finish(r))
}

/// Depth-3 stacks (and a cross-check for any depth): Hermite–Biehler at sampled `ξ`.
pub fn stable_hermite_biehler(stack: &OperatorStack, samples: &[Direction]) -> Result<StabilityReport> {
    let mut r = base_report(stack, samples)?;
    let radii = crate::rootkit::log_grid(1e-3, 1e3, 32);
    let mut ok = true;
    for d in samples {
        for &rho in &radii {
            ok &= hermite_biehler_stable(stack, &d.scaled(rho))?;
        }
    }
    r.lemma_condition = ok;
    Ok(finish(r))
}

/// Dispatch on stack depth.
pub fn classify(stack: &OperatorStack, samples: &[Direction]) -> Result<StabilityReport> {
    match stack.depth() {
        1 => stable_q1(stack, samples),
        2 => verify_hypothesis_q2(stack, samples),
        _ => stable_hermite_biehler(stack, samples),
    }
}

/// Roots of every symbol along `d`, for diagnostics.
pub fn symbol_roots(stack: &OperatorStack, d: &Direction) -> Result<Vec<Vec<Complex64>>> {
    stack
        .symbols()
        .iter()
        .map(|s| {
            let p = s.restrict(d.components())?;
            if p.degree() == 0 { Ok(Vec::new()) } else { roots(&p) }
        })
        .collect()
}
