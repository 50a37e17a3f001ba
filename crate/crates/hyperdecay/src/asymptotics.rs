//! Closed-form expansions of the roots of `Q(λ, iξ)` as `|ξ| → 0` and
//! `|ξ| → ∞` along a fixed direction, and an empirical check of their
//! remainders against tracked branches.
//!
//! Writing `λ = iρz`, the equation becomes `Σ_j (iρ)^{m-j} P_{m-j}(z, ξ') = 0`
//! with real-form restrictions, so every coefficient below is a ratio of real
//! polynomial values at a real root.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::fit::fit_loglog;
use crate::rootkit::{log_grid_per_decade, real_roots, roots, RootBranchSet};
use crate::stability::{root_scale, COMMON_ROOT};
use crate::symbol_core::{check_poly, Direction, OperatorStack, UnivariatePoly};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Low,
    High,
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Regime::Low),
            "high" => Ok(Regime::High),
            _ => Err(Error::InvalidInput(format!("regime must be low or high, got `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExpansionCase {
    Simple,
    SharedSimple,
    Double,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    /// Power of `|ξ|`.
    pub power: i32,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionRecord {
    /// 1-based label; roots of the relevant symbol in increasing order, then
    /// the constant branches.
    pub branch: usize,
    pub regime: Regime,
    pub case: ExpansionCase,
    pub terms: Vec<Term>,
    pub predicted_remainder_order: f64,
    /// Relative distance from the expanded root to the nearest root of the
    /// neighbouring symbol; small values mean the case split was borderline.
    pub match_margin: Option<f64>,
}

impl ExpansionRecord {
    pub fn eval(&self, rho: f64) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * rho.powi(t.power)).sum()
    }

    /// The fitted remainder order beats the last included term by 0.4.
    pub fn remainder_consistent(&self, fitted: f64) -> bool {
        if fitted == f64::INFINITY {
            return true;
        }
        match self.regime {
            Regime::Low => {
                let top = self.terms.iter().map(|t| t.power).max().unwrap_or(0);
                fitted >= top as f64 + 0.4
            }
            Regime::High => {
                let bottom = self.terms.iter().map(|t| t.power).min().unwrap_or(0);
                fitted <= bottom as f64 - 0.4
            }
        }
    }
}

fn term(power: i32, coeff: Complex64) -> Term {
    Term { power, coeff }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Real roots of one restricted symbol, with the value of its check polynomials.
struct Level {
    poly: UnivariatePoly,
    roots: Vec<f64>,
}

impl Level {
    fn new(poly: UnivariatePoly) -> Result<Self> {
        let roots = if poly.degree() == 0 { Vec::new() } else { real_roots(&poly)? };
        Ok(Self { poly, roots })
    }

    fn at(&self, x: f64) -> f64 {
        self.poly.eval_real(x)
    }

    fn check(&self, deleted: &[usize], x: f64) -> Result<f64> {
        let z: Vec<Complex64> = self.roots.iter().map(|&r| re(r)).collect();
        Ok(check_poly(&self.poly, &z, deleted, re(x))?.re)
    }

    /// Index of the closest root and its distance.
    fn nearest(&self, x: f64) -> Option<(usize, f64)> {
        self.roots
            .iter()
            .enumerate()
            .map(|(k, &r)| (k, (r - x).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Runs of equal roots as `(start, multiplicity)`.
fn groups(r: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < r.len() {
        let mut j = i + 1;
        while j < r.len() && r[j] - r[i] <= tol {
            j += 1;
        }
        out.push((i, j - i));
        i = j;
    }
    out
}

/// Both roots of `a κ² + b κ + c = 0`, larger real part first.
fn quadratic(a: f64, b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = re(b * b - 4.0 * a * c).sqrt();
    let q = if b >= 0.0 { -(re(b) + disc) / 2.0 } else { -(re(b) - disc) / 2.0 };
    let (k1, k2) = if q.norm() == 0.0 { (re(0.0), re(0.0)) } else { (q / a, re(c) / q) };
    if (k1.re, k1.im) >= (k2.re, k2.im) { (k1, k2) } else { (k2, k1) }
}

/// The symbols involved at one end of the ray: `main` carries the leading
/// roots, `next` is the neighbour one step inward, then two more steps.
struct Ladder {
    main: Level,
    next: Level,
    second: UnivariatePoly,
    third: UnivariatePoly,
    depth: usize,
}

impl Ladder {
    fn new(stack: &OperatorStack, d: &Direction, regime: Regime) -> Result<Self> {
        let l = stack.depth();
        // Index into the stack of the k-th symbol away from the expansion point.
        let idx = |k: usize| -> Option<usize> {
            match regime {
                Regime::Low => l.checked_sub(k),
                Regime::High => Some(k),
            }
        };
        let get = |k: usize| match idx(k) {
            Some(j) => stack.restrict(j, d),
            None => Ok(UnivariatePoly::zero()),
        };
        Ok(Self {
            main: Level::new(get(0)?)?,
            next: Level::new(get(1)?)?,
            second: get(2)?,
            third: get(3)?,
            depth: l,
        })
    }

    fn tol(&self) -> f64 {
        COMMON_ROOT * root_scale(&self.main.roots).max(root_scale(&self.next.roots))
    }
}

fn unclassifiable(what: &str, x: f64, d: &Direction) -> Error {
    Error::Unclassifiable(format!("{what} at root {x} along {:?}", d.components()))
}

/// Root expansions as `ρ = |ξ| → 0` along `d`.
pub fn low_freq_expansions(stack: &OperatorStack, d: &Direction) -> Result<Vec<ExpansionRecord>> {
    let lad = Ladder::new(stack, d, Regime::Low)?;
    let tol = lad.tol();
    let mut out = Vec::new();
    for (j, mult) in groups(&lad.main.roots, tol) {
        let x = lad.main.roots[j];
        let (k, dist) = lad.next.nearest(x).ok_or_else(|| unclassifiable("no neighbour roots", x, d))?;
        let shared = dist <= tol;
        let margin = Some(dist / root_scale(&lad.next.roots));
        let ix = im(x);
        match (mult, shared) {
            (1, false) => {
                let c = lad.next.at(x) / lad.main.check(&[j], x)?;
                out.push(ExpansionRecord {
                    branch: j + 1,
                    regime: Regime::Low,
                    case: ExpansionCase::Simple,
                    terms: vec![term(1, ix), term(2, re(c))],
                    predicted_remainder_order: 3.0,
                    match_margin: margin,
                });
            }
            (1, true) => {
                if lad.depth < 2 {
                    return Err(unclassifiable("shared root with depth 1", x, d));
                }
                let chk = lad.main.check(&[j], x)?;
                let tilde = lad.next.check(&[k], x)?;
                let p2 = lad.second.eval_real(x);
                let p3 = lad.third.eval_real(x);
                if p2.abs() <= COMMON_ROOT * lad.second.eval_scale(re(x)) {
                    return Err(unclassifiable("common root of three symbols", x, d));
                }
                let c4 = -(p3 / chk - p2 * tilde / (chk * chk));
                out.push(ExpansionRecord {
                    branch: j + 1,
                    regime: Regime::Low,
                    case: ExpansionCase::SharedSimple,
                    terms: vec![term(1, ix), term(3, im(p2 / chk)), term(4, re(c4))],
                    predicted_remainder_order: 5.0,
                    match_margin: margin,
                });
            }
            (2, true) => {
                let (kp, km) = kappa_at(&lad, j, k, x, Regime::Low, d)?;
                for (off, kappa) in [(0, kp), (1, km)] {
                    out.push(ExpansionRecord {
                        branch: j + 1 + off,
                        regime: Regime::Low,
                        case: ExpansionCase::Double,
                        terms: vec![term(1, ix), term(2, kappa)],
                        predicted_remainder_order: 3.0,
                        match_margin: margin,
                    });
                }
            }
            _ => return Err(unclassifiable(&format!("root of multiplicity {mult}"), x, d)),
        }
    }
    let base = out.len();
    let c = stack.time_coeffs();
    let constant = UnivariatePoly::from_real(&c.iter().rev().copied().collect::<Vec<_>>());
    let mut lam0 = roots(&constant)?;
    lam0.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for (i, z) in lam0.into_iter().enumerate() {
        out.push(ExpansionRecord {
            branch: base + i + 1,
            regime: Regime::Low,
            case: ExpansionCase::Constant,
            terms: vec![term(0, z)],
            predicted_remainder_order: 1.0,
            match_margin: None,
        });
    }
    Ok(out)
}

/// Root expansions as `ρ = |ξ| → ∞` along `d`.
pub fn high_freq_expansions(stack: &OperatorStack, d: &Direction) -> Result<Vec<ExpansionRecord>> {
    let lad = Ladder::new(stack, d, Regime::High)?;
    let tol = lad.tol();
    let mut out = Vec::new();
    for (j, mult) in groups(&lad.main.roots, tol) {
        let x = lad.main.roots[j];
        let (k, dist) = lad.next.nearest(x).ok_or_else(|| unclassifiable("no neighbour roots", x, d))?;
        let shared = dist <= tol;
        let margin = Some(dist / root_scale(&lad.next.roots));
        let ix = im(x);
        match (mult, shared) {
            (1, false) => {
                let c = -lad.next.at(x) / lad.main.check(&[j], x)?;
                out.push(ExpansionRecord {
                    branch: j + 1,
                    regime: Regime::High,
                    case: ExpansionCase::Simple,
                    terms: vec![term(1, ix), term(0, re(c))],
                    predicted_remainder_order: -1.0,
                    match_margin: margin,
                });
            }
            (1, true) => {
                if lad.depth < 2 {
                    return Err(unclassifiable("shared root with depth 1", x, d));
                }
                let chk = lad.main.check(&[j], x)?;
                let tilde = lad.next.check(&[k], x)?;
                let p2 = lad.second.eval_real(x);
                let p3 = lad.third.eval_real(x);
                if p2.abs() <= COMMON_ROOT * lad.second.eval_scale(re(x)) {
                    return Err(unclassifiable("common root of three symbols", x, d));
                }
                let c2 = -(p2 * tilde / (chk * chk) - p3 / chk);
                out.push(ExpansionRecord {
                    branch: j + 1,
                    regime: Regime::High,
                    case: ExpansionCase::SharedSimple,
                    terms: vec![term(1, ix), term(-1, im(p2 / chk)), term(-2, re(c2))],
                    predicted_remainder_order: -3.0,
                    match_margin: margin,
                });
            }
            (2, true) => {
                let (kp, km) = kappa_at(&lad, j, k, x, Regime::High, d)?;
                for (off, kappa) in [(0, kp), (1, km)] {
                    out.push(ExpansionRecord {
                        branch: j + 1 + off,
                        regime: Regime::High,
                        case: ExpansionCase::Double,
                        terms: vec![term(1, ix), term(0, kappa)],
                        predicted_remainder_order: -1.0,
                        match_margin: margin,
                    });
                }
            }
            _ => return Err(unclassifiable(&format!("root of multiplicity {mult}"), x, d)),
        }
    }
    Ok(out)
}

fn kappa_at(
    lad: &Ladder,
    j: usize,
    k: usize,
    x: f64,
    regime: Regime,
    d: &Direction,
) -> Result<(Complex64, Complex64)> {
    if lad.depth < 2 {
        return Err(unclassifiable("double root with depth 1", x, d));
    }
    let a = lad.main.check(&[j, j + 1], x)?;
    let b = lad.next.check(&[k], x)?;
    let c = lad.second.eval_real(x);
    // Low: κ² P̌₂ − κ P̃ + P = 0. High: κ² P̌₂ + κ P̃ + P = 0.
    let b = match regime {
        Regime::Low => -b,
        Regime::High => b,
    };
    let (kp, km) = quadratic(a, b, c);
    if kp.re >= 0.0 || km.re >= 0.0 {
        return Err(unclassifiable(&format!("κ = {kp}, {km} not in the left half-plane"), x, d));
    }
    Ok((kp, km))
}

/// `κ±` for the double root starting at 1-based label `j` of `P_{m-ℓ}` (low)
/// or `P_m` (high), larger real part first.
pub fn kappa_solutions(
    stack: &OperatorStack,
    d: &Direction,
    j: usize,
    regime: Regime,
) -> Result<(Complex64, Complex64)> {
    let lad = Ladder::new(stack, d, regime)?;
    let tol = lad.tol();
    let r = &lad.main.roots;
    if j == 0 || j >= r.len() || r[j] - r[j - 1] > tol {
        return Err(Error::Unclassifiable(format!("roots {j} and {} are not a double root", j + 1)));
    }
    let x = r[j - 1];
    let (k, dist) = lad
        .next
        .nearest(x)
        .ok_or_else(|| unclassifiable("no neighbour roots", x, d))?;
    if dist > tol {
        return Err(unclassifiable("double root not shared with the neighbouring symbol", x, d));
    }
    kappa_at(&lad, j - 1, k, x, regime, d)
}

/// Radii for expansion checks: 40 per decade over `[1e-4, 1e-1]` or `[1e1, 1e4]`.
pub fn default_grid(regime: Regime) -> Vec<f64> {
    match regime {
        Regime::Low => log_grid_per_decade(1e-4, 1e-1, 40),
        Regime::High => log_grid_per_decade(1e1, 1e4, 40),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionFit {
    /// Index into `RootBranchSet::branches` matched to the record.
    pub branch_index: usize,
    /// Slope of `log |remainder|` against `log ρ`; `+∞` when the remainder is
    /// below `1e-12` everywhere.
    pub fitted_order: f64,
    /// `|remainder| / |λ|` at the regime boundary.
    pub max_rel_err: f64,
    pub points: usize,
    pub consistent: bool,
}

const REMAINDER_FLOOR: f64 = 1e-12;

/// Fit the remainder `λ_j(ρ) − Σ terms` over the part of `bs` inside the regime.
pub fn verify_expansion(bs: &RootBranchSet, record: &ExpansionRecord) -> Result<ExpansionFit> {
    let inside: Vec<usize> = (0..bs.rho.len())
        .filter(|&i| match record.regime {
            Regime::Low => bs.rho[i] <= 0.1 * (1.0 + 1e-9),
            Regime::High => bs.rho[i] >= 10.0 * (1.0 - 1e-9),
        })
        .collect();
    let (Some(&first), Some(&last)) = (inside.first(), inside.last()) else {
        return Err(Error::InvalidInput("no radii inside the regime".into()));
    };
    if bs.rho[last] / bs.rho[first] < 100.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidInput("need two decades of radii inside the regime".into()));
    }
    let (anchor, boundary) = match record.regime {
        Regime::Low => (first, last),
        Regime::High => (last, first),
    };
    let expected = record.eval(bs.rho[anchor]);
    let branch_index = (0..bs.branches.len())
        .min_by(|&a, &b| {
            let da = (bs.branches[a][anchor] - expected).norm();
            let db = (bs.branches[b][anchor] - expected).norm();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::InvalidInput("empty branch set".into()))?;
    let branch = &bs.branches[branch_index];
    let remainder = |i: usize| (branch[i] - record.eval(bs.rho[i])).norm();

    let (x, y): (Vec<f64>, Vec<f64>) = inside
        .iter()
        .filter(|&&i| remainder(i) > REMAINDER_FLOOR * branch[i].norm().max(1.0))
        .map(|&i| (bs.rho[i], remainder(i)))
        .unzip();
    let fitted_order = if x.len() < 3 {
        f64::INFINITY
    } else {
        fit_loglog(&x, &y).map_or(f64::INFINITY, |f| f.slope)
    };
    let lam = branch[boundary].norm();
    let max_rel_err = if lam > 0.0 { remainder(boundary) / lam } else { remainder(boundary) };
    Ok(ExpansionFit {
        branch_index,
        fitted_order,
        max_rel_err,
        points: x.len(),
        consistent: record.remainder_consistent(fitted_order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::build;
    use crate::rootkit::track_branches;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn coeff(r: &ExpansionRecord, power: i32) -> Complex64 {
        r.terms.iter().find(|t| t.power == power).map_or(re(0.0), |t| t.coeff)
    }

    #[test]
    fn mgt_low_frequency_records() {
        let st = build("mgt", &[]).unwrap();
        let rec = low_freq_expansions(&st, &Direction::axis(3, 0)).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec[2].case, ExpansionCase::Constant);
        assert!(close(coeff(&rec[2], 0), re(-1.0), 1e-12));
        for (r, s) in rec[..2].iter().zip([-1.0, 1.0]) {
            assert_eq!(r.case, ExpansionCase::Simple);
            assert!(close(coeff(r, 1), im(s), 1e-12));
            assert!(close(coeff(r, 2), re(-0.5), 1e-12));
        }
    }

    #[test]
    fn mgt_high_frequency_records() {
        let st = build("mgt", &[]).unwrap();
        let rec = high_freq_expansions(&st, &Direction::axis(3, 0)).unwrap();
        let want = [(-2f64.sqrt(), -0.25), (0.0, -0.5), (2f64.sqrt(), -0.25)];
        for (r, (slope, limit)) in rec.iter().zip(want) {
            assert!(close(coeff(r, 1), im(slope), 1e-12));
            assert!(close(coeff(r, 0), re(limit), 1e-12));
        }
        // Trace: Σ Re λ_j → −c_{m-1,0} = −1.
        let sum: f64 = rec.iter().map(|r| coeff(r, 0).re).sum();
        assert!((sum + 1.0).abs() < 1e-12);
    }

    #[test]
    fn em_elastic_low_frequency_records() {
        let st = build("em_elastic", &[]).unwrap();
        let rec = low_freq_expansions(&st, &Direction::axis(3, 2)).unwrap();
        let simple: Vec<_> = rec.iter().filter(|r| r.case == ExpansionCase::Simple).collect();
        assert_eq!(simple.len(), 3);
        // d = −1, 0, 1: outer branches −γ²/(2σ), middle −c²/σ.
        assert!(close(coeff(simple[0], 2), re(-0.5), 1e-12));
        assert!(close(coeff(simple[1], 2), re(-1.0), 1e-12));
        assert!(close(coeff(simple[2], 2), re(-0.5), 1e-12));
        let consts: Vec<_> = rec.iter().filter(|r| r.case == ExpansionCase::Constant).collect();
        assert_eq!(consts.len(), 2);
        for r in consts {
            assert!(close(coeff(r, 0), re(-1.0), 1e-7));
        }
    }

    #[test]
    fn fourth_order_weak_shared_low_records() {
        let st = build("fourth_order_weak", &[]).unwrap();
        let rec = low_freq_expansions(&st, &Direction::axis(1, 0)).unwrap();
        let top = rec.iter().find(|r| r.branch == 2).unwrap();
        assert_eq!(top.case, ExpansionCase::SharedSimple);
        assert!(close(coeff(top, 1), im(1.0), 1e-12));
        assert!(close(coeff(top, 3), im(-1.5), 1e-12));
        assert!(close(coeff(top, 4), re(-1.5), 1e-12));
        let bottom = rec.iter().find(|r| r.branch == 1).unwrap();
        assert!(close(coeff(bottom, 3), im(1.5), 1e-12));
        assert!(close(coeff(bottom, 4), re(-1.5), 1e-12));
    }

    #[test]
    fn fourth_order_weak_double_high_kappa() {
        let st = build("fourth_order_weak", &[]).unwrap();
        let d = Direction::axis(1, 0);
        let (kp, km) = kappa_solutions(&st, &d, 2, Regime::High).unwrap();
        let s = 15f64.sqrt() / 8.0;
        let want = [Complex64::new(-0.125, s), Complex64::new(-0.125, -s)];
        assert!(close(kp, want[0], 1e-12) && close(km, want[1], 1e-12));
        let rec = high_freq_expansions(&st, &d).unwrap();
        assert_eq!(rec.iter().filter(|r| r.case == ExpansionCase::Double).count(), 2);
        for r in rec.iter().filter(|r| r.case == ExpansionCase::Simple) {
            assert!(close(coeff(r, 0), re(-3.0 / 8.0), 1e-12));
        }
    }

    #[test]
    fn mgt_classical_damping_shared_high_records() {
        let st = build("mgt_classical_damping", &[]).unwrap();
        let rec = high_freq_expansions(&st, &Direction::axis(3, 0)).unwrap();
        let shared: Vec<_> = rec.iter().filter(|r| r.case == ExpansionCase::SharedSimple).collect();
        assert_eq!(shared.len(), 2);
        for (r, s) in shared.iter().zip([-1.0, 1.0]) {
            assert!(close(coeff(r, 1), im(s), 1e-12));
            assert!(close(coeff(r, -1), im(0.5 * s), 1e-12));
            assert!(close(coeff(r, -2), re(-0.5), 1e-12));
        }
    }

    #[test]
    fn anisotropic_low_kappa() {
        let st = build("anisotropic_elastic_2d", &[]).unwrap();
        let (kp, km) = kappa_solutions(&st, &Direction::axis(2, 0), 1, Regime::Low).unwrap();
        assert!(close(kp, re(-1.0), 1e-7) && close(km, re(-1.0), 1e-7));
        let d = Direction::normalized(&[1.0, 1.0]).unwrap();
        let (kp, km) = kappa_solutions(&st, &d, 1, Regime::Low).unwrap();
        let r = (4.5f64 * 4.5 - 16.0).sqrt();
        assert!(close(kp, re((-4.5 + r) / 4.0), 1e-10));
        assert!(close(km, re((-4.5 - r) / 4.0), 1e-10));
    }

    #[test]
    fn kappa_rejects_simple_roots() {
        let st = build("mgt", &[]).unwrap();
        assert!(kappa_solutions(&st, &Direction::axis(3, 0), 1, Regime::High).is_err());
    }

    #[test]
    fn quadratic_roots_ordered() {
        let (a, b) = quadratic(1.0, 3.0, 2.0);
        assert!(close(a, re(-1.0), 1e-15) && close(b, re(-2.0), 1e-15));
    }

    #[test]
    fn mgt_low_branch_remainder_order() {
        let st = build("mgt", &[]).unwrap();
        let d = Direction::axis(3, 0);
        let bs = track_branches(&st, &d, &log_grid_per_decade(1e-3, 1e-1, 40)).unwrap();
        for rec in low_freq_expansions(&st, &d).unwrap() {
            let fit = verify_expansion(&bs, &rec).unwrap();
            assert!(fit.consistent, "{rec:?} {fit:?}");
            if rec.case == ExpansionCase::Simple {
                assert!(fit.fitted_order >= 2.5);
            }
        }
    }

    #[test]
    fn damped_wave_remainder_is_fourth_order() {
        let st = build("damped_wave", &[]).unwrap();
        let d = Direction::axis(1, 0);
        let bs = track_branches(&st, &d, &default_grid(Regime::Low)).unwrap();
        let rec = low_freq_expansions(&st, &d).unwrap();
        let slow = rec.iter().find(|r| r.case == ExpansionCase::Simple).unwrap();
        assert!(close(coeff(slow, 2), re(-1.0), 1e-14));
        let fit = verify_expansion(&bs, slow).unwrap();
        assert!((fit.fitted_order - 4.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn exact_expansion_flags_infinite_order() {
        let rho = default_grid(Regime::Low);
        let rec = ExpansionRecord {
            branch: 1,
            regime: Regime::Low,
            case: ExpansionCase::Constant,
            terms: vec![term(0, re(-1.0))],
            predicted_remainder_order: 1.0,
            match_margin: None,
        };
        let bs = RootBranchSet {
            direction: Direction::axis(1, 0),
            on_grid: vec![true; rho.len()],
            branches: vec![vec![re(-1.0); rho.len()], rho.iter().map(|r| re(-r * r)).collect()],
            rho,
            cluster_events: Vec::new(),
        };
        let fit = verify_expansion(&bs, &rec).unwrap();
        assert_eq!(fit.branch_index, 0);
        assert_eq!(fit.fitted_order, f64::INFINITY);
        assert!(fit.consistent);
    }

    #[test]
    fn regime_needs_two_decades() {
        let st = build("mgt", &[]).unwrap();
        let d = Direction::axis(3, 0);
        let bs = track_branches(&st, &d, &log_grid_per_decade(1e-2, 1e-1, 10)).unwrap();
        let rec = low_freq_expansions(&st, &d).unwrap();
        assert!(verify_expansion(&bs, &rec[0]).is_err());
    }
}
