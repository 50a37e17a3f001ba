//! Polynomial roots (companion eigenvalues polished by Aberth–Ehrlich),
//! root branches along radial rays, and near-multiple cluster detection.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::symbol_core::{Direction, OperatorStack, UnivariatePoly};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const MAX_BISECTIONS: usize = 20;
/// Real roots closer than this (relative) are one multiple root.
pub const REAL_CLUSTER: f64 = 1e-7;

/// `|Im z| ≤ 1e-8 (1 + |z|)`.
pub fn is_real_root(z: Complex64) -> bool {
    z.im.abs() <= 1e-8 * (1.0 + z.norm())
}

/// All roots with multiplicity, sorted by real part then imaginary part.
pub fn roots(p: &UnivariatePoly) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::DegeneratePoly("zero polynomial".into()));
    }
    if p.degree() == 0 {
        return Err(Error::DegeneratePoly("constant polynomial".into()));
    }
    let c = p.coeffs();
    // Exact zero roots are split off so they come back exactly.
    let zeros = c.iter().take_while(|z| z.norm() == 0.0).count();
    let reduced = UnivariatePoly::new(c[zeros..].to_vec());
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    out.extend(nonzero_roots(&reduced));
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

fn nonzero_roots(p: &UnivariatePoly) -> Vec<Complex64> {
    let d = p.degree();
    if d == 0 {
        return Vec::new();
    }
    let c = p.coeffs();
    if d == 1 {
        return vec![-c[0] / c[1]];
    }
    let mut z = companion_eigenvalues(p).unwrap_or_else(|| circle_start(p));
    aberth(p, &mut z);
    z
}

fn companion_eigenvalues(p: &UnivariatePoly) -> Option<Vec<Complex64>> {
    let d = p.degree();
    let c = p.coeffs();
    let lead = c[d];
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    let schur = m.try_schur(1e-15, 10_000)?;
    let ev = schur.eigenvalues()?;
    let v: Vec<Complex64> = ev.iter().copied().collect();
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(v)
}

/// Initial guesses on a circle of the Cauchy-bound radius.
fn circle_start(p: &UnivariatePoly) -> Vec<Complex64> {
    let d = p.degree();
    let c = p.coeffs();
    let lead = c[d].norm();
    let r = 1.0 + c[..d].iter().map(|x| x.norm() / lead).fold(0.0, f64::max);
    (0..d)
        .map(|k| Complex64::from_polar(r, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect()
}

fn aberth(p: &UnivariatePoly, z: &mut [Complex64]) {
    let dp = p.derivative();
    let n = z.len();
    // Break exact ties, the Aberth correction is singular there.
    for i in 0..n {
        for j in 0..i {
            if z[i] == z[j] {
                z[i] += Complex64::new(0.0, 1e-10 * (1.0 + z[i].norm()));
            }
        }
    }
    let mut done = vec![false; n];
    for _ in 0..MAX_SWEEPS {
        let mut moved = false;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let pz = p.eval(z[k]);
            if pz.norm() <= 4.0 * f64::EPSILON * p.eval_scale(z[k]) {
                done[k] = true;
                continue;
            }
            let dpz = dp.eval(z[k]);
            if dpz.norm() == 0.0 {
                continue;
            }
            let w = pz / dpz;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k && z[j] != z[k])
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let corr = if denom.norm() == 0.0 { w } else { w / denom };
            if !(corr.re.is_finite() && corr.im.is_finite()) {
                continue;
            }
            z[k] -= corr;
            if corr.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Largest backward residual `|p(z)| / Σ|c_i||z|^i` over the given points.
pub fn max_relative_residual(p: &UnivariatePoly, z: &[Complex64]) -> f64 {
    z.iter()
        .map(|&r| {
            let s = p.eval_scale(r);
            if s == 0.0 {
                0.0
            } else {
                p.eval(r).norm() / s
            }
        })
        .fold(0.0, f64::max)
}

/// Sorted real roots of a real polynomial. Conjugate pairs whose imaginary
/// part is within numerical resolution of a real multiple root are merged.
pub fn real_roots(p: &UnivariatePoly) -> Result<Vec<f64>> {
    let z = roots(p)?;
    let mut used = vec![false; z.len()];
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        if used[i] {
            continue;
        }
        if is_real_root(z[i]) {
            used[i] = true;
            out.push(z[i].re);
            continue;
        }
        let x = z[i].re;
        let near_axis = z[i].im.abs() <= 1e-5 * (1.0 + z[i].norm());
        let resid_ok = p.eval_real(x).abs() <= 1e-10 * p.eval_scale(Complex64::new(x, 0.0));
        let partner = (0..z.len()).find(|&j| {
            j != i && !used[j] && (z[j] - z[i].conj()).norm() <= 1e-5 * (1.0 + z[i].norm())
        });
        match partner {
            Some(j) if near_axis && resid_ok => {
                used[i] = true;
                used[j] = true;
                out.push(x);
                out.push(x);
            }
            _ => return Err(Error::NonReal),
        }
    }
    out.sort_by(f64::total_cmp);
    // Multiple real roots come back split by about sqrt(eps); replace each
    // unresolved cluster by its mean.
    let scale = 1.0 + out.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut i = 0;
    while i < out.len() {
        let mut j = i + 1;
        while j < out.len() && out[j] - out[j - 1] <= REAL_CLUSTER * scale {
            j += 1;
        }
        if j - i > 1 {
            let mean = out[i..j].iter().sum::<f64>() / (j - i) as f64;
            let x = polish_multiple(p, mean, j - i, out[j - 1] - out[i]);
            out[i..j].iter_mut().for_each(|y| *y = x);
        }
        i = j;
    }
    Ok(out)
}

/// A root of multiplicity `k` is a simple root of the `(k-1)`-th derivative;
/// Newton on that derivative recovers it to full precision.
fn polish_multiple(p: &UnivariatePoly, start: f64, k: usize, spread: f64) -> f64 {
    let mut q = p.clone();
    for _ in 1..k {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut x = start;
    for _ in 0..20 {
        let d = dq.eval_real(x);
        if d == 0.0 {
            break;
        }
        let step = q.eval_real(x) / d;
        x -= step;
        if step.abs() <= f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    if (x - start).abs() <= spread + 1e-7 * (1.0 + start.abs()) {
        x
    } else {
        start
    }
}

/// Smallest pairwise distance; infinite for fewer than two roots.
pub fn min_gap(z: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..z.len() {
        for j in 0..i {
            g = g.min((z[i] - z[j]).norm());
        }
    }
    g
}

pub fn spectral_abscissa(stack: &OperatorStack, xi: &[f64]) -> Result<f64> {
    let r = roots(&stack.full_symbol_at(xi)?)?;
    Ok(r.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct RootCluster {
    pub indices: Vec<usize>,
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterEvent {
    pub rho: f64,
    pub indices: Vec<usize>,
    pub gap: f64,
}

/// Which end of the ray fixes the ordering of branch labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Anchor {
    Low,
    High,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootBranchSet {
    pub direction: Direction,
    /// Radii, including any points inserted by bisection.
    pub rho: Vec<f64>,
    /// `true` where the radius came from the caller's grid.
    pub on_grid: Vec<bool>,
    /// `branches[j][i]` is branch `j` at `rho[i]`.
    pub branches: Vec<Vec<Complex64>>,
    pub cluster_events: Vec<ClusterEvent>,
}

impl RootBranchSet {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Branch indices ordered by value (real part, then imaginary part) at the
    /// chosen end of the ray. Entry `label` is the branch carrying that label.
    pub fn labels(&self, anchor: Anchor) -> Vec<usize> {
        let i = match anchor {
            Anchor::Low => 0,
            Anchor::High => self.rho.len() - 1,
        };
        let mut idx: Vec<usize> = (0..self.branches.len()).collect();
        idx.sort_by(|&a, &b| {
            let (x, y) = (self.branches[a][i], self.branches[b][i]);
            x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
        });
        idx
    }

    /// `perm[low_label] = high_label` for the same continuous branch.
    pub fn label_permutation(&self) -> Vec<usize> {
        let low = self.labels(Anchor::Low);
        let high = self.labels(Anchor::High);
        let mut pos_high = vec![0; high.len()];
        for (label, &b) in high.iter().enumerate() {
            pos_high[b] = label;
        }
        low.iter().map(|&b| pos_high[b]).collect()
    }

    /// Clusters among the roots at grid index `i`, grouping roots closer than `tol`.
    pub fn clusters_at(&self, i: usize, tol: f64) -> Vec<RootCluster> {
        let vals: Vec<Complex64> = self.branches.iter().map(|b| b[i]).collect();
        let mut group: Vec<usize> = (0..vals.len()).collect();
        for a in 0..vals.len() {
            for b in 0..a {
                if (vals[a] - vals[b]).norm() < tol {
                    let (ga, gb) = (group[a], group[b]);
                    for g in group.iter_mut() {
                        if *g == ga {
                            *g = gb;
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        let mut seen = Vec::new();
        for &g in &group {
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            let indices: Vec<usize> = (0..vals.len()).filter(|&k| group[k] == g).collect();
            if indices.len() < 2 {
                continue;
            }
            let center = indices.iter().map(|&k| vals[k]).sum::<Complex64>() / indices.len() as f64;
            let radius = indices.iter().map(|&k| (vals[k] - center).norm()).fold(0.0, f64::max);
            out.push(RootCluster {
                indices,
                center,
                radius,
            });
        }
        out
    }
}

/// Permutation `perm` minimizing `Σ_j |next[perm[j]] − prev[j]|`.
pub fn min_distance_assignment(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let n = prev.len();
    let cost: Vec<Vec<f64>> = prev
        .iter()
        .map(|p| next.iter().map(|q| (q - p).norm()).collect())
        .collect();
    let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn search(
        cost: &[Vec<f64>],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        acc: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if acc >= best.0 {
            return;
        }
        let j = cur.len();
        if j == cost.len() {
            *best = (acc, cur.clone());
            return;
        }
        for k in 0..cost.len() {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                search(cost, cur, used, acc + cost[j][k], best);
                cur.pop();
                used[k] = false;
            }
        }
    }
    search(&cost, &mut cur, &mut used, 0.0, &mut best);
    best.1
}

fn cluster_threshold(z: &[Complex64]) -> f64 {
    1e-6 * (1.0 + z.iter().map(|x| x.norm()).fold(0.0, f64::max))
}

fn closest_pair(z: &[Complex64]) -> Vec<usize> {
    let mut best = (f64::INFINITY, vec![]);
    for i in 0..z.len() {
        for j in 0..i {
            let g = (z[i] - z[j]).norm();
            if g < best.0 {
                best = (g, vec![j, i]);
            }
        }
    }
    best.1
}

struct Tracker<'a> {
    stack: &'a OperatorStack,
    d: &'a Direction,
    rho: Vec<f64>,
    on_grid: Vec<bool>,
    values: Vec<Vec<Complex64>>,
    events: Vec<ClusterEvent>,
}

impl Tracker<'_> {
    fn roots_at(&self, rho: f64) -> Result<Vec<Complex64>> {
        roots(&self.stack.full_symbol_at(&self.d.scaled(rho))?)
    }

    fn log_cluster(&mut self, rho: f64, z: &[Complex64]) {
        let gap = min_gap(z);
        if gap < cluster_threshold(z) {
            self.events.push(ClusterEvent {
                rho,
                indices: closest_pair(z),
                gap,
            });
        }
    }

    fn push(&mut self, rho: f64, ordered: Vec<Complex64>, grid: bool) {
        self.rho.push(rho);
        self.on_grid.push(grid);
        self.values.push(ordered);
    }

    /// Advance from the last accepted point to `b`, bisecting as needed.
    fn advance(&mut self, b: f64, zb: Vec<Complex64>, depth: usize, grid: bool) -> Result<()> {
        let a = *self.rho.last().unwrap();
        let za = self.values.last().unwrap().clone();
        let perm = min_distance_assignment(&za, &zb);
        let ordered: Vec<Complex64> = perm.iter().map(|&k| zb[k]).collect();
        let movement = za
            .iter()
            .zip(&ordered)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let gap = min_gap(&za);
        if movement <= 0.25 * gap || gap < cluster_threshold(&za) {
            self.log_cluster(b, &ordered);
            self.push(b, ordered, grid);
            return Ok(());
        }
        if depth >= MAX_BISECTIONS {
            // A genuine collision inside the interval is accepted once located.
            // Near a square-root branch point the gap scales like the square
            // root of the distance to it, so a small interval adjacent to one
            // has a gap of order sqrt(width).
            let (rho_c, zc) = self.locate_collision(a, b)?;
            let scale = 1.0 + zc.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let branch_point_gap = 10.0 * ((b - a) / b).sqrt() * scale;
            if min_gap(&zc) < cluster_threshold(&zc).max(branch_point_gap) {
                self.events.push(ClusterEvent {
                    rho: rho_c,
                    indices: closest_pair(&zc),
                    gap: min_gap(&zc),
                });
                self.log_cluster(b, &ordered);
                self.push(b, ordered, grid);
                return Ok(());
            }
            return Err(Error::BisectionLimit { lo: a, hi: b });
        }
        let mid = 0.5 * (a + b);
        let zm = self.roots_at(mid)?;
        self.advance(mid, zm, depth + 1, false)?;
        self.advance(b, zb, depth + 1, grid)
    }

    /// Golden-section search for the radius of smallest root gap in `[a, b]`.
    fn locate_collision(&self, a: f64, b: f64) -> Result<(f64, Vec<Complex64>)> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (a, b);
        let f = |r: f64| -> Result<f64> { Ok(min_gap(&self.roots_at(r)?)) };
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2)?;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        Ok((r, self.roots_at(r)?))
    }
}

/// Continue the roots of `Q(λ, iρd)` along an ascending radial grid.
pub fn track_branches(stack: &OperatorStack, d: &Direction, rho_grid: &[f64]) -> Result<RootBranchSet> {
    if d.dim() != stack.dim() {
        return Err(Error::DimensionMismatch {
            expected: stack.dim(),
            got: d.dim(),
        });
    }
    if rho_grid.is_empty() || rho_grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput("radial grid must be positive and finite".into()));
    }
    if rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radial grid must be strictly ascending".into()));
    }
    let mut t = Tracker {
        stack,
        d,
        rho: Vec::new(),
        on_grid: Vec::new(),
        values: Vec::new(),
        events: Vec::new(),
    };
    let z0 = t.roots_at(rho_grid[0])?;
    t.log_cluster(rho_grid[0], &z0);
    t.push(rho_grid[0], z0, true);
    for &r in &rho_grid[1..] {
        let z = t.roots_at(r)?;
        t.advance(r, z, 0, true)?;
    }
    let m = t.values[0].len();
    let branches = (0..m).map(|j| t.values.iter().map(|v| v[j]).collect()).collect();
    Ok(RootBranchSet {
        direction: d.clone(),
        rho: t.rho,
        on_grid: t.on_grid,
        branches,
        cluster_events: t.events,
    })
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Log grid with `per_decade` points per decade, endpoints included.
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = (decades * per_decade as f64).round() as usize + 1;
    log_grid(lo, hi, count.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol_core::HomogeneousSymbol;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sorted_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let perm = min_distance_assignment(a, b);
        a.iter().zip(perm).all(|(x, k)| (x - b[k]).norm() <= tol)
    }

    pub(crate) fn damped_wave() -> OperatorStack {
        let mut p2 = HomogeneousSymbol::new(2, 1);
        p2.add_term(2, &[0], 1.0).unwrap();
        p2.add_term(0, &[2], -1.0).unwrap();
        let p1 = HomogeneousSymbol::new(1, 1).with_term(1, &[0], 1.0).unwrap();
        OperatorStack::new("damped_wave", vec![p2, p1]).unwrap()
    }

    fn mgt() -> OperatorStack {
        let mut p3 = HomogeneousSymbol::new(3, 1);
        p3.add_term(3, &[0], 1.0).unwrap();
        p3.add_term(1, &[2], -2.0).unwrap();
        let mut p2 = HomogeneousSymbol::new(2, 1);
        p2.add_term(2, &[0], 1.0).unwrap();
        p2.add_term(0, &[2], -1.0).unwrap();
        OperatorStack::new("mgt", vec![p3, p2]).unwrap()
    }

    #[test]
    fn quadratic_example() {
        let r = roots(&UnivariatePoly::from_real(&[0.09, 1.0, 1.0])).unwrap();
        assert!((r[0] - c(-0.9)).norm() < 1e-14);
        assert!((r[1] - c(-0.1)).norm() < 1e-14);
    }

    #[test]
    fn cubic_examples() {
        let r = roots(&UnivariatePoly::from_real(&[0.0, -2.0, 0.0, 1.0])).unwrap();
        let s = 2f64.sqrt();
        assert!(sorted_close(&r, &[c(-s), c(0.0), c(s)], 1e-14));
        let r = roots(&UnivariatePoly::from_real(&[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(r, vec![c(-1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(roots(&UnivariatePoly::zero()).is_err());
        assert!(roots(&UnivariatePoly::from_real(&[3.0])).is_err());
    }

    #[test]
    fn clustered_roots_meet_residual_bound() {
        // (λ − 1)^4 (λ + 2) and a near-double pair.
        for p in [
            UnivariatePoly::from_real(&[2.0, -7.0, 9.0, -5.0, 0.0, 1.0]),
            UnivariatePoly::from_real(&[1.0 - 1e-14, -2.0, 1.0]),
        ] {
            let r = roots(&p).unwrap();
            assert_eq!(r.len(), p.degree());
            assert!(max_relative_residual(&p, &r) <= 1e-10);
        }
    }

    #[test]
    fn real_roots_merge_double_roots() {
        let p = UnivariatePoly::from_real(&[9.0, -6.0, 1.0]);
        let r = real_roots(&p).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-14 && (r[1] - 3.0).abs() < 1e-14);
        let r = real_roots(&UnivariatePoly::from_real(&[1.0, 0.0, -2.0, 0.0, 1.0])).unwrap();
        assert!(r.iter().zip([-1.0, -1.0, 1.0, 1.0]).all(|(x, y)| (x - y).abs() < 1e-14));
        assert!(real_roots(&UnivariatePoly::from_real(&[1.0, 0.0, 1.0])).is_err());
    }

    fn cardano_real(a: f64, b: f64, cc: f64) -> Vec<Complex64> {
        // Roots of x³ + a x² + b x + c through the depressed cubic.
        let p = b - a * a / 3.0;
        let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + cc;
        let disc = Complex64::new(q * q / 4.0 + p.powi(3) / 27.0, 0.0).sqrt();
        let mut u = (Complex64::new(-q / 2.0, 0.0) + disc).powf(1.0 / 3.0);
        if u.norm() < 1e-12 {
            u = (Complex64::new(-q / 2.0, 0.0) - disc).powf(1.0 / 3.0);
        }
        let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        (0..3)
            .map(|k| {
                let uk = u * w.powu(k);
                let vk = if uk.norm() == 0.0 { c(0.0) } else { -p / (3.0 * uk) };
                uk + vk - a / 3.0
            })
            .collect()
    }

    #[test]
    fn closed_form_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (b, cc) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let disc = Complex64::new(b * b - 4.0 * cc, 0.0).sqrt();
            let want = [(-b + disc) / 2.0, (-b - disc) / 2.0];
            let got = roots(&UnivariatePoly::from_real(&[cc, b, 1.0])).unwrap();
            assert!(sorted_close(&want, &got, 1e-8));

            let (a, b, cc) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let want = cardano_real(a, b, cc);
            let got = roots(&UnivariatePoly::from_real(&[cc, b, a, 1.0])).unwrap();
            assert!(sorted_close(&want, &got, 1e-8), "{want:?} vs {got:?}");
        }
    }

    #[test]
    fn spectral_abscissa_examples() {
        assert!((spectral_abscissa(&damped_wave(), &[0.3]).unwrap() + 0.1).abs() < 1e-14);
        assert_eq!(spectral_abscissa(&mgt(), &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn mgt_low_frequency_branches() {
        let grid = log_grid(1e-3, 1e-1, 81);
        let d = Direction::new(vec![1.0]).unwrap();
        let set = track_branches(&mgt(), &d, &grid).unwrap();
        let far = set.labels(Anchor::Low)[0];
        assert!(set.branches[far].iter().all(|z| (z - c(-1.0)).norm() < 1e-2));
        for (j, b) in set.branches.iter().enumerate() {
            if j == far {
                continue;
            }
            for (z, r) in b.iter().zip(&set.rho) {
                assert!(z.re < 0.0 && z.re >= -r * r, "{z} at {r}");
            }
        }
        for (i, r) in set.rho.iter().enumerate() {
            let sum: Complex64 = set.branches.iter().map(|b| b[i]).sum();
            assert!((sum + 1.0).norm() < 1e-8, "Vieta at {r}");
        }
    }

    #[test]
    fn damped_wave_collision_is_logged() {
        let grid = log_grid(0.3, 0.7, 17);
        let d = Direction::new(vec![1.0]).unwrap();
        let set = track_branches(&damped_wave(), &d, &grid).unwrap();
        assert!(set.cluster_events.iter().any(|e| (e.rho - 0.5).abs() < 1e-3));
        // Past the collision the branches are a conjugate pair.
        let last = set.len() - 1;
        assert!((set.branches[0][last] - set.branches[1][last].conj()).norm() < 1e-12);
    }

    #[test]
    fn single_point_grid_returns_roots() {
        let d = Direction::new(vec![1.0]).unwrap();
        let set = track_branches(&mgt(), &d, &[0.4]).unwrap();
        let q = mgt().full_symbol_at(&[0.4]).unwrap();
        let r = roots(&q).unwrap();
        let vals: Vec<_> = set.branches.iter().map(|b| b[0]).collect();
        assert!(sorted_close(&r, &vals, 0.0));
    }

    #[test]
    fn labelings_connect_low_and_high_ends() {
        let grid = log_grid(1e-3, 1e3, 241);
        let d = Direction::new(vec![1.0]).unwrap();
        let set = track_branches(&mgt(), &d, &grid).unwrap();
        let low = set.labels(Anchor::Low);
        let last = set.len() - 1;
        // The branch near −1 at low frequency ends with real part −1/2.
        assert!((set.branches[low[0]][last].re + 0.5).abs() < 1e-3);
        let perm = set.label_permutation();
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn conjugate_pairing(rho in 1e-3f64..1e3) {
            let r = roots(&mgt().full_symbol_at(&[rho]).unwrap()).unwrap();
            let conj: Vec<Complex64> = r.iter().map(|z| z.conj()).collect();
            prop_assert!(sorted_close(&r, &conj, 1e-9 * (1.0 + rho)));
        }

        #[test]
        fn residual_postcondition(cs in proptest::collection::vec(-10.0f64..10.0, 2..8)) {
            let mut cs = cs;
            cs.push(1.0);
            let p = UnivariatePoly::from_real(&cs);
            let r = roots(&p).unwrap();
            prop_assert_eq!(r.len(), p.degree());
            prop_assert!(max_relative_residual(&p, &r) <= 1e-10);
        }
    }
}
