//! Homogeneous symbols `P(λ, ξ) = Σ c_{k,α} λ^k ξ^α`, operator stacks and
//! the univariate polynomials obtained by restricting them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type MultiIndex = Vec<u32>;

/// Polynomial with complex coefficients in ascending degree. Trailing zeros
/// are trimmed, so the last coefficient is nonzero unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<Complex64>,
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }

    /// `Σ |c_i| |z|^i`, the natural rounding scale of `eval` at `z`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, f: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * f).collect())
    }

    /// Divide by `(λ - z)` with synthetic division, dropping the remainder.
    pub fn deflate(&self, z: Complex64) -> Self {
        let d = self.degree();
        if self.is_zero() || d == 0 {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=d).rev() {
            acc = acc * z + self.coeffs[k];
            out[k - 1] = acc;
        }
        Self::new(out)
    }
}

/// Unit vector on the sphere, checked to 1e-12.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if components.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self(components))
    }

    /// Rescale a nonzero vector to unit length.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self(v.iter().map(|x| x / norm).collect()))
    }

    pub fn axis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, rho: f64) -> Vec<f64> {
        self.0.iter().map(|x| x * rho).collect()
    }
}

/// Coefficient table of one homogeneous symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousSymbol {
    order: usize,
    dim: usize,
    coeffs: BTreeMap<(usize, MultiIndex), f64>,
}

fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .map(|(&a, &xi)| xi.powi(a as i32))
        .product()
}

impl HomogeneousSymbol {
    pub fn new(order: usize, dim: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((order, vec![0; dim]), 0.0);
        Self { order, dim, coeffs }
    }

    /// Add `c` to the coefficient of `λ^k ξ^α`.
    pub fn add_term(&mut self, k: usize, alpha: &[u32], c: f64) -> Result<()> {
        if alpha.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.len(),
            });
        }
        let total = k + alpha.iter().map(|&a| a as usize).sum::<usize>();
        if total != self.order {
            return Err(Error::InvalidModel(format!(
                "term k={k}, alpha={alpha:?} has degree {total}, symbol order {}",
                self.order
            )));
        }
        *self.coeffs.entry((k, alpha.to_vec())).or_insert(0.0) += c;
        Ok(())
    }

    pub fn with_term(mut self, k: usize, alpha: &[u32], c: f64) -> Result<Self> {
        self.add_term(k, alpha, c)?;
        Ok(self)
    }

    /// Add `c λ^k |ξ|^{2r}` with `k + 2r = order`, expanded into monomials.
    pub fn add_radial(&mut self, k: usize, c: f64) -> Result<()> {
        let rest = self
            .order
            .checked_sub(k)
            .filter(|r| r % 2 == 0)
            .ok_or_else(|| Error::InvalidModel(format!("radial term k={k} with order {}", self.order)))?;
        if rest == 0 {
            return self.add_term(k, &vec![0; self.dim], c);
        }
        let r = rest / 2;
        // Multinomial expansion of (ξ_1^2 + ... + ξ_n^2)^r.
        for parts in compositions(r as u32, self.dim) {
            let mut coef = factorial(r as u32);
            for &p in &parts {
                coef /= factorial(p);
            }
            let alpha: Vec<u32> = parts.iter().map(|p| 2 * p).collect();
            self.add_term(k, &alpha, c * coef)?;
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &MultiIndex, f64)> {
        self.coeffs.iter().map(|((k, a), c)| (*k, a, *c))
    }

    /// Pure-time coefficient `c_{k,0}`, only meaningful when `k = order`.
    pub fn leading_time_coeff(&self) -> f64 {
        self.coeffs
            .get(&(self.order, vec![0; self.dim]))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c * f)).collect(),
        }
    }

    /// `λ ↦ P(λ, d)` as a real polynomial.
    pub fn restrict(&self, d: &[f64]) -> Result<UnivariatePoly> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d.len(),
            });
        }
        let mut c = vec![0.0; self.order + 1];
        for ((k, alpha), v) in &self.coeffs {
            c[*k] += v * monomial(alpha, d);
        }
        Ok(UnivariatePoly::from_real(&c))
    }

    /// `λ ↦ P(λ, iξ)`.
    pub fn restrict_imaginary(&self, xi: &[f64]) -> Result<UnivariatePoly> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.order + 1];
        for ((k, alpha), v) in &self.coeffs {
            let deg: u32 = alpha.iter().sum();
            c[*k] += Complex64::i().powu(deg) * (v * monomial(alpha, xi));
        }
        Ok(UnivariatePoly::new(c))
    }
}

pub fn restrict_to_direction(sym: &HomogeneousSymbol, d: &Direction) -> Result<UnivariatePoly> {
    sym.restrict(d.components())
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// All ways of writing `r` as an ordered sum of `parts` non-negative integers.
fn compositions(r: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![r]];
    }
    let mut out = Vec::new();
    for first in (0..=r).rev() {
        for mut tail in compositions(r - first, parts - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// The full operator `Q = P_m + P_{m-1} + ... + P_{m-ℓ}`, normalized so that
/// `c_{m,0} = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorStack {
    name: String,
    symbols: Vec<HomogeneousSymbol>,
    isotropic: bool,
}

impl OperatorStack {
    pub fn new(name: impl Into<String>, symbols: Vec<HomogeneousSymbol>) -> Result<Self> {
        let depth = symbols.len().saturating_sub(1);
        if depth == 0 {
            return Err(Error::InvalidModel("need at least two symbols".into()));
        }
        if depth > 3 {
            return Err(Error::InvalidModel(format!(
                "stack depth {depth} exceeds the supported maximum of 3"
            )));
        }
        let dim = symbols[0].dim;
        let m = symbols[0].order;
        if m < depth {
            return Err(Error::InvalidModel("order smaller than stack depth".into()));
        }
        for (j, s) in symbols.iter().enumerate() {
            if s.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dim,
                });
            }
            if s.order + j != m {
                return Err(Error::InvalidModel(format!(
                    "symbol {j} has order {}, expected {}",
                    s.order,
                    m - j
                )));
            }
        }
        let lead = symbols[0].leading_time_coeff();
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidModel("leading coefficient c_{m,0} vanishes".into()));
        }
        let symbols: Vec<_> = symbols.iter().map(|s| s.scaled(1.0 / lead)).collect();
        let last = symbols[depth].leading_time_coeff();
        if last <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "lowest symbol needs a positive pure-time coefficient, got {last}"
            )));
        }
        let isotropic = detect_isotropy(&symbols)?;
        Ok(Self {
            name: name.into(),
            symbols,
            isotropic,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.symbols[0].order
    }

    pub fn depth(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.symbols[0].dim
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    pub fn symbols(&self) -> &[HomogeneousSymbol] {
        &self.symbols
    }

    /// `P_{m-j}`; `None` beyond the stack depth.
    pub fn p(&self, j: usize) -> Option<&HomogeneousSymbol> {
        self.symbols.get(j)
    }

    /// `c_{m-j,0}` for `j = 0..=ℓ`.
    pub fn time_coeffs(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.leading_time_coeff()).collect()
    }

    /// Restriction of `P_{m-j}` to `d`; the zero polynomial beyond the depth.
    pub fn restrict(&self, j: usize, d: &Direction) -> Result<UnivariatePoly> {
        match self.symbols.get(j) {
            Some(s) => s.restrict(d.components()),
            None => Ok(UnivariatePoly::zero()),
        }
    }

    pub fn full_symbol_at(&self, xi: &[f64]) -> Result<UnivariatePoly> {
        let mut q = UnivariatePoly::zero();
        for s in &self.symbols {
            q = q.add(&s.restrict_imaginary(xi)?);
        }
        Ok(q)
    }
}

pub fn full_symbol_at(stack: &OperatorStack, xi: &[f64]) -> Result<UnivariatePoly> {
    stack.full_symbol_at(xi)
}

fn detect_isotropy(symbols: &[HomogeneousSymbol]) -> Result<bool> {
    let dim = symbols[0].dim;
    let dirs: Vec<Vec<f64>> = if dim == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1505);
        (0..8)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x / n).collect()
            })
            .collect()
    };
    for s in symbols {
        let reference = s.restrict(&dirs[0])?;
        for d in &dirs[1..] {
            let r = s.restrict(d)?;
            let n = reference.coeffs().len().max(r.coeffs().len());
            for k in 0..n {
                let (a, b) = (reference.coeff(k), r.coeff(k));
                if (a - b).norm() > 1e-12 * (1.0 + a.norm().max(b.norm())) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `lead(p) · Π_{k ∉ deleted} (at − root_k)`.
pub fn check_poly(
    p: &UnivariatePoly,
    roots: &[Complex64],
    deleted: &[usize],
    at: Complex64,
) -> Result<Complex64> {
    if deleted.is_empty() || deleted.len() > 2 {
        return Err(Error::InvalidInput("between one and two deleted roots".into()));
    }
    if let Some(&bad) = deleted.iter().find(|&&i| i >= roots.len()) {
        return Err(Error::InvalidInput(format!("deleted index {bad} out of range")));
    }
    Ok(roots
        .iter()
        .enumerate()
        .filter(|(k, _)| !deleted.contains(k))
        .fold(p.leading(), |acc, (_, r)| acc * (at - r)))
}
