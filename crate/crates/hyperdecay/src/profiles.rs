//! Asymptotic profiles of the solution at large time, their Riesz potentials,
//! and the norm of the gap between solution and profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{kappa_solutions, Regime};
use crate::rootkit::{min_gap, real_roots};
use crate::spectral_solver::{mode_propagators, norm_series, DataSpec, NormTimeSeries, QuadratureGrid};
use crate::stability::{root_scale, COMMON_ROOT};
use crate::symbol_core::{check_poly, Direction, OperatorStack, UnivariatePoly};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileKind {
    /// Sum over the roots of `P_{m-1}`; one lower-order operator.
    V,
    /// Sum over the roots of `P_{m-2}`; two lower-order operators.
    W,
    /// Double roots of `P_{m-2}` shared with `P_{m-1}`.
    VWeak,
    /// Simple roots of `P_{m-2}` shared with `P_{m-1}`.
    WWeak,
    /// Hand-simplified display for the mgt, blackstock_crighton and em_elastic presets.
    PresetClosedForm,
}

impl ProfileKind {
    /// Order `a` of the Riesz potential `I_a` applied to the profile.
    pub fn riesz_order(self, m: usize) -> Result<usize> {
        let a = match self {
            ProfileKind::V | ProfileKind::VWeak => m.checked_sub(2),
            ProfileKind::W | ProfileKind::WWeak => m.checked_sub(3),
            ProfileKind::PresetClosedForm => Some(0),
        };
        a.ok_or_else(|| Error::InvalidInput(format!("{self:?} profile needs a higher order than {m}")))
    }
}

/// One exponential `amp · e^{t Σ c_p ρ^p}` of a profile along a fixed direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileTerm {
    pub amp: Complex64,
    pub rate: Vec<(i32, Complex64)>,
}

impl ProfileTerm {
    fn rate_at(&self, rho: f64) -> Complex64 {
        self.rate.iter().map(|(p, c)| c * rho.powi(*p)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub moment: f64,
    /// Applied as the multiplier `|ξ|^{-riesz_order}`.
    pub riesz_order: usize,
    /// Present only for [`ProfileKind::PresetClosedForm`].
    pub preset: Option<ClosedForm>,
}

/// Parameters of a hand-simplified profile, already Riesz-applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ClosedForm {
    Mgt { tau: f64, c: f64, b: f64 },
    BlackstockCrighton { tau: f64, c: f64, a: f64, b: f64 },
    EmElastic { mu: f64, c: f64, gamma: f64, sigma: f64 },
}

impl ClosedForm {
    /// Value of the Riesz-applied profile, with `M` the moment of the normalized stack.
    pub fn value(&self, moment: f64, t: f64, rho: f64) -> f64 {
        match *self {
            ClosedForm::Mgt { tau, c, b } => {
                moment * tau * (c * rho * t).sin() / (c * rho) * (-b * rho * rho * t / 2.0).exp()
            }
            ClosedForm::BlackstockCrighton { tau, c, a, b } => {
                let r2 = rho * rho;
                moment * tau / (c * c * r2) * ((-a * r2 * t).exp() - (c * rho * t).cos() * (-b * r2 * t / 2.0).exp())
            }
            ClosedForm::EmElastic { mu, c, gamma, sigma } => {
                let r2 = rho * rho;
                moment / (mu * sigma * sigma * r2)
                    * ((-c * c / sigma * r2 * t).exp()
                        - (mu.sqrt() * rho * t).cos() * (-gamma * gamma / (2.0 * sigma) * r2 * t).exp())
            }
        }
    }
}

/// `M = û_{m-1}(0) + c_{m-1,0} û_{m-2}(0) + c_{m-2,0} û_{m-3}(0)`, the last
/// coefficient taken as zero for a single lower-order operator.
pub fn moment(data: &DataSpec, stack: &OperatorStack) -> Result<f64> {
    let m = stack.order();
    data.check(m)?;
    if stack.depth() > 2 {
        return Err(Error::InvalidInput("moment defined for one or two lower-order operators".into()));
    }
    let c = stack.time_coeffs();
    let at0 = |j: usize| data.profiles[j].value(0.0, stack.dim()).re;
    let mut out = at0(m - 1) + c[1] * at0(m - 2);
    if stack.depth() == 2 && m >= 3 {
        out += c[2] * at0(m - 3);
    }
    Ok(out)
}

/// The generic profile kind for a stack: `V` for one lower-order operator,
/// otherwise `WWeak`, `VWeak` or `W` by the low-frequency root coincidences.
pub fn default_kind(stack: &OperatorStack, d: &Direction) -> Result<ProfileKind> {
    match stack.depth() {
        1 => Ok(ProfileKind::V),
        2 => {
            let s = Shared::new(stack, d)?;
            Ok(if !s.simple.is_empty() {
                ProfileKind::WWeak
            } else if !s.double.is_empty() {
                ProfileKind::VWeak
            } else {
                ProfileKind::W
            })
        }
        l => Err(Error::InvalidInput(format!("no profile for stack depth {l}"))),
    }
}

pub fn profile_spec(stack: &OperatorStack, kind: ProfileKind, moment: f64) -> Result<ProfileSpec> {
    let preset = if kind == ProfileKind::PresetClosedForm {
        Some(closed_form_for(stack)?)
    } else {
        None
    };
    Ok(ProfileSpec {
        kind,
        moment,
        riesz_order: kind.riesz_order(stack.order())?,
        preset,
    })
}

/// Recover the physical parameters of a preset stack from its coefficients.
fn closed_form_for(stack: &OperatorStack) -> Result<ClosedForm> {
    let e1 = Direction::axis(stack.dim(), 0);
    let p = |j: usize, k: usize| -> Result<f64> { Ok(stack.restrict(j, &e1)?.coeff(k).re) };
    match stack.name() {
        "mgt" => {
            let tau = 1.0 / p(1, 2)?;
            let c = (-p(1, 0)? * tau).sqrt();
            let b = (-p(0, 1)? - c * c) * tau;
            Ok(ClosedForm::Mgt { tau, c, b })
        }
        "blackstock_crighton" => {
            let tau = 1.0 / p(1, 3)?;
            let c = (-p(1, 1)? * tau).sqrt();
            let a = p(0, 0)? * tau / (c * c);
            let b = (-p(0, 2)? - c * c) * tau - a;
            Ok(ClosedForm::BlackstockCrighton { tau, c, a, b })
        }
        "em_elastic" => {
            let sigma = p(1, 4)? / 2.0;
            let mu = -p(2, 1)? / (sigma * sigma);
            let c = (p(0, 1)? / mu).sqrt();
            let gamma = (-p(0, 3)? - mu - c * c).sqrt();
            Ok(ClosedForm::EmElastic { mu, c, gamma, sigma })
        }
        other => Err(Error::InvalidInput(format!("no closed-form profile for `{other}`"))),
    }
}

/// Roots of `P_{m-2}` grouped by how they meet the roots of `P_{m-1}`.
struct Shared {
    low: UnivariatePoly,
    low_roots: Vec<f64>,
    mid: UnivariatePoly,
    mid_roots: Vec<f64>,
    /// Simple roots of `P_{m-2}` that are roots of `P_{m-1}`: `(index, index in P_{m-1})`.
    simple: Vec<(usize, usize)>,
    /// First index of double roots of `P_{m-2}` that are roots of `P_{m-1}`.
    double: Vec<usize>,
}

impl Shared {
    fn new(stack: &OperatorStack, d: &Direction) -> Result<Self> {
        let low = stack.restrict(2, d)?;
        let mid = stack.restrict(1, d)?;
        let low_roots = if low.degree() == 0 { Vec::new() } else { real_roots(&low)? };
        let mid_roots = real_roots(&mid)?;
        let tol = COMMON_ROOT * root_scale(&low_roots).max(root_scale(&mid_roots));
        let near = |x: f64| {
            mid_roots
                .iter()
                .enumerate()
                .map(|(k, &r)| (k, (r - x).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .filter(|(_, dist)| *dist <= tol)
                .map(|(k, _)| k)
        };
        let (mut simple, mut double) = (Vec::new(), Vec::new());
        let mut j = 0;
        while j < low_roots.len() {
            let mult = low_roots[j..].iter().take_while(|&&r| r - low_roots[j] <= tol).count();
            if let Some(k) = near(low_roots[j]) {
                match mult {
                    1 => simple.push((j, k)),
                    2 => double.push(j),
                    _ => {
                        return Err(Error::Unclassifiable(format!(
                            "root {} of multiplicity {mult}",
                            low_roots[j]
                        )))
                    }
                }
            }
            j += mult;
        }
        Ok(Self {
            low,
            low_roots,
            mid,
            mid_roots,
            simple,
            double,
        })
    }

    fn check(poly: &UnivariatePoly, roots: &[f64], deleted: &[usize], x: f64) -> Result<f64> {
        let z: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        Ok(check_poly(poly, &z, deleted, Complex64::new(x, 0.0))?.re)
    }
}

fn ipow(k: i32) -> Complex64 {
    Complex64::new(0.0, 1.0).powi(k)
}

/// Exponential terms of the profile along `d`, without `M` and the Riesz factor.
pub fn profile_terms(stack: &OperatorStack, kind: ProfileKind, d: &Direction) -> Result<Vec<ProfileTerm>> {
    let m = stack.order() as i32;
    let i = Complex64::new(0.0, 1.0);
    let simple_sum = |top: usize, exp_shift: i32| -> Result<Vec<ProfileTerm>> {
        // Roots of P_{m-top-1}, rates from P_{m-top}.
        let upper = stack.restrict(top, d)?;
        let lower = stack.restrict(top + 1, d)?;
        let r = real_roots(&lower)?;
        let z: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        if min_gap(&z) <= COMMON_ROOT * root_scale(&r) {
            return Err(Error::Unclassifiable("repeated root in the profile sum".into()));
        }
        r.iter()
            .enumerate()
            .map(|(j, &b)| {
                let chk = Shared::check(&lower, &r, &[j], b)?;
                Ok(ProfileTerm {
                    amp: 1.0 / (ipow(m - exp_shift) * chk),
                    rate: vec![(1, i * b), (2, Complex64::new(upper.eval_real(b) / chk, 0.0))],
                })
            })
            .collect()
    };
    match kind {
        ProfileKind::V => {
            if stack.depth() < 1 {
                return Err(Error::InvalidInput("V profile needs a lower-order operator".into()));
            }
            simple_sum(0, 2)
        }
        ProfileKind::W => {
            if stack.depth() < 2 {
                return Err(Error::InvalidInput("W profile needs two lower-order operators".into()));
            }
            simple_sum(1, 3)
        }
        ProfileKind::WWeak => {
            let s = Shared::new(stack, d)?;
            let top = stack.restrict(0, d)?;
            s.simple
                .iter()
                .map(|&(j, k)| {
                    let x = s.low_roots[j];
                    let chk = Shared::check(&s.low, &s.low_roots, &[j], x)?;
                    let tilde = Shared::check(&s.mid, &s.mid_roots, &[k], x)?;
                    let pm = top.eval_real(x);
                    Ok(ProfileTerm {
                        amp: 1.0 / (ipow(m - 3) * chk),
                        rate: vec![
                            (1, i * x),
                            (3, i * (pm / chk)),
                            (4, Complex64::new(pm * tilde / (chk * chk), 0.0)),
                        ],
                    })
                })
                .collect()
        }
        ProfileKind::VWeak => {
            let s = Shared::new(stack, d)?;
            let mut out = Vec::new();
            for &j in &s.double {
                let x = s.low_roots[j];
                let chk = Shared::check(&s.low, &s.low_roots, &[j, j + 1], x)?;
                let (kp, km) = kappa_solutions(stack, d, j + 1, Regime::Low)?;
                if (kp - km).norm() <= COMMON_ROOT * (1.0 + kp.norm()) {
                    return Err(Error::Unclassifiable(format!("κ₊ = κ₋ = {kp} at root {x}")));
                }
                let a = 1.0 / (ipow(m - 4) * chk * (kp - km));
                out.push(ProfileTerm {
                    amp: a,
                    rate: vec![(1, i * x), (2, km)],
                });
                out.push(ProfileTerm {
                    amp: -a,
                    rate: vec![(1, i * x), (2, kp)],
                });
            }
            Ok(out)
        }
        ProfileKind::PresetClosedForm => Err(Error::InvalidInput("closed forms have no term list".into())),
    }
}

/// Per-direction evaluator shared by every mode of a grid.
#[derive(Clone, Debug)]
pub struct ProfileField {
    spec: ProfileSpec,
    /// One term list per grid direction; empty for closed forms.
    terms: Vec<Vec<ProfileTerm>>,
}

impl ProfileField {
    pub fn new(stack: &OperatorStack, spec: ProfileSpec, directions: &[Direction]) -> Result<Self> {
        let terms = if spec.kind == ProfileKind::PresetClosedForm {
            vec![Vec::new(); directions.len()]
        } else {
            directions
                .iter()
                .map(|d| profile_terms(stack, spec.kind, d))
                .collect::<Result<_>>()?
        };
        Ok(Self { spec, terms })
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    /// `∂_t^k` of the Riesz-applied profile at direction index `dir` and
    /// radius `rho`; closed forms support `k = 0` only.
    pub fn value(&self, dir: usize, rho: f64, t: f64, k: usize) -> Complex64 {
        if self.spec.moment == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if let Some(cf) = self.spec.preset {
            debug_assert_eq!(k, 0, "closed forms carry no time derivatives");
            return Complex64::new(cf.value(self.spec.moment, t, rho), 0.0);
        }
        let sum: Complex64 = self.terms[dir]
            .iter()
            .map(|term| {
                let r = term.rate_at(rho);
                term.amp * r.powu(k as u32) * (r * t).exp()
            })
            .sum();
        sum * self.spec.moment * rho.powi(-(self.spec.riesz_order as i32))
    }
}

/// Value of the profile at one frequency.
pub fn profile_value(stack: &OperatorStack, spec: &ProfileSpec, t: f64, xi: &[f64]) -> Result<Complex64> {
    let rho = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if t <= 0.0 || rho == 0.0 {
        return Err(Error::InvalidInput("profiles need t > 0 and ξ ≠ 0".into()));
    }
    let d = Direction::normalized(xi)?;
    let field = ProfileField::new(stack, spec.clone(), &[d])?;
    Ok(field.value(0, rho, t, 0))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub moment: f64,
    pub kind: ProfileKind,
    pub solution: NormTimeSeries,
    pub gap: NormTimeSeries,
}

impl GapReport {
    /// Gap slope minus solution slope.
    pub fn improvement(&self) -> Option<f64> {
        Some(self.gap.fitted_slope? - self.solution.fitted_slope?)
    }
}

/// Norm series of the solution and of its distance to the Riesz-applied
/// profile, both on `grid`.
pub fn profile_gap_series(
    stack: &OperatorStack,
    data: &DataSpec,
    times: &[f64],
    k: usize,
    s: f64,
    grid: &QuadratureGrid,
    kind: Option<ProfileKind>,
) -> Result<GapReport> {
    let m = moment(data, stack)?;
    let kind = match kind {
        Some(k) => k,
        None => default_kind(stack, &grid.directions[0])?,
    };
    if kind == ProfileKind::PresetClosedForm && k > 0 {
        return Err(Error::InvalidInput("closed-form profiles support k = 0 only".into()));
    }
    let field = ProfileField::new(stack, profile_spec(stack, kind, m)?, &grid.directions)?;
    let props = mode_propagators(stack, data, grid)?;
    let nr = grid.rho.len();
    let solution = norm_series(grid, times, k, s, None, |i, t| props[i].value(t, k))?;
    let gap = norm_series(grid, times, k, s, None, |i, t| {
        props[i].value(t, k) - field.value(i / nr, grid.rho[i % nr], t, k)
    })?;
    Ok(GapReport {
        moment: m,
        kind,
        solution,
        gap,
    })
}

/// Heat-kernel profile for third-order stacks whose lowest operator is exactly `λ`:
/// `M e^{P_2(0, ξ') |ξ|² t}`, which carries one extra `t^{-1}` per time derivative.
pub fn heat_profile(stack: &OperatorStack, d: &Direction) -> Result<ProfileTerm> {
    let is_lambda = stack.order() == 3
        && stack.depth() == 2
        && stack.p(2).is_some_and(|p1| {
            p1.terms().all(|(k, _, c)| if k == 1 { (c - 1.0).abs() < 1e-14 } else { c == 0.0 })
        });
    if !is_lambda {
        return Err(Error::InvalidInput("heat profile needs m = 3 and P_1 = λ".into()));
    }
    let p2 = stack.restrict(1, d)?;
    Ok(ProfileTerm {
        amp: Complex64::new(1.0, 0.0),
        rate: vec![(2, Complex64::new(p2.eval_real(0.0), 0.0))],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::build;
    use crate::rootkit::log_grid;
    use crate::spectral_solver::Profile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..100)
            .map(|_| (10f64.powf(rng.gen_range(-1.0..3.0)), 10f64.powf(rng.gen_range(-3.0..0.5))))
            .collect()
    }

    fn generic_matches_closed_form(name: &str, kind: ProfileKind, overrides: &[(&str, f64)]) {
        let st = build(name, overrides).unwrap();
        let generic = profile_spec(&st, kind, 1.7).unwrap();
        let closed = profile_spec(&st, ProfileKind::PresetClosedForm, 1.7).unwrap();
        for (t, rho) in random_points(3) {
            let xi = [rho, 0.0, 0.0];
            let a = profile_value(&st, &generic, t, &xi).unwrap();
            let b = profile_value(&st, &closed, t, &xi).unwrap();
            let scale = a.norm().max(b.norm()).max(1e-300);
            assert!(a.im.abs() <= 1e-10 * (1.0 + a.re.abs()) / rho, "{name} imag {a}");
            assert!((a - b).norm() <= 1e-10 * scale + 1e-13 / (rho * rho), "{name} t={t} ρ={rho}: {a} vs {b}");
        }
    }

    #[test]
    fn mgt_profile_matches_closed_form() {
        generic_matches_closed_form("mgt", ProfileKind::V, &[("tau", 0.7), ("c", 1.3), ("b", 0.4)]);
    }

    #[test]
    fn bc_profile_matches_closed_form() {
        generic_matches_closed_form(
            "blackstock_crighton",
            ProfileKind::V,
            &[("tau", 0.5), ("c", 1.2), ("a", 0.8), ("b", 0.3)],
        );
    }

    #[test]
    fn em_elastic_profile_matches_closed_form() {
        generic_matches_closed_form(
            "em_elastic",
            ProfileKind::W,
            &[("mu", 1.5), ("c", 0.9), ("gamma", 0.6), ("sigma", 1.1)],
        );
    }

    #[test]
    fn mgt_moment_of_top_gaussian() {
        let st = build("mgt", &[]).unwrap();
        let m = moment(&DataSpec::top_gaussian(3, 1.0, 1.0), &st).unwrap();
        assert!((m - (2.0 * std::f64::consts::PI).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn mgt_moment_combines_tau() {
        // τ M = ∫ (τ u_2 + u_1).
        let tau = 0.5;
        let st = build("mgt", &[("tau", tau)]).unwrap();
        let g = |a| Profile::Gaussian { amplitude: a, width: 1.0 };
        let data = DataSpec {
            profiles: vec![Profile::Zero, g(2.0), g(3.0)],
        };
        let unit = (2.0 * std::f64::consts::PI).powf(1.5);
        let m = moment(&data, &st).unwrap();
        assert!((tau * m - (tau * 3.0 + 2.0) * unit).abs() < 1e-10);
    }

    #[test]
    fn cancelling_data_has_zero_moment() {
        let st = build("mgt", &[]).unwrap();
        let c1 = st.time_coeffs()[1];
        let data = DataSpec {
            profiles: vec![
                Profile::Zero,
                Profile::Gaussian { amplitude: 1.0, width: 1.0 },
                Profile::Gaussian { amplitude: -c1, width: 1.0 },
            ],
        };
        assert!(moment(&data, &st).unwrap().abs() < 1e-12);
        let spec = profile_spec(&st, ProfileKind::V, 0.0).unwrap();
        assert_eq!(profile_value(&st, &spec, 2.0, &[0.3, 0.0, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn riesz_orders_follow_kind() {
        assert_eq!(ProfileKind::V.riesz_order(3).unwrap(), 1);
        assert_eq!(ProfileKind::W.riesz_order(5).unwrap(), 2);
        assert_eq!(ProfileKind::VWeak.riesz_order(4).unwrap(), 2);
        assert_eq!(ProfileKind::WWeak.riesz_order(4).unwrap(), 1);
        assert!(ProfileKind::W.riesz_order(2).is_err());
    }

    #[test]
    fn default_kinds() {
        let e = |n| Direction::axis(n, 0);
        assert_eq!(default_kind(&build("mgt", &[]).unwrap(), &e(3)).unwrap(), ProfileKind::V);
        assert_eq!(default_kind(&build("em_elastic", &[]).unwrap(), &e(3)).unwrap(), ProfileKind::W);
        assert_eq!(
            default_kind(&build("em_elastic_dissipative", &[]).unwrap(), &e(3)).unwrap(),
            ProfileKind::VWeak
        );
        assert_eq!(
            default_kind(&build("fourth_order_weak", &[]).unwrap(), &e(1)).unwrap(),
            ProfileKind::WWeak
        );
    }

    #[test]
    fn vweak_is_a_difference_of_heat_kernels() {
        // κ solves a σ κ² + (a c² + μ σ) κ + c² μ = 0.
        let (a, mu, c, s) = (2.0, 1.0, 1.0, 1.0);
        let st = build("em_elastic_dissipative", &[]).unwrap();
        let spec = profile_spec(&st, ProfileKind::VWeak, 1.0).unwrap();
        let (k1, k2) = (-c * c / s, -mu / a);
        for (t, rho) in random_points(5) {
            let want = ((k1 * rho * rho * t).exp() - (k2 * rho * rho * t).exp()) / (a * s * (k2 - k1) * rho * rho);
            let got = profile_value(&st, &spec, t, &[rho, 0.0, 0.0]).unwrap();
            assert!((got.re - want).abs() <= 1e-10 * want.abs() + 1e-300, "{got} {want}");
        }
    }

    #[test]
    fn wweak_terms_match_the_shared_root_expansion() {
        let st = build("fourth_order_weak", &[]).unwrap();
        let terms = profile_terms(&st, ProfileKind::WWeak, &Direction::axis(1, 0)).unwrap();
        assert_eq!(terms.len(), 2);
        for t in &terms {
            assert!((t.rate[2].1.re + 1.5).abs() < 1e-12);
            assert!((t.rate[1].1.im.abs() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_profile_requires_unit_lowest_operator() {
        let ok = build("mgt_classical_damping", &[]).unwrap();
        let term = heat_profile(&ok, &Direction::axis(3, 0)).unwrap();
        assert!((term.rate[0].1.re + 1.0).abs() < 1e-12);
        let bad = build("mgt_classical_damping", &[("b", 2.0)]).unwrap();
        assert!(heat_profile(&bad, &Direction::axis(3, 0)).is_err());
    }

    #[test]
    fn zero_moment_gap_equals_solution() {
        let st = build("mgt", &[]).unwrap();
        let c1 = st.time_coeffs()[1];
        let data = DataSpec {
            profiles: vec![
                Profile::Zero,
                Profile::Gaussian { amplitude: 1.0, width: 1.0 },
                Profile::Gaussian { amplitude: -c1, width: 1.0 },
            ],
        };
        let grid = QuadratureGrid::for_stack(&st, 1e-4, 1e2, 512).unwrap();
        let r = profile_gap_series(&st, &data, &log_grid(1.0, 10.0, 4), 0, 0.0, &grid, None).unwrap();
        assert_eq!(r.moment.abs() < 1e-12, true);
        // A moment of round-off size still scales a profile of order 1e-16.
        for (a, b) in r.gap.values.iter().zip(&r.solution.values) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
