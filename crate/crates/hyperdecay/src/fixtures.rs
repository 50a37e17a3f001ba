//! Expected outcomes bundled with each preset and the `reproduce` pipeline
//! that checks them: classify, expand the roots, simulate, compare with the
//! profile.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{
    default_grid, high_freq_expansions, kappa_solutions, low_freq_expansions, verify_expansion, ExpansionFit,
    ExpansionRecord, Regime,
};
use crate::decay_theory::{predict_decay, DecayQuery};
use crate::fit::fit_loglog;
use crate::output::{write_csv, write_json};
use crate::presets;
use crate::profiles::{profile_gap_series, GapReport};
use crate::rootkit::{log_grid, log_grid_per_decade, track_branches};
use crate::spectral_solver::{simulate, DataSpec, NormTimeSeries, Profile, QuadratureGrid};
use crate::stability::{classify, Hyperbolicity, InterlaceKind, ScenarioFlag, StabilityReport};
use crate::sphere::samples_for;
use crate::symbol_core::{Direction, OperatorStack};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Paper,
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    High,
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Expect {
    StrictlyStable { value: bool },
    Hyperbolicity { symbol: usize, class: Hyperbolicity },
    Interlacing { pair: Pair, kind: InterlaceKind },
    Flag { flag: ScenarioFlag },
    /// Some expansion record carries every listed `(power, re, im)` term.
    Branch { regime: Regime, terms: Vec<(i32, f64, f64)> },
    /// `κ±` of the double root with 1-based label `j` (larger real part first).
    Kappa {
        regime: Regime,
        j: usize,
        /// Defaults to the preset direction.
        direction: Option<Vec<f64>>,
        plus: (f64, f64),
        minus: (f64, f64),
    },
    /// Every expansion remainder beats its last term by 0.4 in order.
    RemaindersConsistent { regime: Regime },
    /// Log-log fit of `|Re λ|` for the least damped branch at the far end of
    /// the fit range; `coeff` is the fitted prefactor of `−|Re λ|`.
    ReSlope { regime: Regime, range: (f64, f64), slope: f64, coeff: Option<f64> },
    PredictedExponent { value: f64 },
    /// Fitted slope with a Gaussian in `u_{m-1}` only.
    DecaySlope { value: f64 },
    GapImprovement { lo: f64, hi: f64 },
    /// Slope with moment-free data minus slope with generic data.
    MomentFreeGain { at_least: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fixture {
    pub id: String,
    pub provenance: Provenance,
    pub tol: f64,
    pub expect: Expect,
}

/// Grid and window of the decay simulation run by `reproduce`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSetup {
    pub k: usize,
    pub s: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
    pub tmin: f64,
    pub tmax: f64,
    pub times: usize,
}

impl SimulationSetup {
    pub fn standard(k: usize, s: f64) -> Self {
        Self {
            k,
            s,
            rho_min: 1e-4,
            rho_max: 1e2,
            points: 4096,
            tmin: 1e2,
            tmax: 1e4,
            times: 25,
        }
    }

    pub fn grid(&self, stack: &OperatorStack) -> Result<QuadratureGrid> {
        QuadratureGrid::for_stack(stack, self.rho_min, self.rho_max, self.points)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        log_grid(self.tmin, self.tmax, self.times)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PresetFixtures {
    pub preset: String,
    pub direction: Vec<f64>,
    pub simulation: Option<SimulationSetup>,
    pub fixtures: Vec<Fixture>,
}

fn fx(id: &str, provenance: Provenance, tol: f64, expect: Expect) -> Fixture {
    Fixture {
        id: id.to_string(),
        provenance,
        tol,
        expect,
    }
}

fn stable(id: &str, p: Provenance) -> Fixture {
    fx(id, p, 0.0, Expect::StrictlyStable { value: true })
}

fn branch(id: &str, p: Provenance, regime: Regime, terms: &[(i32, f64, f64)]) -> Fixture {
    fx(
        id,
        p,
        1e-8,
        Expect::Branch {
            regime,
            terms: terms.to_vec(),
        },
    )
}

fn remainders(regime: Regime) -> Fixture {
    let id = match regime {
        Regime::Low => "low remainders",
        Regime::High => "high remainders",
    };
    fx(id, Provenance::Derived, 0.0, Expect::RemaindersConsistent { regime })
}

use Provenance::{Derived, Paper};
use Regime::{High, Low};

/// Fixtures for a preset at its default parameters.
pub fn fixtures_for(name: &str) -> Result<PresetFixtures> {
    let stack = presets::build(name, &[])?;
    let direction = Direction::axis(stack.dim(), 0).components().to_vec();
    let sqrt2 = 2f64.sqrt();
    let (simulation, fixtures) = match name {
        "mgt" => (
            Some(SimulationSetup::standard(0, 0.0)),
            vec![
                fx("P_3 hyperbolicity", Paper, 0.0, Expect::Hyperbolicity { symbol: 0, class: Hyperbolicity::Strict }),
                fx("(P_2, P_3) interlacing", Paper, 0.0, Expect::Interlacing { pair: Pair::High, kind: InterlaceKind::Strict }),
                stable("strict stability", Paper),
                branch("low constant branch", Paper, Low, &[(0, -1.0, 0.0)]),
                branch("low branch -i", Paper, Low, &[(1, 0.0, -1.0), (2, -0.5, 0.0)]),
                branch("low branch +i", Paper, Low, &[(1, 0.0, 1.0), (2, -0.5, 0.0)]),
                branch("high branch -sqrt2", Derived, High, &[(1, 0.0, -sqrt2), (0, -0.25, 0.0)]),
                branch("high branch 0", Derived, High, &[(0, -0.5, 0.0)]),
                branch("high branch +sqrt2", Derived, High, &[(1, 0.0, sqrt2), (0, -0.25, 0.0)]),
                remainders(Low),
                remainders(High),
                fx("predicted exponent", Derived, 1e-12, Expect::PredictedExponent { value: -0.25 }),
                fx("decay slope", Derived, 0.05, Expect::DecaySlope { value: -0.25 }),
                fx("profile gap improvement", Derived, 0.0, Expect::GapImprovement { lo: -0.65, hi: -0.35 }),
                fx("moment-free gain", Derived, 0.0, Expect::MomentFreeGain { at_least: 0.35 }),
            ],
        ),
        "blackstock_crighton" => (
            Some(SimulationSetup::standard(0, 1.0)),
            vec![
                fx("(P_3, P_4) interlacing", Paper, 0.0, Expect::Interlacing { pair: Pair::High, kind: InterlaceKind::Strict }),
                stable("strict stability", Paper),
                branch("low constant branch", Paper, Low, &[(0, -1.0, 0.0)]),
                branch("low heat branch", Paper, Low, &[(2, -1.0, 0.0)]),
                branch("low branch -i", Paper, Low, &[(1, 0.0, -1.0), (2, -0.5, 0.0)]),
                branch("low branch +i", Paper, Low, &[(1, 0.0, 1.0), (2, -0.5, 0.0)]),
                remainders(Low),
                remainders(High),
                fx("predicted exponent", Derived, 1e-12, Expect::PredictedExponent { value: -0.25 }),
                fx("decay slope", Derived, 0.05, Expect::DecaySlope { value: -0.25 }),
                fx("profile gap improvement", Derived, 0.0, Expect::GapImprovement { lo: -0.65, hi: -0.35 }),
                fx("moment-free gain", Derived, 0.0, Expect::MomentFreeGain { at_least: 0.35 }),
            ],
        ),
        "em_elastic" => (
            Some(SimulationSetup::standard(0, 2.0)),
            vec![
                fx("(P_4, P_5) interlacing", Paper, 0.0, Expect::Interlacing { pair: Pair::High, kind: InterlaceKind::Strict }),
                fx("(P_3, P_4) interlacing", Paper, 0.0, Expect::Interlacing { pair: Pair::Low, kind: InterlaceKind::Strict }),
                stable("strict stability", Paper),
                fx("low constant branches", Paper, 1e-6, Expect::Branch { regime: Low, terms: vec![(0, -1.0, 0.0)] }),
                branch("low branch -1", Paper, Low, &[(1, 0.0, -1.0), (2, -0.5, 0.0)]),
                branch("low branch 0", Paper, Low, &[(2, -1.0, 0.0)]),
                branch("low branch +1", Paper, Low, &[(1, 0.0, 1.0), (2, -0.5, 0.0)]),
                remainders(Low),
                fx("predicted exponent", Paper, 1e-12, Expect::PredictedExponent { value: -0.75 }),
                fx("decay slope", Paper, 0.07, Expect::DecaySlope { value: -0.75 }),
            ],
        ),
        "em_elastic_dissipative" => (
            None,
            vec![
                fx("P_2 hyperbolicity", Paper, 0.0, Expect::Hyperbolicity { symbol: 2, class: Hyperbolicity::Weak }),
                stable("strict stability", Paper),
                fx("decay-loss flag", Paper, 0.0, Expect::Flag { flag: ScenarioFlag::DecayLoss }),
            ],
        ),
        "anisotropic_elastic_2d" => {
            let disc = (4.5f64 * 4.5 - 16.0).sqrt();
            (
                None,
                vec![
                    stable("strict stability", Paper),
                    fx(
                        "low kappa along (1, 0)",
                        Derived,
                        1e-6,
                        Expect::Kappa { regime: Low, j: 1, direction: None, plus: (-1.0, 0.0), minus: (-1.0, 0.0) },
                    ),
                    fx(
                        "low kappa along the diagonal",
                        Derived,
                        1e-8,
                        Expect::Kappa {
                            regime: Low,
                            j: 1,
                            direction: Some(vec![0.5f64.sqrt(), 0.5f64.sqrt()]),
                            plus: ((-4.5 + disc) / 4.0, 0.0),
                            minus: ((-4.5 - disc) / 4.0, 0.0),
                        },
                    ),
                ],
            )
        }
        "mgt_classical_damping" => (
            None,
            vec![
                stable("strict stability", Paper),
                branch("high branch -i", Paper, High, &[(1, 0.0, -1.0), (-1, 0.0, -0.5), (-2, -0.5, 0.0)]),
                branch("high branch +i", Paper, High, &[(1, 0.0, 1.0), (-1, 0.0, 0.5), (-2, -0.5, 0.0)]),
                remainders(High),
                fx(
                    "high Re slope",
                    Derived,
                    0.1,
                    Expect::ReSlope { regime: High, range: (1e2, 1e4), slope: -2.0, coeff: None },
                ),
            ],
        ),
        "fourth_order_weak" => {
            let s = 15f64.sqrt() / 8.0;
            (
                Some(SimulationSetup {
                    rho_min: 1e-5,
                    ..SimulationSetup::standard(0, 1.0)
                }),
                vec![
                    stable("strict stability", Paper),
                    fx("slow low-frequency flag", Derived, 0.0, Expect::Flag { flag: ScenarioFlag::SlowLow }),
                    branch("low branch +i", Paper, Low, &[(1, 0.0, 1.0), (3, 0.0, -1.5), (4, -1.5, 0.0)]),
                    branch("low branch -i", Paper, Low, &[(1, 0.0, -1.0), (3, 0.0, 1.5), (4, -1.5, 0.0)]),
                    fx(
                        "high kappa",
                        Paper,
                        1e-8,
                        Expect::Kappa { regime: High, j: 2, direction: None, plus: (-0.125, s), minus: (-0.125, -s) },
                    ),
                    branch("high outer branch -", Paper, High, &[(1, 0.0, -2.0), (0, -0.375, 0.0)]),
                    branch("high outer branch +", Paper, High, &[(1, 0.0, 2.0), (0, -0.375, 0.0)]),
                    remainders(Low),
                    fx(
                        "low Re slope",
                        Derived,
                        0.1,
                        Expect::ReSlope { regime: Low, range: (1e-3, 1e-2), slope: 4.0, coeff: Some(-1.5) },
                    ),
                    fx("decay slope", Derived, 0.05, Expect::DecaySlope { value: -0.125 }),
                ],
            )
        }
        "example_ell3" => (None, vec![stable("strict stability", Paper)]),
        "damped_wave" => (
            Some(SimulationSetup::standard(0, 0.0)),
            vec![
                stable("strict stability", Paper),
                branch("low heat branch", Derived, Low, &[(2, -1.0, 0.0)]),
                branch("low constant branch", Derived, Low, &[(0, -1.0, 0.0)]),
                remainders(Low),
                fx("decay slope", Derived, 0.05, Expect::DecaySlope { value: -0.25 }),
            ],
        ),
        _ => return Err(Error::InvalidModel(format!("unknown preset `{name}`"))),
    };
    Ok(PresetFixtures {
        preset: name.to_string(),
        direction,
        simulation,
        fixtures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureResult {
    pub id: String,
    pub provenance: Provenance,
    pub tol: f64,
    pub expect: Expect,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub regime: Regime,
    pub records: Vec<ExpansionRecord>,
    pub fits: Vec<ExpansionFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub preset: String,
    pub results: Vec<FixtureResult>,
    pub passed: usize,
    pub failed: usize,
}

impl ReproduceReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

/// Records along `d` with remainder fits against tracked branches.
pub fn expansion_report(stack: &OperatorStack, d: &Direction, regime: Regime) -> Result<ExpansionReport> {
    let records = match regime {
        Regime::Low => low_freq_expansions(stack, d)?,
        Regime::High => high_freq_expansions(stack, d)?,
    };
    let bs = track_branches(stack, d, &default_grid(regime))?;
    let fits = records
        .iter()
        .map(|r| verify_expansion(&bs, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionReport { regime, records, fits })
}

/// `u_{m-2} = g`, `u_{m-1} = −c_{m-1,0} g`: the moment vanishes.
pub fn moment_free_data(stack: &OperatorStack) -> DataSpec {
    let m = stack.order();
    let c1 = stack.time_coeffs()[1];
    let mut profiles = vec![Profile::Zero; m];
    profiles[m - 2] = Profile::Gaussian { amplitude: 1.0, width: 1.0 };
    profiles[m - 1] = Profile::Gaussian {
        amplitude: -c1,
        width: 1.0,
    };
    DataSpec { profiles }
}

/// Fitted slope of `−|Re λ|` against `ρ` for the least damped branch.
fn re_slope(stack: &OperatorStack, d: &Direction, regime: Regime, range: (f64, f64)) -> Result<(f64, f64)> {
    let rho = log_grid_per_decade(range.0, range.1, 20);
    let bs = track_branches(stack, d, &rho)?;
    let far = match regime {
        Regime::Low => 0,
        Regime::High => bs.rho.len() - 1,
    };
    let j = (0..bs.branches.len())
        .min_by(|&a, &b| bs.branches[a][far].re.abs().total_cmp(&bs.branches[b][far].re.abs()))
        .ok_or_else(|| Error::InvalidInput("no branches".into()))?;
    let y: Vec<f64> = bs.branches[j].iter().map(|z| z.re.abs()).collect();
    let fit = fit_loglog(&bs.rho, &y).ok_or_else(|| Error::InvalidInput("Re λ fit failed".into()))?;
    Ok((fit.slope, -fit.intercept.exp()))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

fn has_terms(records: &[ExpansionRecord], terms: &[(i32, f64, f64)], tol: f64) -> bool {
    records.iter().any(|r| {
        terms.iter().all(|&(p, re, im)| {
            let want = Complex64::new(re, im);
            let got = r.terms.iter().find(|t| t.power == p).map_or(Complex64::new(0.0, 0.0), |t| t.coeff);
            close(got, want, tol)
        })
    })
}

/// Outputs of every pipeline stage, computed lazily as fixtures need them.
struct Stages<'a> {
    stack: &'a OperatorStack,
    d: Direction,
    setup: Option<&'a SimulationSetup>,
    out: &'a Path,
    report: Option<StabilityReport>,
    low: Option<ExpansionReport>,
    high: Option<ExpansionReport>,
    sim: Option<NormTimeSeries>,
    gap: Option<GapReport>,
    moment_free: Option<NormTimeSeries>,
}

impl Stages<'_> {
    fn report(&mut self) -> Result<&StabilityReport> {
        if self.report.is_none() {
            let samples = samples_for(self.stack.dim(), self.stack.is_isotropic());
            let r = classify(self.stack, &samples)?;
            write_json(&self.out.join("classify.json"), &r)?;
            self.report = Some(r);
        }
        Ok(self.report.as_ref().unwrap())
    }

    fn expansions(&mut self, regime: Regime) -> Result<&ExpansionReport> {
        let slot = match regime {
            Regime::Low => &mut self.low,
            Regime::High => &mut self.high,
        };
        if slot.is_none() {
            let r = expansion_report(self.stack, &self.d, regime)?;
            let name = match regime {
                Regime::Low => "asymptotics_low",
                Regime::High => "asymptotics_high",
            };
            write_json(&self.out.join(format!("{name}.json")), &r)?;
            write_csv(&self.out.join(format!("{name}.csv")), "branch,power,re,im", &expansion_rows(&r.records))?;
            *slot = Some(r);
        }
        Ok(slot.as_ref().unwrap())
    }

    fn setup(&self) -> Result<&SimulationSetup> {
        self.setup
            .ok_or_else(|| Error::InvalidInput("preset has no simulation setup".into()))
    }

    fn sim(&mut self) -> Result<&NormTimeSeries> {
        if self.sim.is_none() {
            let st = self.setup()?.clone();
            let data = DataSpec::top_gaussian(self.stack.order(), 1.0, 1.0);
            let r = simulate(self.stack, &data, &st.time_grid(), st.k, st.s, &st.grid(self.stack)?, None)?;
            write_series(self.out, "simulate", &r)?;
            self.sim = Some(r);
        }
        Ok(self.sim.as_ref().unwrap())
    }

    fn gap(&mut self) -> Result<&GapReport> {
        if self.gap.is_none() {
            let st = self.setup()?.clone();
            let data = DataSpec::top_gaussian(self.stack.order(), 1.0, 1.0);
            let g = profile_gap_series(self.stack, &data, &st.time_grid(), st.k, st.s, &st.grid(self.stack)?, None)?;
            write_series(self.out, "profile_solution", &g.solution)?;
            write_series(self.out, "profile_gap", &g.gap)?;
            write_json(&self.out.join("profile.json"), &g)?;
            self.gap = Some(g);
        }
        Ok(self.gap.as_ref().unwrap())
    }

    fn moment_free(&mut self) -> Result<&NormTimeSeries> {
        if self.moment_free.is_none() {
            let st = self.setup()?.clone();
            let data = moment_free_data(self.stack);
            let r = simulate(self.stack, &data, &st.time_grid(), st.k, st.s, &st.grid(self.stack)?, None)?;
            write_series(self.out, "simulate_moment_free", &r)?;
            self.moment_free = Some(r);
        }
        Ok(self.moment_free.as_ref().unwrap())
    }

    fn check(&mut self, f: &Fixture) -> Result<(String, bool)> {
        let tol = f.tol;
        Ok(match &f.expect {
            Expect::StrictlyStable { value } => {
                let r = self.report()?;
                (format!("{}", r.strictly_stable), r.strictly_stable == *value)
            }
            Expect::Hyperbolicity { symbol, class } => {
                let got = self.report()?.hyperbolicity.get(*symbol).copied();
                (format!("{got:?}"), got == Some(*class))
            }
            Expect::Interlacing { pair, kind } => {
                let r = self.report()?;
                let c = match pair {
                    Pair::High => &r.interlacing_high,
                    Pair::Low => &r.interlacing_low,
                };
                let got = c.as_ref().map(|c| c.kind);
                (format!("{got:?}"), got == Some(*kind))
            }
            Expect::Flag { flag } => {
                let r = self.report()?;
                (format!("{:?}", r.scenario_flags), r.scenario_flags.contains(flag))
            }
            Expect::Branch { regime, terms } => {
                let e = self.expansions(*regime)?;
                let ok = has_terms(&e.records, terms, tol);
                (format!("{} records", e.records.len()), ok)
            }
            Expect::Kappa { regime, j, direction, plus, minus } => {
                let d = match direction {
                    Some(v) => Direction::normalized(v)?,
                    None => self.d.clone(),
                };
                let (kp, km) = kappa_solutions(self.stack, &d, *j, *regime)?;
                let ok = close(kp, Complex64::new(plus.0, plus.1), tol) && close(km, Complex64::new(minus.0, minus.1), tol);
                (format!("{kp}, {km}"), ok)
            }
            Expect::RemaindersConsistent { regime } => {
                let e = self.expansions(*regime)?;
                let orders: Vec<f64> = e.fits.iter().map(|x| x.fitted_order).collect();
                (format!("{orders:?}"), e.fits.iter().all(|x| x.consistent))
            }
            Expect::ReSlope { regime, range, slope, coeff } => {
                let (got, c) = re_slope(self.stack, &self.d, *regime, *range)?;
                let ok = (got - slope).abs() <= tol && coeff.is_none_or(|w| (c - w).abs() <= 0.02);
                (format!("slope {got}, coeff {c}"), ok)
            }
            Expect::PredictedExponent { value } => {
                let st = self.setup()?.clone();
                let q = DecayQuery::new(self.stack.dim(), 1.0, st.k, st.s);
                let p = predict_decay(self.report()?, &q)?;
                (format!("{}", p.exponent), (p.exponent - value).abs() <= tol)
            }
            Expect::DecaySlope { value, .. } => {
                let got = self.sim()?.fitted_slope;
                (format!("{got:?}"), got.is_some_and(|g| (g - value).abs() <= tol))
            }
            Expect::GapImprovement { lo, hi } => {
                let got = self.gap()?.improvement();
                (format!("{got:?}"), got.is_some_and(|g| *lo <= g && g <= *hi))
            }
            Expect::MomentFreeGain { at_least } => {
                let base = self.sim()?.fitted_slope;
                let free = self.moment_free()?.fitted_slope;
                match (base, free) {
                    (Some(b), Some(m)) => (format!("{}", b - m), b - m >= *at_least),
                    _ => ("no fit".into(), false),
                }
            }
        })
    }
}

fn expansion_rows(records: &[ExpansionRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .flat_map(|r| {
            r.terms
                .iter()
                .map(move |t| vec![r.branch as f64, t.power as f64, t.coeff.re, t.coeff.im])
        })
        .collect()
}

pub fn write_series(out: &Path, name: &str, s: &NormTimeSeries) -> Result<()> {
    let rows: Vec<Vec<f64>> = s.times.iter().zip(&s.values).map(|(t, v)| vec![*t, *v]).collect();
    write_csv(&out.join(format!("{name}.csv")), "t,value", &rows)?;
    write_json(&out.join(format!("{name}.json")), s)
}

/// Run the pipeline for `preset` into `out`, checking every fixture.
/// `tol` replaces the numeric tolerance of every fixture that has one.
pub fn reproduce(preset: &str, out: &Path, tol: Option<f64>) -> Result<ReproduceReport> {
    let fixtures = fixtures_for(preset)?;
    let stack = presets::build(preset, &[])?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("fixtures.json"), &fixtures)?;
    let mut stages = Stages {
        stack: &stack,
        d: Direction::new(fixtures.direction.clone())?,
        setup: fixtures.simulation.as_ref(),
        out,
        report: None,
        low: None,
        high: None,
        sim: None,
        gap: None,
        moment_free: None,
    };
    let mut results = Vec::new();
    for f in &fixtures.fixtures {
        let mut f = f.clone();
        if let Some(t) = tol {
            if f.tol > 0.0 {
                f.tol = t;
            }
        }
        let (observed, pass) = match stages.check(&f) {
            Ok(r) => r,
            Err(e) => (format!("error: {e}"), false),
        };
        results.push(FixtureResult {
            id: f.id,
            provenance: f.provenance,
            tol: f.tol,
            expect: f.expect,
            observed,
            pass,
        });
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let report = ReproduceReport {
        preset: preset.to_string(),
        failed: results.len() - passed,
        passed,
        results,
    };
    write_json(&out.join("reproduce.json"), &report)?;
    Ok(report)
}
