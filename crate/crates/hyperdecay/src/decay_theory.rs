//! Predicted decay rates of `‖∂_t^k u(t)‖_{Ḣ^s}` and the critical exponent of
//! the power nonlinearity.

use serde::Serialize;

use crate::stability::{ScenarioFlag, StabilityReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Structure {
    Q1,
    Q2,
}

impl Structure {
    pub fn from_depth(depth: usize) -> Result<Self> {
        match depth {
            1 => Ok(Structure::Q1),
            2 => Ok(Structure::Q2),
            _ => Err(Error::InvalidInput(format!("no decay estimate for stack depth {depth}"))),
        }
    }

    pub fn iota(self) -> usize {
        match self {
            Structure::Q1 => 0,
            Structure::Q2 => 1,
        }
    }
}

/// Which estimate produced a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// Strict interlacing, one lower-order operator.
    EstQ1,
    /// Strict interlacing, two lower-order operators.
    EstQ2,
    /// Some simple root of `P_{m-2}` shared with `P_{m-1}`: quarter powers.
    EstQ2Strict,
    /// Double roots of `P_{m-2}`: loses `(1+t)^{1/2}`.
    EstQ2Strong,
    /// Both low-frequency degeneracies: the smaller of the two rates.
    EstQ2Worst,
    /// Shared simple root of `P_m` and `P_{m-1}`: regularity-loss decay.
    EstQ2Loss,
    /// Double root of `P_m`: exponential decay with one derivative lost.
    EstQ2RegLoss,
    /// Vanishing moment improvement.
    M0Improved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayQuery {
    pub n: usize,
    pub q: f64,
    pub k: usize,
    pub s: f64,
    /// Defaults to the one matching the stack depth.
    pub structure: Option<Structure>,
    pub moment_zero: bool,
    /// Extra regularity traded for decay when high frequencies lose damping.
    pub nu: f64,
    /// Which of `u_0, …, u_{m-1}` are nonzero; all when `None`.
    pub data: Option<Vec<bool>>,
}

impl DecayQuery {
    pub fn new(n: usize, q: f64, k: usize, s: f64) -> Self {
        Self {
            n,
            q,
            k,
            s,
            structure: None,
            moment_zero: false,
            nu: 2.0,
            data: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayPrediction {
    /// Power of `(1+t)`; negative means decay. The slowest rate over the data present.
    pub exponent: f64,
    /// Exponent attached to `u_j`, `j = 0..m-1`.
    pub per_datum_exponents: Vec<f64>,
    pub constraint_ok: bool,
    pub violated_constraint: Option<String>,
    /// Derivatives of extra data regularity the estimate requires.
    pub regularity_loss: f64,
    /// Low-frequency estimate first, then any high-frequency modifier.
    pub regime_note: Vec<Estimate>,
    /// Data classes the selected estimates assume.
    pub data_requirements: Vec<String>,
}

fn check_q(q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::InvalidInput(format!("q must lie in [1, 2], got {q}")));
    }
    Ok(())
}

/// `n(1/q − 1/2) + k + s > floor` (or `k + s ≥ floor` when `q = 2`).
fn admissible(n: usize, q: f64, ks: f64, floor: f64) -> Option<String> {
    if q == 2.0 {
        (ks < floor).then(|| format!("k+s >= {floor} (q = 2)"))
    } else {
        let lhs = n as f64 * (1.0 / q - 0.5) + ks;
        (lhs <= floor).then(|| format!("n(1/q-1/2)+k+s > {floor}"))
    }
}

pub fn predict_decay(report: &StabilityReport, query: &DecayQuery) -> Result<DecayPrediction> {
    if !report.strictly_stable {
        return Err(Error::InvalidInput(format!("model `{}` is not strictly stable", report.model)));
    }
    check_q(query.q)?;
    if query.nu < 0.0 || !query.nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be non-negative, got {}", query.nu)));
    }
    let depth_structure = Structure::from_depth(report.depth)?;
    let structure = query.structure.unwrap_or(depth_structure);
    if structure != depth_structure {
        return Err(Error::InvalidInput(format!(
            "{structure:?} requested for a depth-{} stack",
            report.depth
        )));
    }
    let m = report.order as f64;
    let n = query.n as f64;
    let ks = query.k as f64 + query.s;
    let half = n / 2.0 * (1.0 / query.q - 0.5);
    let quarter = half / 2.0;
    let flags = &report.scenario_flags;
    let has = |f: ScenarioFlag| flags.contains(&f);
    let order = report.order;
    let mut requirements = Vec::new();

    // `top` applies to u_{m-2}, u_{m-1} (Q1) or u_{m-3..m-1} (Q2); `rest(j)` below.
    let (low_note, top, rest, floor): (Estimate, f64, Box<dyn Fn(f64) -> f64>, f64) = match structure {
        Structure::Q1 => (
            Estimate::EstQ1,
            -half - (ks - (m - 2.0)) / 2.0,
            Box::new(move |j| -half - (ks - j) / 2.0),
            m - 2.0,
        ),
        Structure::Q2 => {
            let strict = -quarter - (ks - (m - 3.0)) / 4.0;
            let strong = -half - (ks - (m - 2.0)) / 2.0;
            let (note, top, rest): (_, _, Box<dyn Fn(f64) -> f64>) =
                match (has(ScenarioFlag::SlowLow), has(ScenarioFlag::DecayLoss)) {
                    (false, false) => (
                        Estimate::EstQ2,
                        -half - (ks - (m - 3.0)) / 2.0,
                        Box::new(move |j| -half - (ks - j) / 2.0),
                    ),
                    (true, false) => (Estimate::EstQ2Strict, strict, Box::new(move |j| -quarter - (ks - j) / 4.0)),
                    (false, true) => (Estimate::EstQ2Strong, strong, Box::new(move |j| -half - (ks - j - 1.0) / 2.0)),
                    (true, true) => (
                        Estimate::EstQ2Worst,
                        -worst_eta(query.n, query.q, ks, order),
                        Box::new(move |j| -quarter - (ks - j) / 4.0),
                    ),
                };
            if note != Estimate::EstQ2 {
                requirements.push("L^q ∩ L^2 data with compactly supported Fourier transform".to_string());
            }
            (note, top, rest, m - 3.0)
        }
    };
    let mut notes = vec![low_note];
    let top_from = order.saturating_sub(2 + structure.iota());
    let mut per: Vec<f64> = (0..order)
        .map(|j| if j >= top_from { top } else { rest(j as f64) })
        .collect();
    let mut violated = admissible(query.n, query.q, ks, floor);

    if query.moment_zero {
        let plain = matches!(low_note, Estimate::EstQ1 | Estimate::EstQ2);
        if plain && query.q == 1.0 {
            let shifted_floor = floor - 1.0;
            for (j, e) in per.iter_mut().enumerate() {
                if j >= top_from {
                    *e = -n / 4.0 - (ks - shifted_floor) / 2.0;
                }
            }
            violated = (n / 2.0 + ks <= shifted_floor).then(|| format!("n/2+k+s > {shifted_floor}"));
            notes.push(Estimate::M0Improved);
            requirements.push("L^{1,1} data for the top components".to_string());
        } else {
            requirements.push("vanishing moment ignored: needs q = 1 and strict low-frequency interlacing".into());
        }
    }

    let mut regularity_loss = 0.0;
    let reg_loss_decay = has(ScenarioFlag::RegLossDecay);
    let derivative_loss = has(ScenarioFlag::DerivativeLoss);
    if reg_loss_decay {
        let nu = if derivative_loss { query.nu.max(1.0) } else { query.nu };
        regularity_loss = nu;
        for e in per.iter_mut() {
            *e = e.max(-nu / 2.0);
        }
        notes.push(Estimate::EstQ2Loss);
        requirements.push(format!("H^(k+s+{nu}-j) data"));
    } else if derivative_loss {
        regularity_loss = 1.0;
        notes.push(Estimate::EstQ2RegLoss);
        requirements.push("H^(k+s+1-j) data".to_string());
    }
    if derivative_loss {
        requirements.push("H^∞ data (well-posedness only in H^∞)".to_string());
    }

    let present = query.data.clone().unwrap_or_else(|| vec![true; order]);
    if present.len() != order {
        return Err(Error::DimensionMismatch {
            expected: order,
            got: present.len(),
        });
    }
    let exponent = per
        .iter()
        .zip(&present)
        .filter(|(_, p)| **p)
        .map(|(e, _)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayPrediction {
        exponent,
        per_datum_exponents: per,
        constraint_ok: violated.is_none(),
        violated_constraint: violated,
        regularity_loss,
        regime_note: notes,
        data_requirements: requirements,
    })
}

/// `η = min{ n/4(1/q−1/2) + (k+s−(m−3))/4, n/2(1/q−1/2) + (k+s−(m−2))/2 }`.
pub fn worst_eta(n: usize, q: f64, ks: f64, m: usize) -> f64 {
    let (strict, strong) = worst_eta_branches(n, q, ks, m);
    strict.min(strong)
}

/// The two candidates of [`worst_eta`], quarter-power branch first.
pub fn worst_eta_branches(n: usize, q: f64, ks: f64, m: usize) -> (f64, f64) {
    let h = n as f64 / 2.0 * (1.0 / q - 0.5);
    let m = m as f64;
    (h / 2.0 + (ks - (m - 3.0)) / 4.0, h + (ks - (m - 2.0)) / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalExponentReport {
    pub p_bar: f64,
    /// Integer dimensions `n` with `m−2−ι−ν < n ≤ 2(m−1−ι−ν)`.
    pub admissible_n: (usize, usize),
    pub n_admissible: bool,
    pub iota: usize,
    pub nu: usize,
}

/// `p̄ = 1 + (m−ι−ν) / (n − (m−2−ι−ν))`.
pub fn critical_exponent(m: usize, iota: usize, nu: usize, n: usize) -> Result<CriticalExponentReport> {
    if iota > 1 {
        return Err(Error::InvalidInput(format!("iota must be 0 or 1, got {iota}")));
    }
    if m < 2 || nu > m - 2 {
        return Err(Error::InvalidInput(format!("need 0 <= nu <= m-2, got nu = {nu}, m = {m}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let base = m as i64 - 2 - iota as i64 - nu as i64;
    let lo = (base + 1).max(1) as usize;
    let hi = (2 * (base + 1)).max(0) as usize;
    let denom = n as f64 - base as f64;
    if denom <= 0.0 {
        return Err(Error::InvalidInput(format!("n = {n} must exceed m-2-iota-nu = {base}")));
    }
    let p_bar = 1.0 + (m - iota - nu) as f64 / denom;
    Ok(CriticalExponentReport {
        p_bar,
        admissible_n: (lo, hi),
        n_admissible: lo <= n && n <= hi,
        iota,
        nu,
    })
}
