//! Pseudospectral solver for `Q(∂_t, ∂_x)u = ±|∂_t^ν u|^p` on a periodic box,
//! stepped by first-order exponential time differencing on the exact linear
//! propagator of each Fourier mode.
//!
//! The blow-up flag is a heuristic (overflow, step-size collapse, or growth by
//! a factor 10⁶); it is not a proof of non-existence.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::decay_theory::{critical_exponent, CriticalExponentReport, Structure};
use crate::expm::{expm, CMatrix};
use crate::fit::fit_loglog;
use crate::spectral_solver::{companion_matrix, pairwise_sum};
use crate::symbol_core::OperatorStack;
use crate::{Error, Result};

/// Relative state change per step above which the step is retried at `dt/2`.
pub const MAX_STEP_CHANGE: f64 = 0.1;
/// Growth of the state norm treated as blow-up.
pub const BLOWUP_GROWTH: f64 = 1e6;
/// Number of halvings of the initial step before the run is declared blown up.
const MAX_HALVINGS: u32 = 24;

/// `[-L, L)^n` with `N` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

impl BoxGrid {
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Per-axis indices of flat index `i`, first axis slowest.
    fn axes(&self, i: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        let mut r = i;
        for a in (0..self.dim).rev() {
            out[a] = r % self.points;
            r /= self.points;
        }
        out
    }

    fn signed(&self, j: usize) -> i64 {
        if j < self.points.div_ceil(2) {
            j as i64
        } else {
            j as i64 - self.points as i64
        }
    }

    pub fn wavevector(&self, i: usize) -> Vec<f64> {
        let dk = std::f64::consts::PI / self.half_width;
        self.axes(i).iter().map(|&j| dk * self.signed(j) as f64).collect()
    }

    pub fn position(&self, i: usize) -> Vec<f64> {
        self.axes(i)
            .iter()
            .map(|&j| -self.half_width + j as f64 * self.dx())
            .collect()
    }

    /// Two-thirds rule: keep modes with every `|j| ≤ N/3`.
    fn keeps(&self, i: usize) -> bool {
        self.axes(i)
            .iter()
            .all(|&j| 3 * self.signed(j).unsigned_abs() as usize <= self.points)
    }

    fn on_edge(&self, i: usize) -> bool {
        self.axes(i).iter().any(|&j| j == 0)
    }

    fn squared_index(&self, i: usize) -> u64 {
        self.axes(i).iter().map(|&j| (self.signed(j) * self.signed(j)) as u64).sum()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::InvalidInput(format!("box dimension must be 1 or 2, got {}", self.dim)));
        }
        if self.points < 4 || self.half_width <= 0.0 {
            return Err(Error::InvalidInput("box needs at least 4 points and a positive width".into()));
        }
        Ok(())
    }
}

/// Gaussian `A e^{-|x|²/(2w²)}` placed in each listed data slot `u_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilinearData {
    pub amplitude: f64,
    pub width: f64,
    pub components: Vec<usize>,
}

impl SemilinearData {
    /// The Gaussian in `u_0` and `u_{m-1}`.
    pub fn standard(m: usize, amplitude: f64, width: f64) -> Self {
        let mut components = vec![0, m - 1];
        components.dedup();
        Self {
            amplitude,
            width,
            components,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilinearConfig {
    pub p: f64,
    /// `+1` or `-1`; `0` switches the nonlinearity off.
    pub sign: f64,
    pub nu: usize,
    pub grid: BoxGrid,
    pub t_end: f64,
    pub dt0: f64,
    pub data: SemilinearData,
}

impl SemilinearConfig {
    /// The same run with `f ≡ 0`.
    pub fn linear_twin(&self) -> Self {
        Self { sign: 0.0, ..self.clone() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub times: Vec<f64>,
    pub l2_u: Vec<f64>,
    pub sup_u: Vec<f64>,
    /// `‖∂_t^ν u‖_{L^∞}`.
    pub sup_nu: Vec<f64>,
    /// Largest ratio of `max |u|` on the box edge to `max |u|` seen so far.
    pub boundary_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Decaying,
    Growing,
    Blowup { t: f64 },
}

/// Per-mode step operators: `Φ(dt)` and the Duhamel column `∫_0^dt e^{As} e_m ds`.
struct StepTable {
    dt: f64,
    entries: Vec<(CMatrix, DVector<Complex64>)>,
    index: Vec<usize>,
}

struct Ffts {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub struct SemilinearRun {
    pub config: SemilinearConfig,
    pub t: f64,
    pub dt: f64,
    /// Mode-major: `state[i * m + r] = ∂_t^r û` at mode `i`.
    pub state: Vec<Complex64>,
    pub diagnostics: Diagnostics,
    pub blowup_flag: bool,
    pub blowup_time: Option<f64>,
    pub critical: Option<CriticalExponentReport>,
    stack: OperatorStack,
    table: Option<StepTable>,
    ffts: Ffts,
    initial_norm: f64,
}

fn fft_nd(buf: &mut [Complex64], grid: &BoxGrid, fft: &Arc<dyn Fft<f64>>) {
    let n = grid.points;
    match grid.dim {
        1 => fft.process(buf),
        _ => {
            for row in buf.chunks_mut(n) {
                fft.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = buf[r * n + c];
                }
                fft.process(&mut col);
                for r in 0..n {
                    buf[r * n + c] = col[r];
                }
            }
        }
    }
}

fn state_norm(y: &[Complex64]) -> f64 {
    let sq: Vec<f64> = y.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq).sqrt()
}

impl SemilinearRun {
    pub fn new(stack: &OperatorStack, config: SemilinearConfig) -> Result<Self> {
        let g = config.grid;
        g.validate()?;
        if stack.dim() != g.dim {
            return Err(Error::DimensionMismatch {
                expected: stack.dim(),
                got: g.dim,
            });
        }
        let m = stack.order();
        if config.p <= 1.0 || ![-1.0, 0.0, 1.0].contains(&config.sign) {
            return Err(Error::InvalidInput("need p > 1 and sign in {-1, 0, 1}".into()));
        }
        if config.nu >= m {
            return Err(Error::InvalidInput(format!("nu = {} must be below m = {m}", config.nu)));
        }
        if config.dt0 <= 0.0 || config.t_end < 0.0 || config.data.width <= 0.0 {
            return Err(Error::InvalidInput("dt0 and width must be positive, t_end non-negative".into()));
        }
        if config.data.components.iter().any(|&j| j >= m) {
            return Err(Error::InvalidInput("data component beyond m - 1".into()));
        }
        let mut planner = FftPlanner::new();
        let ffts = Ffts {
            forward: planner.plan_fft_forward(g.points),
            inverse: planner.plan_fft_inverse(g.points),
        };
        let critical = Structure::from_depth(stack.depth())
            .ok()
            .and_then(|s| critical_exponent(m, s.iota(), config.nu, g.dim).ok());

        let w = config.data.width;
        let mut gauss: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let r2: f64 = g.position(i).iter().map(|x| x * x).sum();
                Complex64::new(config.data.amplitude * (-r2 / (2.0 * w * w)).exp(), 0.0)
            })
            .collect();
        fft_nd(&mut gauss, &g, &ffts.forward);
        let mut state = vec![Complex64::new(0.0, 0.0); g.len() * m];
        for (i, v) in gauss.iter().enumerate() {
            for &j in &config.data.components {
                state[i * m + j] = *v;
            }
        }
        let initial_norm = state_norm(&state);
        let mut run = Self {
            dt: config.dt0,
            config,
            t: 0.0,
            state,
            diagnostics: Diagnostics::default(),
            blowup_flag: false,
            blowup_time: None,
            critical,
            stack: stack.clone(),
            table: None,
            ffts,
            initial_norm,
        };
        run.record();
        Ok(run)
    }

    pub fn order(&self) -> usize {
        self.stack.order()
    }

    fn build_table(&self, dt: f64) -> Result<StepTable> {
        let g = self.config.grid;
        let m = self.order();
        let mut keys: HashMap<u64, usize> = HashMap::new();
        let mut reps = Vec::new();
        let index: Vec<usize> = (0..g.len())
            .map(|i| {
                let key = if self.stack.is_isotropic() { g.squared_index(i) } else { i as u64 };
                *keys.entry(key).or_insert_with(|| {
                    reps.push(i);
                    reps.len() - 1
                })
            })
            .collect();
        let entries = reps
            .par_iter()
            .map(|&i| {
                let a = companion_matrix(&self.stack, &g.wavevector(i))?;
                // exp of [[A, e_m], [0, 0]] dt carries Φ and the Duhamel column.
                let mut aug = DMatrix::from_element(m + 1, m + 1, Complex64::new(0.0, 0.0));
                aug.view_mut((0, 0), (m, m)).copy_from(&(a * Complex64::new(dt, 0.0)));
                aug[(m - 1, m)] = Complex64::new(dt, 0.0);
                let e = expm(&aug);
                Ok((e.view((0, 0), (m, m)).into_owned(), e.view((0, m), (m, 1)).column(0).into_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StepTable { dt, entries, index })
    }

    /// Physical values of `∂_t^r u`.
    pub fn physical(&self, r: usize) -> Vec<f64> {
        let m = self.order();
        let g = self.config.grid;
        let mut buf: Vec<Complex64> = (0..g.len()).map(|i| self.state[i * m + r]).collect();
        fft_nd(&mut buf, &g, &self.ffts.inverse);
        let scale = 1.0 / g.len() as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }

    fn nonlinearity(&self) -> Vec<Complex64> {
        let g = self.config.grid;
        if self.config.sign == 0.0 {
            return vec![Complex64::new(0.0, 0.0); g.len()];
        }
        let u = self.physical(self.config.nu);
        let mut f: Vec<Complex64> = u
            .iter()
            .map(|x| Complex64::new(self.config.sign * x.abs().powf(self.config.p), 0.0))
            .collect();
        fft_nd(&mut f, &g, &self.ffts.forward);
        for (i, z) in f.iter_mut().enumerate() {
            if !g.keeps(i) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        f
    }

    fn advanced(&mut self, dt: f64) -> Result<Vec<Complex64>> {
        if self.table.as_ref().map(|t| t.dt) != Some(dt) {
            self.table = Some(self.build_table(dt)?);
        }
        let f = self.nonlinearity();
        let table = self.table.as_ref().expect("table built above");
        let m = self.order();
        let mut next = vec![Complex64::new(0.0, 0.0); self.state.len()];
        next.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
            let (phi, w) = &table.entries[table.index[i]];
            let y = &self.state[i * m..(i + 1) * m];
            for r in 0..m {
                let mut acc = w[r] * f[i];
                for c in 0..m {
                    acc += phi[(r, c)] * y[c];
                }
                out[r] = acc;
            }
        });
        Ok(next)
    }

    /// One exponential step of size `dt`, without step-size control.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let next = self.advanced(dt)?;
        self.accept(next, dt);
        Ok(())
    }

    fn accept(&mut self, next: Vec<Complex64>, dt: f64) {
        self.state = next;
        self.t += dt;
        if !self.check_blowup() {
            self.record();
        }
    }

    fn check_blowup(&mut self) -> bool {
        let n = state_norm(&self.state);
        if !n.is_finite() || n > BLOWUP_GROWTH * self.initial_norm.max(f64::MIN_POSITIVE) {
            self.flag_blowup();
        }
        self.blowup_flag
    }

    fn flag_blowup(&mut self) {
        self.blowup_flag = true;
        self.blowup_time = Some(self.t);
    }

    fn record(&mut self) {
        let g = self.config.grid;
        let u = self.physical(0);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let l2 = (pairwise_sum(&sq) * g.dx().powi(g.dim as i32)).sqrt();
        let sup = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let sup_nu = if self.config.nu == 0 {
            sup
        } else {
            self.physical(self.config.nu).iter().fold(0.0f64, |a, x| a.max(x.abs()))
        };
        let edge = (0..g.len())
            .filter(|&i| g.on_edge(i))
            .fold(0.0f64, |a, i| a.max(u[i].abs()));
        if sup > 0.0 {
            self.diagnostics.boundary_ratio = self.diagnostics.boundary_ratio.max(edge / sup);
        }
        let d = &mut self.diagnostics;
        d.times.push(self.t);
        d.l2_u.push(l2);
        d.sup_u.push(sup);
        d.sup_nu.push(sup_nu);
    }

    /// Advance to `t_end` with step halving on large relative changes.
    pub fn run(&mut self) -> Result<()> {
        let t_end = self.config.t_end;
        let dt_min = self.config.dt0 / 2f64.powi(MAX_HALVINGS as i32);
        while !self.blowup_flag && self.t < t_end * (1.0 - 1e-14) {
            let dt = self.dt.min(t_end - self.t);
            let next = self.advanced(dt)?;
            let before = state_norm(&self.state);
            let diff: Vec<Complex64> = next.iter().zip(&self.state).map(|(a, b)| a - b).collect();
            let change = if before > 0.0 { state_norm(&diff) / before } else { 0.0 };
            if !change.is_finite() || change > MAX_STEP_CHANGE {
                if self.dt / 2.0 < dt_min {
                    self.flag_blowup();
                    break;
                }
                self.dt /= 2.0;
                continue;
            }
            self.accept(next, dt);
        }
        Ok(())
    }

    /// Growth of `sup |u|` relative to its initial value.
    pub fn growth(&self) -> f64 {
        let s = &self.diagnostics.sup_u;
        let first = s.first().copied().unwrap_or(0.0).max(self.config.data.amplitude.abs());
        if first == 0.0 {
            return 0.0;
        }
        s.last().copied().unwrap_or(0.0) / first
    }

    pub fn verdict(&self) -> Verdict {
        match self.blowup_time {
            Some(t) if self.blowup_flag => Verdict::Blowup { t },
            _ if self.growth() > 10.0 => Verdict::Growing,
            _ => Verdict::Decaying,
        }
    }

    /// Log-log slope of `‖u‖_{L²}` over the second half of the run in `log t`.
    pub fn l2_slope(&self) -> Option<f64> {
        let d = &self.diagnostics;
        let t_last = *d.times.last()?;
        let from = t_last.sqrt().max(1.0);
        let (x, y): (Vec<f64>, Vec<f64>) = d
            .times
            .iter()
            .zip(&d.l2_u)
            .filter(|(t, _)| **t >= from)
            .map(|(t, v)| (*t, *v))
            .unzip();
        fit_loglog(&x, &y).map(|f| f.slope)
    }

    pub fn report(&self) -> SemilinearReport {
        SemilinearReport {
            config: self.config.clone(),
            critical: self.critical.clone(),
            above_critical: self.critical.as_ref().map(|c| self.config.p > c.p_bar),
            verdict: self.verdict(),
            final_t: self.t,
            growth: self.growth(),
            l2_slope: self.l2_slope(),
            boundary_ratio: self.diagnostics.boundary_ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemilinearReport {
    pub config: SemilinearConfig,
    pub critical: Option<CriticalExponentReport>,
    pub above_critical: Option<bool>,
    pub verdict: Verdict,
    pub final_t: f64,
    pub growth: f64,
    pub l2_slope: Option<f64>,
    pub boundary_ratio: f64,
}

/// Build and run to `t_end`; a blow-up ends the run cleanly with partial series.
pub fn run_semilinear(stack: &OperatorStack, config: SemilinearConfig) -> Result<SemilinearRun> {
    let mut run = SemilinearRun::new(stack, config)?;
    run.run()?;
    Ok(run)
}
