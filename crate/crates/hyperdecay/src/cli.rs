//! Command-line front end. Every command writes a JSON report (and CSV series
//! where there is one) into `--out`.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 not stable or
//! fixture mismatch, 3 inconclusive stability.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::Regime;
use crate::decay_theory::{predict_decay, DecayQuery};
use crate::fixtures::{expansion_report, reproduce, write_series};
use crate::model::load_model;
use crate::output::{write_csv, write_json};
use crate::presets;
use crate::profiles::{profile_gap_series, ProfileKind};
use crate::rootkit::log_grid;
use crate::semilinear::{run_semilinear, BoxGrid, SemilinearConfig, SemilinearData};
use crate::spectral_solver::{simulate, DataSpec, QuadratureGrid};
use crate::sphere::samples_for;
use crate::stability::{classify, Verdict};
use crate::symbol_core::{Direction, OperatorStack};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hyperdecay", version, about = "Stability, root asymptotics and decay rates of dissipative higher-order hyperbolic equations")]
pub struct Cli {
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Replace the numeric tolerance of every fixture checked by `reproduce`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Preset name or path to a JSON model file.
    pub model: String,
    /// Preset parameter override, e.g. `--set b=0.5`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 1e2)]
    pub rho_max: f64,
    /// Radial quadrature points.
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    #[arg(long, default_value_t = 1e2)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1e4)]
    pub tmax: f64,
    /// Log-spaced output times.
    #[arg(long, default_value_t = 25)]
    pub times: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hyperbolicity, interlacing and strict stability.
    Classify(ModelArgs),
    /// Low- or high-frequency root expansions along a direction.
    Asymptotics {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "low")]
        regime: String,
        /// Comma-separated direction, normalized; defaults to the first axis.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
    },
    /// Predicted decay exponent of `‖∂_t^k u‖_{Ḣ^s}` for L^q data.
    Predict {
        #[command(flatten)]
        model: ModelArgs,
        /// Dimension; defaults to the model's.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long)]
        moment_zero: bool,
    },
    /// Norm time series of the exact solution.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// JSON data file; defaults to a unit Gaussian in `u_{m-1}`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Solution and solution-minus-profile norm series.
    Profile {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// V, W, V_WEAK, W_WEAK or PRESET_CLOSED_FORM; chosen from the model by default.
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Power nonlinearity `±|∂_t^ν u|^p` on a periodic box.
    Semilinear {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p: f64,
        /// +1, -1, or 0 for the linear run.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sign: f64,
        #[arg(long, default_value_t = 0)]
        nu: usize,
        #[arg(long, default_value_t = 1e-3)]
        amplitude: f64,
        #[arg(long, default_value_t = 2.0)]
        width: f64,
        #[arg(long = "T", default_value_t = 50.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 128)]
        points: usize,
        #[arg(long, default_value_t = 40.0)]
        half_width: f64,
    },
    /// Run classify, asymptotics, simulate and profile on a preset and check its fixtures.
    Reproduce {
        preset: String,
    },
}

fn parse_overrides(set: &[String]) -> Result<Vec<(String, f64)>> {
    set.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected NAME=VALUE, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad number in `{kv}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn load(args: &ModelArgs) -> Result<OperatorStack> {
    if args.set.is_empty() {
        return load_model(&args.model);
    }
    if !presets::is_preset(&args.model) {
        return Err(Error::InvalidInput("--set applies to preset names only".into()));
    }
    let o = parse_overrides(&args.set)?;
    let refs: Vec<(&str, f64)> = o.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    presets::build(&args.model, &refs)
}

fn load_data(path: &Option<PathBuf>, stack: &OperatorStack) -> Result<DataSpec> {
    match path {
        Some(p) => {
            let d: DataSpec = serde_json::from_str(&std::fs::read_to_string(p)?)
                .map_err(|e| Error::InvalidInput(format!("data file: {e}")))?;
            d.check(stack.order())?;
            Ok(d)
        }
        None => Ok(DataSpec::top_gaussian(stack.order(), 1.0, 1.0)),
    }
}

fn parse_direction(text: &Option<String>, dim: usize) -> Result<Direction> {
    match text {
        None => Ok(Direction::axis(dim, 0)),
        Some(t) => {
            let v = t
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidInput(format!("bad direction `{t}`")))?;
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            Direction::normalized(&v)
        }
    }
}

fn grid_for(stack: &OperatorStack, g: &GridArgs) -> Result<(QuadratureGrid, Vec<f64>)> {
    if !(g.tmin > 0.0 && g.tmax > g.tmin && g.times >= 2) {
        return Err(Error::InvalidInput("need 0 < tmin < tmax and at least two times".into()));
    }
    Ok((
        QuadratureGrid::for_stack(stack, g.rho_min, g.rho_max, g.points)?,
        log_grid(g.tmin, g.tmax, g.times),
    ))
}

fn parse_kind(text: &Option<String>) -> Result<Option<ProfileKind>> {
    text.as_ref()
        .map(|k| {
            serde_json::from_value(serde_json::Value::String(k.to_ascii_uppercase()))
                .map_err(|_| Error::InvalidInput(format!("unknown profile kind `{k}`")))
        })
        .transpose()
}

#[derive(Serialize)]
struct SlopeSummary {
    solution_slope: Option<f64>,
    gap_slope: Option<f64>,
    improvement: Option<f64>,
    moment: f64,
    kind: ProfileKind,
}

fn execute(cli: &Cli) -> Result<i32> {
    let out = cli.out.as_path();
    std::fs::create_dir_all(out)?;
    match &cli.command {
        Command::Classify(m) => {
            let stack = load(m)?;
            let r = classify(&stack, &samples_for(stack.dim(), stack.is_isotropic()))?;
            write_json(&out.join("classify.json"), &r)?;
            println!(
                "{}: hyperbolicity {:?}, high {:?}, low {:?}, abscissa max {:.3e}, verdict {:?}",
                r.model,
                r.hyperbolicity,
                r.interlacing_high.as_ref().map(|c| c.kind),
                r.interlacing_low.as_ref().map(|c| c.kind),
                r.abscissa_max,
                r.verdict
            );
            Ok(match r.verdict {
                Verdict::Stable => 0,
                Verdict::NotStable => 2,
                Verdict::Inconclusive => 3,
            })
        }
        Command::Asymptotics { model, regime, direction } => {
            let stack = load(model)?;
            let regime: Regime = regime.parse()?;
            let d = parse_direction(direction, stack.dim())?;
            let r = expansion_report(&stack, &d, regime)?;
            let rows: Vec<Vec<f64>> = r
                .records
                .iter()
                .flat_map(|rec| {
                    rec.terms
                        .iter()
                        .map(move |t| vec![rec.branch as f64, t.power as f64, t.coeff.re, t.coeff.im])
                })
                .collect();
            write_csv(&out.join("asymptotics.csv"), "branch,power,re,im", &rows)?;
            write_json(&out.join("asymptotics.json"), &r)?;
            for (rec, fit) in r.records.iter().zip(&r.fits) {
                println!(
                    "branch {} {:?}: {} terms, remainder order {:.3}{}",
                    rec.branch,
                    rec.case,
                    rec.terms.len(),
                    fit.fitted_order,
                    if fit.consistent { "" } else { " (inconsistent)" }
                );
            }
            Ok(0)
        }
        Command::Predict { model, n, q, k, s, moment_zero } => {
            let stack = load(model)?;
            let r = classify(&stack, &samples_for(stack.dim(), stack.is_isotropic()))?;
            let mut query = DecayQuery::new(n.unwrap_or(stack.dim()), *q, *k, *s);
            query.moment_zero = *moment_zero;
            let p = predict_decay(&r, &query)?;
            write_json(&out.join("predict.json"), &p)?;
            println!("exponent {} ({:?})", p.exponent, p.regime_note);
            if !p.constraint_ok {
                eprintln!(
                    "warning: constraint violated: {}",
                    p.violated_constraint.as_deref().unwrap_or("unknown")
                );
            }
            Ok(0)
        }
        Command::Simulate { model, data, k, s, grid } => {
            let stack = load(model)?;
            let data = load_data(data, &stack)?;
            let (q, times) = grid_for(&stack, grid)?;
            let r = simulate(&stack, &data, &times, *k, *s, &q, None)?;
            write_series(out, "simulate", &r)?;
            println!("fitted slope {:?} ± {:?}", r.fitted_slope, r.slope_stderr);
            Ok(0)
        }
        Command::Profile { model, data, k, s, kind, grid } => {
            let stack = load(model)?;
            let data = load_data(data, &stack)?;
            let (q, times) = grid_for(&stack, grid)?;
            let g = profile_gap_series(&stack, &data, &times, *k, *s, &q, parse_kind(kind)?)?;
            write_series(out, "profile_solution", &g.solution)?;
            write_series(out, "profile_gap", &g.gap)?;
            let summary = SlopeSummary {
                solution_slope: g.solution.fitted_slope,
                gap_slope: g.gap.fitted_slope,
                improvement: g.improvement(),
                moment: g.moment,
                kind: g.kind,
            };
            write_json(&out.join("profile.json"), &summary)?;
            println!(
                "solution slope {:?}, gap slope {:?}, improvement {:?}",
                summary.solution_slope, summary.gap_slope, summary.improvement
            );
            Ok(0)
        }
        Command::Semilinear {
            model,
            p,
            sign,
            nu,
            amplitude,
            width,
            t_end,
            dt,
            points,
            half_width,
        } => {
            let stack = load(model)?;
            let config = SemilinearConfig {
                p: *p,
                sign: *sign,
                nu: *nu,
                grid: BoxGrid {
                    dim: stack.dim(),
                    points: *points,
                    half_width: *half_width,
                },
                t_end: *t_end,
                dt0: *dt,
                data: SemilinearData::standard(stack.order(), *amplitude, *width),
            };
            let run = run_semilinear(&stack, config)?;
            let d = &run.diagnostics;
            let rows: Vec<Vec<f64>> = (0..d.times.len())
                .map(|i| vec![d.times[i], d.l2_u[i], d.sup_u[i], d.sup_nu[i]])
                .collect();
            write_csv(&out.join("semilinear.csv"), "t,l2_u,sup_u,sup_nu", &rows)?;
            let report = run.report();
            write_json(&out.join("semilinear.json"), &report)?;
            println!("{:?}, growth {:.3e}", report.verdict, report.growth);
            Ok(0)
        }
        Command::Reproduce { preset } => reproduce_command(preset, out, cli.tol),
    }
}

fn reproduce_command(preset: &str, out: &Path, tol: Option<f64>) -> Result<i32> {
    let r = reproduce(preset, &out.join(preset), tol)?;
    for x in &r.results {
        println!(
            "{} [{}] {}: {}",
            if x.pass { "PASS" } else { "FAIL" },
            serde_json::to_value(x.provenance)?.as_str().unwrap_or(""),
            x.id,
            x.observed
        );
    }
    println!("{}: {} passed, {} failed", r.preset, r.passed, r.failed);
    Ok(if r.all_pass() { 0 } else { 2 })
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
