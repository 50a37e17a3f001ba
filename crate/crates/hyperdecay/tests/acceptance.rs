//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::time::Instant;

use hyperdecay::decay_theory::critical_exponent;
use hyperdecay::fixtures::{reproduce, Expect, FixtureResult};
use hyperdecay::presets::{self, example_ell3_condition};
use hyperdecay::rootkit::{log_grid, min_gap, roots, spectral_abscissa};
use hyperdecay::semilinear::{run_semilinear, BoxGrid, SemilinearConfig, SemilinearData, Verdict};
use hyperdecay::spectral_solver::{simulate, DataSpec, ModePropagator, QuadratureGrid, CONFLUENCE_GAP};
use hyperdecay::sphere::samples_for;
use hyperdecay::stability::{classify, InterlaceKind, StabilityReport};
use hyperdecay::symbol_core::{Direction, HomogeneousSymbol, OperatorStack};
use hyperdecay::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn report(st: &OperatorStack) -> StabilityReport {
    classify(st, &samples_for(st.dim(), st.is_isotropic())).unwrap()
}

fn stability_sweeps() -> Outcome {
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut bad = Vec::new();
    let mut weak_at_zero = true;
    for &b in &grid {
        for tau in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let r = report(&presets::build("mgt", &[("b", b), ("tau", tau)]).unwrap());
            if r.strictly_stable != (b > 0.0) {
                bad.push(format!("mgt b={b} tau={tau}"));
            }
            if b == 0.0 {
                weak_at_zero &= r.interlacing_high.as_ref().map(|c| c.kind) == Some(InterlaceKind::Weak);
            }
        }
        for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let r = report(&presets::build("blackstock_crighton", &[("b", b), ("a", a)]).unwrap());
            if r.strictly_stable != (b > 0.0) {
                bad.push(format!("bc b={b} a={a}"));
            }
        }
    }
    for c1 in [0.5, 1.0, 1.5, 2.0, 2.5] {
        for b in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let st = presets::build("example_ell3", &[("c1", c1), ("b", b)]).unwrap();
            let want = example_ell3_condition(1.0, b, c1, 2.0, 1.0);
            if report(&st).strictly_stable != want {
                bad.push(format!("ell3 c1={c1} b={b}"));
            }
        }
    }
    outcome(
        bad.is_empty() && weak_at_zero,
        format!("75 cases, mismatches {bad:?}, mgt b=0 WEAK: {weak_at_zero}"),
    )
}

/// Radial symbol in one dimension with the given roots and leading coefficient.
fn from_roots(order: usize, lead: f64, r: &[f64]) -> HomogeneousSymbol {
    let mut c = vec![lead];
    for &x in r {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= x * ci;
        }
        c = next;
    }
    // c[i] multiplies λ^{order-i}.
    let mut s = HomogeneousSymbol::new(order, 1);
    for (i, &ci) in c.iter().enumerate() {
        s.add_term(order - i, &[i as u32], ci).unwrap();
    }
    s
}

fn interlaced(rng: &mut ChaCha8Rng, outer: &[f64]) -> Vec<f64> {
    outer
        .windows(2)
        .map(|w| w[0] + rng.gen_range(0.15..0.85) * (w[1] - w[0]))
        .collect()
}

fn sorted_roots(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    loop {
        let mut r: Vec<f64> = (0..count).map(|_| rng.gen_range(-3.0..3.0)).collect();
        r.sort_by(f64::total_cmp);
        if r.windows(2).all(|w| w[1] - w[0] > 0.2) {
            return r;
        }
    }
}

/// Interlacing chains with positive leading coefficients, perturbed half the
/// time so that stable and unstable cases both occur. `None` when the draw
/// is not a valid stack.
fn random_stack(rng: &mut ChaCha8Rng) -> Option<OperatorStack> {
    let depth = rng.gen_range(1..=2usize);
    let m = rng.gen_range(depth + 1..=4);
    let a = sorted_roots(rng, m);
    let mut b = interlaced(rng, &a);
    let mut lead1 = rng.gen_range(0.3..2.0);
    let perturb = rng.gen_bool(0.5);
    if perturb {
        match rng.gen_range(0..3) {
            0 => lead1 = -lead1,
            1 if b.len() >= 2 => {
                let last = b.len() - 1;
                b[last] = b[last - 1] + 0.01;
            }
            _ => {
                let i = rng.gen_range(0..b.len());
                b[i] = a[a.len() - 1] + 0.5;
                b.sort_by(f64::total_cmp);
            }
        }
    }
    let mut syms = vec![from_roots(m, 1.0, &a), from_roots(m - 1, lead1, &b)];
    if depth == 2 {
        let c = if b.len() >= 2 { interlaced(rng, &b) } else { Vec::new() };
        let lead2 = rng.gen_range(0.05..1.5) * lead1.abs();
        syms.push(from_roots(m - 2, lead2, &c));
    }
    OperatorStack::new("random", syms).ok()
}

/// Abscissa over both directions on a grid denser than the one inside `classify`.
fn dense_abscissa_stable(st: &OperatorStack) -> bool {
    let radii = log_grid(1e-3, 1e3, 121);
    [1.0, -1.0].iter().all(|&s| {
        radii
            .iter()
            .all(|&r| spectral_abscissa(st, &[s * r]).map_or(false, |a| a < 0.0))
    })
}

fn hermite_biehler_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut stable, mut unstable) = (0, 0);
    let mut mismatches = 0;
    let mut logged = Vec::new();
    let mut tries = 0;
    while (stable < 200 || unstable < 200) && tries < 20_000 {
        tries += 1;
        let Some(st) = random_stack(&mut rng) else {
            continue;
        };
        let Ok(r) = classify(&st, &samples_for(1, false)) else {
            continue;
        };
        let truth = dense_abscissa_stable(&st);
        if (truth && stable >= 200) || (!truth && unstable >= 200) {
            continue;
        }
        if truth {
            stable += 1;
        } else {
            unstable += 1;
        }
        if r.lemma_condition != truth {
            let margin = [&r.interlacing_high, &r.interlacing_low]
                .iter()
                .filter_map(|c| c.as_ref().map(|c| c.margin.abs()))
                .fold(f64::INFINITY, f64::min);
            if margin < 1e-8 {
                logged.push(format!("margin {margin:.1e}"));
            } else {
                mismatches += 1;
            }
        }
    }
    outcome(
        stable == 200 && unstable == 200 && mismatches == 0,
        format!("{stable} stable, {unstable} not stable, {mismatches} mismatches, {} near-degenerate logged {logged:?}", logged.len()),
    )
}

fn fixtures_of(preset: &str, dir: &Path) -> Vec<FixtureResult> {
    reproduce(preset, &dir.join(preset), None).unwrap().results
}

fn root_asymptotics(dir: &Path) -> Outcome {
    let mut checked = 0;
    let mut failed = Vec::new();
    for p in [
        "mgt",
        "blackstock_crighton",
        "em_elastic",
        "em_elastic_dissipative",
        "mgt_classical_damping",
        "fourth_order_weak",
        "anisotropic_elastic_2d",
    ] {
        for r in fixtures_of(p, dir) {
            if matches!(
                r.expect,
                Expect::Branch { .. } | Expect::Kappa { .. } | Expect::RemaindersConsistent { .. }
            ) {
                checked += 1;
                if !r.pass {
                    failed.push(format!("{p}: {} ({})", r.id, r.observed));
                }
            }
        }
    }
    outcome(failed.is_empty(), format!("{checked} coefficient and remainder fixtures, failures {failed:?}"))
}

fn degenerate_regimes(dir: &Path) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for p in ["mgt_classical_damping", "fourth_order_weak"] {
        for r in fixtures_of(p, dir) {
            if matches!(r.expect, Expect::ReSlope { .. }) {
                pass &= r.pass;
                lines.push(format!("{p}: {}", r.observed));
            }
        }
    }
    outcome(pass && lines.len() == 2, lines.join("; "))
}

fn slope(preset: &str, k: usize, s: f64) -> Option<f64> {
    let st = presets::build(preset, &[]).unwrap();
    let grid = QuadratureGrid::for_stack(&st, 1e-4, 1e2, 4096).unwrap();
    let data = DataSpec::top_gaussian(st.order(), 1.0, 1.0);
    simulate(&st, &data, &log_grid(1e2, 1e4, 25), k, s, &grid, None)
        .unwrap()
        .fitted_slope
}

fn decay_rates() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let mgt = slope("mgt", 0, 0.0);
    pass &= mgt.is_some_and(|v| (v + 0.25).abs() <= 0.05);
    lines.push(format!("mgt {mgt:?}"));
    for (k, s) in [(0, 2.0), (1, 1.0), (2, 0.0)] {
        let v = slope("em_elastic", k, s);
        pass &= v.is_some_and(|v| (v + 0.75).abs() <= 0.07);
        lines.push(format!("em_elastic k={k} s={s}: {v:?}"));
    }
    outcome(pass, lines.join("; "))
}

fn profile_gaps(dir: &Path) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for p in ["mgt", "blackstock_crighton"] {
        for r in fixtures_of(p, dir) {
            if matches!(r.expect, Expect::GapImprovement { .. } | Expect::MomentFreeGain { .. }) {
                pass &= r.pass;
                lines.push(format!("{p} {}: {}", r.id, r.observed));
            }
        }
    }
    outcome(pass && lines.len() == 4, lines.join("; "))
}

fn propagator_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let names = ["mgt", "blackstock_crighton", "em_elastic", "fourth_order_weak", "anisotropic_elastic_2d", "damped_wave"];
    let stacks: Vec<OperatorStack> = names.iter().map(|n| presets::build(n, &[]).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let st = &stacks[rng.gen_range(0..stacks.len())];
        let raw: Vec<f64> = (0..st.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let Ok(d) = Direction::normalized(&raw) else { continue };
        let xi = d.scaled(10f64.powf(rng.gen_range(-2.0..1.5)));
        let lambda = roots(&st.full_symbol_at(&xi).unwrap()).unwrap();
        let scale = 1.0 + lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if min_gap(&lambda) < CONFLUENCE_GAP * scale {
            continue;
        }
        let data: Vec<Complex64> = (0..st.order())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let t = rng.gen_range(0.0..20.0);
        let a = ModePropagator::lagrange(st, &xi, &data).unwrap();
        let b = ModePropagator::companion(st, &xi, &data).unwrap();
        let (mut diff, mut norm) = (0.0, 0.0);
        for k in 0..st.order() {
            diff += (a.value(t, k) - b.value(t, k)).norm_sqr();
            norm += b.value(t, k).norm_sqr();
        }
        worst = worst.max((diff / norm).sqrt());
        checked += 1;
    }
    let dw = presets::build("damped_wave", &[]).unwrap();
    let c = |x: f64| Complex64::new(x, 0.0);
    let got = ModePropagator::new(&dw, &[0.3], &[c(1.0), c(0.0)]).unwrap().value(1.0, 0).re;
    let want = 1.125 * (-0.1f64).exp() - 0.125 * (-0.9f64).exp();
    let dw_err = (got - want).abs();
    let mgt = presets::build("mgt", &[]).unwrap();
    let p0 = ModePropagator::new(&mgt, &[0.0, 0.0, 0.0], &[c(0.0), c(0.0), c(1.0)]).unwrap();
    let mgt_err = [0.5, 1.0, 3.0, 10.0]
        .iter()
        .map(|&t| (p0.value(t, 0).re - (t - 1.0 + (-t as f64).exp())).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && dw_err <= 1e-10 && mgt_err <= 1e-10,
        format!("1000 samples worst rel {worst:.2e}; damped wave err {dw_err:.1e}; mgt xi=0 err {mgt_err:.1e}"),
    )
}

fn semilinear_config(p: f64, amplitude: f64, t_end: f64) -> SemilinearConfig {
    SemilinearConfig {
        p,
        sign: 1.0,
        nu: 0,
        grid: BoxGrid {
            dim: 2,
            points: 64,
            half_width: 30.0,
        },
        t_end,
        dt0: 0.05,
        data: SemilinearData::standard(3, amplitude, 2.0),
    }
}

fn critical_exponents() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let table = [(3, 0, 0, 3, 2.5), (3, 1, 0, 1, 3.0)];
    for (m, iota, nu, n, want) in table {
        let got = critical_exponent(m, iota, nu, n).unwrap().p_bar;
        pass &= got == want;
    }
    for m in 3..=6 {
        for n in 1..=3 {
            let got = critical_exponent(m, 0, m - 2, n).unwrap().p_bar;
            pass &= got == 1.0 + 2.0 / n as f64;
        }
    }
    lines.push(format!("table exact: {pass}"));
    let st = presets::build("mgt", &[("n", 2.0)]).unwrap();
    let cfg = semilinear_config(5.0, 1e-3, 50.0);
    let lin = run_semilinear(&st, cfg.linear_twin()).unwrap();
    let non = run_semilinear(&st, cfg).unwrap();
    let p_bar = non.critical.as_ref().map(|c| c.p_bar);
    let ratio = non.diagnostics.sup_u.last().unwrap() / lin.diagnostics.sup_u.last().unwrap();
    pass &= p_bar == Some(4.0) && (0.5..=2.0).contains(&ratio);
    lines.push(format!("p_bar {p_bar:?}; p=5 sup ratio to linear at t=50: {ratio:.6}"));
    let big = run_semilinear(&st, semilinear_config(2.0, 1.0, 100.0)).unwrap();
    let grows = big.growth() > 10.0 || matches!(big.verdict(), Verdict::Blowup { .. });
    pass &= grows;
    lines.push(format!("p=2 amplitude 1: {:?}, growth {:.3e}", big.verdict(), big.growth()));
    outcome(pass, lines.join("; "))
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    reproduce("mgt", a.path(), None).unwrap();
    reproduce("mgt", b.path(), None).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let same = names
        .iter()
        .all(|n| std::fs::read(a.path().join(n)).unwrap() == std::fs::read(b.path().join(n)).unwrap());
    outcome(same && !names.is_empty(), format!("{} files compared", names.len()))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("stability fixtures", Box::new(stability_sweeps)),
        ("Hermite-Biehler cross-validation", Box::new(hermite_biehler_cross_validation)),
        ("root asymptotics", Box::new(|| root_asymptotics(dir.path()))),
        ("degenerate regimes", Box::new(|| degenerate_regimes(dir.path()))),
        ("decay-rate reproduction", Box::new(decay_rates)),
        ("profile-gap improvement", Box::new(|| profile_gaps(dir.path()))),
        ("propagator oracles", Box::new(propagator_oracles)),
        ("critical exponent", Box::new(critical_exponents)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "{} {}. {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
