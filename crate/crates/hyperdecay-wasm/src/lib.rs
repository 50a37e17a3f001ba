//! Browser bindings: root branches along a ray, a decay curve with its fitted
//! slope, and a two-parameter stability map. Each call takes a preset name
//! and a JSON object of parameter overrides and returns JSON.

use hyperdecay::presets;
use hyperdecay::rootkit::{log_grid, track_branches};
use hyperdecay::spectral_solver::{simulate, DataSpec, QuadratureGrid};
use hyperdecay::sphere::samples_for;
use hyperdecay::stability::classify;
use hyperdecay::symbol_core::{Direction, OperatorStack};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn build(preset: &str, params: &str) -> Result<OperatorStack, String> {
    let map: std::collections::BTreeMap<String, f64> = if params.trim().is_empty() {
        Default::default()
    } else {
        serde_json::from_str(params).map_err(|e| format!("parameters: {e}"))?
    };
    let o: Vec<(&str, f64)> = map.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    presets::build(preset, &o).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Branches {
    rho: Vec<f64>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn root_branches_json(preset: &str, params: &str, rho_min: f64, rho_max: f64, count: usize) -> Result<String, String> {
    let st = build(preset, params)?;
    if !(rho_min > 0.0 && rho_max > rho_min && count >= 2) {
        return Err("need 0 < rho_min < rho_max and count >= 2".into());
    }
    let bs = track_branches(&st, &Direction::axis(st.dim(), 0), &log_grid(rho_min, rho_max, count))
        .map_err(|e| e.to_string())?;
    let out = Branches {
        re: bs.branches.iter().map(|b| b.iter().map(|z| z.re).collect()).collect(),
        im: bs.branches.iter().map(|b| b.iter().map(|z| z.im).collect()).collect(),
        rho: bs.rho,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    times: Vec<f64>,
    values: Vec<f64>,
    slope: Option<f64>,
}

pub fn decay_curve_json(preset: &str, params: &str, k: usize, s: f64) -> Result<String, String> {
    let st = build(preset, params)?;
    let grid = QuadratureGrid::for_stack(&st, 1e-4, 1e2, 1024).map_err(|e| e.to_string())?;
    let data = DataSpec::top_gaussian(st.order(), 1.0, 1.0);
    let r = simulate(&st, &data, &log_grid(1.0, 1e4, 41), k, s, &grid, None).map_err(|e| e.to_string())?;
    serde_json::to_string(&Curve {
        times: r.times,
        values: r.values,
        slope: r.fitted_slope,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StabilityMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `cells[j][i]` for `ys[j]`, `xs[i]`: "stable", "not_stable", "inconclusive" or "invalid".
    cells: Vec<Vec<String>>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64)
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn stability_map_json(
    preset: &str,
    x_name: &str,
    x_lo: f64,
    x_hi: f64,
    y_name: &str,
    y_lo: f64,
    y_hi: f64,
    n: usize,
) -> Result<String, String> {
    if !(2..=64).contains(&n) {
        return Err("grid size must be between 2 and 64".into());
    }
    if x_name == y_name {
        return Err("pick two different parameters".into());
    }
    let (xs, ys) = (linspace(x_lo, x_hi, n), linspace(y_lo, y_hi, n));
    let mut cells = Vec::with_capacity(n);
    for &y in &ys {
        let row = xs
            .iter()
            .map(|&x| {
                let st = match presets::build(preset, &[(x_name, x), (y_name, y)]) {
                    Ok(st) => st,
                    Err(hyperdecay::Error::InvalidModel(m)) if m.contains("has no parameter") => return Err(m),
                    Err(_) => return Ok("invalid".to_string()),
                };
                Ok(match classify(&st, &samples_for(st.dim(), st.is_isotropic())) {
                    Ok(r) => serde_json::to_value(r.verdict)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default(),
                    Err(_) => "invalid".to_string(),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        cells.push(row);
    }
    serde_json::to_string(&StabilityMap { xs, ys, cells }).map_err(|e| e.to_string())
}

/// Preset names and their default parameters.
pub fn presets_json() -> String {
    let list: Vec<(&str, Vec<(&str, f64)>)> = presets::NAMES
        .iter()
        .map(|&n| (n, presets::defaults(n).unwrap_or_default()))
        .collect();
    serde_json::to_string(&list).unwrap_or_default()
}

#[wasm_bindgen]
pub fn root_branches(preset: &str, params: &str, rho_min: f64, rho_max: f64, count: usize) -> Result<String, JsValue> {
    root_branches_json(preset, params, rho_min, rho_max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decay_curve(preset: &str, params: &str, k: usize, s: f64) -> Result<String, JsValue> {
    decay_curve_json(preset, params, k, s).map_err(|e| JsValue::from_str(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn stability_map(
    preset: &str,
    x_name: &str,
    x_lo: f64,
    x_hi: f64,
    y_name: &str,
    y_lo: f64,
    y_hi: f64,
    n: usize,
) -> Result<String, JsValue> {
    stability_map_json(preset, x_name, x_lo, x_hi, y_name, y_lo, y_hi, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn preset_list() -> String {
    presets_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_have_one_series_per_root() {
        let v: serde_json::Value = serde_json::from_str(&root_branches_json("mgt", "{}", 1e-2, 1e2, 50).unwrap()).unwrap();
        assert_eq!(v["re"].as_array().unwrap().len(), 3);
        assert!(v["rho"].as_array().unwrap().len() >= 50);
        assert!(root_branches_json("mgt", "{\"zeta\": 1}", 1e-2, 1e2, 50).is_err());
    }

    #[test]
    fn decay_curve_of_mgt_has_quarter_slope() {
        let v: serde_json::Value = serde_json::from_str(&decay_curve_json("mgt", "", 0, 0.0).unwrap()).unwrap();
        let slope = v["slope"].as_f64().unwrap();
        assert!((slope + 0.25).abs() < 0.05, "{slope}");
    }

    #[test]
    fn mgt_map_is_stable_exactly_for_positive_b() {
        let text = stability_map_json("mgt", "b", -1.0, 1.0, "tau", 0.5, 2.0, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let xs: Vec<f64> = v["xs"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for row in v["cells"].as_array().unwrap() {
            for (cell, x) in row.as_array().unwrap().iter().zip(&xs) {
                assert_eq!(cell == "stable", *x > 0.0, "b = {x}: {cell}");
            }
        }
        assert!(stability_map_json("mgt", "b", 0.0, 1.0, "zeta", 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn preset_list_names_every_preset() {
        let v: serde_json::Value = serde_json::from_str(&presets_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), presets::NAMES.len());
    }
}
