//! Browser bindings: run a config, scan the He-like energy curve, fetch suite configs.

use nsto_dfo::hfr::{hfr_energy, AtomSpec, BasisTemplate, ScfConfig};
use nsto_dfo::{solve, suite, RunConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Parses and runs a config; returns the result and the running-best trace as JSON.
pub fn run_config_json(text: &str) -> Result<String, String> {
    let cfg = RunConfig::parse(text).map_err(|e| e.to_string())?;
    let r = solve(&cfg).map_err(|e| e.to_string())?;
    let trace: Vec<[f64; 3]> = r.trace.iter().map(|e| [e.eval_index as f64, e.f, e.best_f]).collect();
    Ok(json!({
        "method": cfg.method.name(),
        "best_x": r.best_x,
        "best_f": r.best_f,
        "n_evals": r.n_evals,
        "n_iterations": r.n_iterations,
        "termination": r.termination,
        "trace": trace,
    })
    .to_string())
}

/// Two-electron energy over `points` exponents in `[zeta_lo, zeta_hi]` at fixed n*.
/// Failed SCF points come back as `null`.
pub fn energy_scan_json(z: u32, n_star: f64, zeta_lo: f64, zeta_hi: f64, points: usize) -> Result<String, String> {
    if points < 2 || !(zeta_lo > 0.0 && zeta_lo < zeta_hi) {
        return Err("need points >= 2 and 0 < zeta_lo < zeta_hi".into());
    }
    let atom = AtomSpec::new(z, 2).map_err(|e| e.to_string())?;
    let t = BasisTemplate::NonInteger { shells: 1 };
    let cfg = ScfConfig::default();
    let rows: Vec<(f64, Option<f64>)> = (0..points)
        .map(|i| {
            let zeta = zeta_lo + (zeta_hi - zeta_lo) * i as f64 / (points - 1) as f64;
            (zeta, hfr_energy(&atom, &t, &[n_star, zeta], &cfg).ok().map(|s| s.energy))
        })
        .collect();
    Ok(json!({
        "zeta": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        "energy": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Config text of row `index` of a named suite.
pub fn suite_config_text(name: &str, index: usize) -> Result<String, String> {
    let s = suite(name).ok_or_else(|| format!("unknown suite `{name}`"))?;
    let n = s.rows.len();
    let row = s.rows.get(index).ok_or_else(|| format!("suite {name} has {n} rows"))?;
    Ok(row.config.to_text())
}

#[wasm_bindgen]
pub fn run_config(text: &str) -> Result<String, JsValue> {
    run_config_json(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn energy_scan(z: u32, n_star: f64, zeta_lo: f64, zeta_hi: f64, points: usize) -> Result<String, JsValue> {
    energy_scan_json(z, n_star, zeta_lo, zeta_hi, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn suite_config(name: &str, index: usize) -> Result<String, JsValue> {
    suite_config_text(name, index).map_err(|e| JsValue::from_str(&e))
}
