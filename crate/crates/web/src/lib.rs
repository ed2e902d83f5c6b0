//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string. The work is
//! done by the `*_json` functions, which also compile natively for tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use dichotomy_core::channel_opt::{eps_at_rate, DistanceKind};
use dichotomy_core::divergence::{renyi_divergence, umegaki, DivergenceKind};
use dichotomy_core::exponent::{first_order_rate, rate_grid, sweep, Dichotomy};
use dichotomy_core::operator::{random_density, seeded_rng, random_density_with};

/// Largest input block the finite-copy table will attempt in the browser.
pub const MAX_BROWSER_COPIES: usize = 10;

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn qubit_pair(p: f64, q: f64) -> Result<Dichotomy, String> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(format!("{name} must lie in [0, 1], got {v}"));
        }
    }
    Dichotomy::classical(&[p, 1.0 - p], &[q, 1.0 - q]).map_err(|e| e.to_string())
}

/// Exponent over `count` rates for the qubit pairs `(p1, q1)` and `(p2, q2)`,
/// each given by the probability of the first outcome.
pub fn exponent_curve_json(
    p1: f64,
    q1: f64,
    p2: f64,
    q2: f64,
    r_start: f64,
    r_stop: f64,
    count: usize,
) -> Result<String, String> {
    let d1 = qubit_pair(p1, q1)?;
    let d2 = qubit_pair(p2, q2)?;
    let grid = rate_grid(r_start, r_stop, count).map_err(|e| e.to_string())?;
    let rows = sweep(&d1, &d2, &grid).map_err(|e| e.to_string())?;
    let rate = first_order_rate(&d1, &d2).as_f64();
    Ok(json!({
        "rate_threshold": finite(rate),
        "rows": rows.iter().map(|r| json!({
            "r": r.r,
            "exponent": finite(r.exponent),
            "argmax_order": finite(r.argmax_order),
        })).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Exact optimal purified error and `−(1/n) log₂ F²` for `n = 1..=n_max`.
pub fn finite_table_json(p1: f64, q1: f64, p2: f64, q2: f64, r: f64, n_max: usize) -> Result<String, String> {
    if n_max == 0 || n_max > MAX_BROWSER_COPIES {
        return Err(format!("n_max must lie in 1..={MAX_BROWSER_COPIES}, got {n_max}"));
    }
    let d1 = qubit_pair(p1, q1)?;
    let d2 = qubit_pair(p2, q2)?;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let res = eps_at_rate(&d1, &d2, r, n, DistanceKind::Purified, 1e-7).map_err(|e| e.to_string())?;
        rows.push(json!({
            "n": n,
            "m": res.m,
            "error": finite(res.optimal_error),
            "fidelity_sq": finite(res.optimal_fidelity_sq),
            "neg_log_fid_rate": finite(res.neg_log_fid_rate()),
        }));
    }
    Ok(Value::Array(rows).to_string())
}

/// Sandwiched, Petz and log-Euclidean divergences over `alpha_count` orders
/// in `[alpha_min, alpha_max]` for a seeded random pair in dimension `dim`.
pub fn renyi_curves_json(
    dim: usize,
    seed: u64,
    alpha_min: f64,
    alpha_max: f64,
    alpha_count: usize,
) -> Result<String, String> {
    if !(2..=6).contains(&dim) {
        return Err(format!("dim must lie in 2..=6, got {dim}"));
    }
    if !(alpha_min > 0.0) || alpha_max <= alpha_min || alpha_count < 2 {
        return Err("need 0 < alpha_min < alpha_max and at least 2 orders".into());
    }
    let rho = random_density(dim, dim, seed).map_err(|e| e.to_string())?;
    let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let sigma = random_density_with(dim, dim, &mut rng).map_err(|e| e.to_string())?;
    let kinds = [DivergenceKind::Sandwiched, DivergenceKind::Petz, DivergenceKind::LogEuclidean];
    let mut alphas = Vec::with_capacity(alpha_count);
    let mut curves: Vec<Vec<Value>> = vec![Vec::with_capacity(alpha_count); kinds.len()];
    for i in 0..alpha_count {
        let a = alpha_min + (alpha_max - alpha_min) * i as f64 / (alpha_count - 1) as f64;
        alphas.push(a);
        for (k, kind) in kinds.iter().enumerate() {
            let v = if (a - 1.0).abs() < 1e-12 {
                umegaki(&rho, &sigma).map(|d| d.value)
            } else {
                renyi_divergence(*kind, a, &rho, &sigma).map(|d| d.value)
            }
            .map_err(|e| e.to_string())?;
            curves[k].push(finite(v));
        }
    }
    Ok(json!({
        "alpha": alphas,
        "sandwiched": curves[0],
        "petz": curves[1],
        "log_euclidean": curves[2],
        "relative_entropy": finite(umegaki(&rho, &sigma).map_err(|e| e.to_string())?.value),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn exponent_curve(p1: f64, q1: f64, p2: f64, q2: f64, r_start: f64, r_stop: f64, count: usize) -> Result<String, JsError> {
    exponent_curve_json(p1, q1, p2, q2, r_start, r_stop, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn finite_table(p1: f64, q1: f64, p2: f64, q2: f64, r: f64, n_max: usize) -> Result<String, JsError> {
    finite_table_json(p1, q1, p2, q2, r, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn renyi_curves(dim: usize, seed: u32, alpha_min: f64, alpha_max: f64, alpha_count: usize) -> Result<String, JsError> {
    renyi_curves_json(dim, u64::from(seed), alpha_min, alpha_max, alpha_count).map_err(|e| JsError::new(&e))
}
