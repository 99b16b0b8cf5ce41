//! Browser bindings for a few `schmidt-core` computations.
//!
//! Every export takes plain numbers or comma-separated weights and returns a
//! JSON string. The `*_json` functions hold the logic so they can be tested
//! natively.

use schmidt_core::embezzle::{embezzler_search_lu, two_qubit, vdh_order_for_fidelity};
use schmidt_core::losr::{f_losr, LosrOptions};
use schmidt_core::lu::{f_lu, lu_decay_curve};
use schmidt_core::SchmidtState;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest catalyst dimension the page offers; larger grids stall a tab.
pub const MAX_DIM: usize = 6;
pub const MAX_COPIES: usize = 512;

fn state(name: &str, raw: &str) -> Result<SchmidtState, String> {
    let mut w = raw
        .split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("{name}: entry {i} ({:?}) is not a number", s.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sum: f64 = w.iter().sum();
    if w.iter().any(|x| !(*x >= 0.0)) || !(sum > 0.0) {
        return Err(format!("{name}: weights must be nonnegative with a positive sum"));
    }
    w.sort_by(|a, b| b.total_cmp(a));
    w.iter_mut().for_each(|x| *x /= sum);
    SchmidtState::new(w).map_err(|e| format!("{name}: {e}"))
}

pub fn lu_decay_curve_json(p: f64, q: f64, n_max: usize) -> Result<String, String> {
    if !(1..=MAX_COPIES).contains(&n_max) {
        return Err(format!("n must be between 1 and {MAX_COPIES}"));
    }
    let curve = lu_decay_curve(p, q, n_max).map_err(|e| e.to_string())?;
    Ok(json!({ "p": p, "q": q, "points": curve }).to_string())
}

pub fn embezzler_search_json(p: f64, q: f64, dim: usize, step: f64) -> Result<String, String> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(format!("dim must be between 1 and {MAX_DIM}"));
    }
    let (t, s) = (
        two_qubit(p).map_err(|e| e.to_string())?,
        two_qubit(q).map_err(|e| e.to_string())?,
    );
    let found = embezzler_search_lu(&t, &s, dim, step, None).map_err(|e| e.to_string())?;
    let order = vdh_order_for_fidelity(found.fidelity).ok();
    Ok(json!({
        "p": p,
        "q": q,
        "dim": dim,
        "f_plain": f_lu(&t, &s).fidelity,
        "search": found,
        "vdh_order": order,
    })
    .to_string())
}

pub fn losr_fidelity_json(target: &str, seed: &str, step: f64) -> Result<String, String> {
    let (t, s) = (state("target", target)?, state("seed", seed)?);
    let opts = LosrOptions {
        step,
        ..LosrOptions::default()
    };
    let losr = f_losr(&t, &s, &opts).map_err(|e| e.to_string())?;
    Ok(json!({
        "target": t.weights(),
        "seed": s.weights(),
        "f_lu": f_lu(&t, &s).fidelity,
        "losr": losr,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn lu_decay(p: f64, q: f64, n_max: usize) -> Result<String, JsValue> {
    lu_decay_curve_json(p, q, n_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn embezzler_search(p: f64, q: f64, dim: usize, step: f64) -> Result<String, JsValue> {
    embezzler_search_json(p, q, dim, step).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn losr_fidelity(target: &str, seed: &str, step: f64) -> Result<String, JsValue> {
    losr_fidelity_json(target, seed, step).map_err(|e| JsValue::from_str(&e))
}
