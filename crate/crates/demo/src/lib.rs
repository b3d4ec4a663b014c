//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold
//! the logic so they can be tested natively.

use fhs_core::bounds::{classify, classify_measured, lempel_greenberger, peng_fan, simplified_peng_fan};
use fhs_core::constructions::ConstructionParams;
use fhs_core::correlation::{hamming_correlation, set_correlation};
use fhs_core::format::{Design, DesignFile};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest `n·M` the page will scan exhaustively.
pub const SCAN_LIMIT: usize = 20_000;

pub fn construct_json(params: &str) -> Result<String, String> {
    let params: ConstructionParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if params.needs_base() {
        return Err(format!("{} needs a base design file", params.family()));
    }
    let set = params.build(None).map_err(|e| e.to_string())?;
    let mut out = json!({
        "file": DesignFile::from_set(&set),
        "n": set.length(),
        "M": set.size(),
        "l": set.alphabet(),
        "claimed": set.claimed_lambda,
    });
    if set.length() * set.size() <= SCAN_LIMIT {
        let profile = set_correlation(&set).map_err(|e| e.to_string())?;
        let verdict = classify(&set, &profile).ok();
        out["measured"] = json!(profile.max);
        out["optimal"] = json!(verdict.map(|v| v.is_optimal()));
    }
    Ok(out.to_string())
}

pub fn profile_json(design: &str, first: usize, second: usize) -> Result<String, String> {
    let file = DesignFile::from_json(design).map_err(|e| e.to_string())?;
    let set = match file.design().map_err(|e| e.to_string())? {
        Design::FhsSet(s) => s,
        _ => return Err("profile needs an fhs-set design".into()),
    };
    let seqs = set.sequences();
    let (x, y) = match (seqs.get(first), seqs.get(second)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(format!("sequence index out of range (M = {})", seqs.len())),
    };
    let values = (0..set.length())
        .map(|tau| hamming_correlation(x, y, tau))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Value::from(values).to_string())
}

pub fn bounds_json(n: u32, m: u32, l: u32, measured: Option<u32>) -> Result<String, String> {
    let (n, m, l) = (n as u64, m as u64, l as u64);
    let lg = lempel_greenberger(n, l).map_err(|e| e.to_string())?;
    let pf = peng_fan(n, m, l).map_err(|e| e.to_string())?;
    let simplified = simplified_peng_fan(n, m, l).ok().map(|s| s.bound);
    let verdict = measured
        .map(|h| classify_measured(n, m, l, h as u64))
        .transpose()
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "lempel_greenberger": lg,
        "peng_fan_first": pf.first,
        "peng_fan_second": pf.second,
        "simplified": simplified,
        "I": pf.quotient,
        "optimal": verdict.map(|v| v.is_optimal()),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn construct(params: &str) -> Result<String, JsError> {
    construct_json(params).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn correlation_profile(design: &str, first: usize, second: usize) -> Result<String, JsError> {
    profile_json(design, first, second).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bounds(n: u32, m: u32, l: u32, measured: Option<u32>) -> Result<String, JsError> {
    bounds_json(n, m, l, measured).map_err(|e| JsError::new(&e))
}
