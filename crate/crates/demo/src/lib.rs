//! Browser bindings for the interactive demo page in `www/`.
//!
//! Each exported function is a thin wrapper around a plain Rust function
//! returning JSON, so the logic is tested natively.

use komwu::efg::{self, SequenceFormGame};
use komwu::harness::{parse_domain, run_cols_on, Algorithm, GameSpec, RunConfig};
use komwu::oracle::EnumerateVertices;
use komwu::KernelDomain;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_ITERATIONS: u64 = 50_000;

fn to_js(result: Result<Value, String>) -> Result<String, JsValue> {
    result
        .map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e))
}

fn check_iterations(iterations: u64) -> Result<(), String> {
    if iterations == 0 || iterations > MAX_ITERATIONS {
        return Err(format!("iterations must be between 1 and {MAX_ITERATIONS}"));
    }
    Ok(())
}

/// Max per-player regret over time on 2-player Kuhn poker for KOMWU and the
/// CFR baselines.
pub fn regret_curves(iterations: u64, eta: f64, stride: u64) -> Result<Value, String> {
    check_iterations(iterations)?;
    let game = SequenceFormGame::new(&efg::kuhn(2, 3).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut series = serde_json::Map::new();
    for algo in [Algorithm::Komwu, Algorithm::CfrRm, Algorithm::CfrRmPlus] {
        let mut cfg = RunConfig::new(
            GameSpec::Kuhn {
                players: 2,
                ranks: 3,
            },
            algo,
        );
        cfg.eta = eta;
        cfg.iterations = iterations;
        cfg.stride = stride.max(1);
        let rec = run_cols_on(&game, &cfg).map_err(|e| e.to_string())?;
        let t: Vec<u64> = rec.rows.iter().map(|r| r.t).collect();
        let regret: Vec<f64> = rec.rows.iter().map(|r| r.max_regret).collect();
        let expl: Vec<Option<f64>> = rec.rows.iter().map(|r| r.expl_avg).collect();
        series.insert(
            algo.name().to_string(),
            json!({ "t": t, "max_regret": regret, "expl_avg": expl }),
        );
    }
    Ok(Value::Object(series))
}

/// Dimension, vertex count and marginals of a domain under weights
/// `log_b`. An empty `log_b` means all zeros.
pub fn marginals(spec: &str, log_b: &[f64]) -> Result<Value, String> {
    let domain = parse_domain(spec).map_err(|e| e.to_string())?;
    let d = domain.dim();
    let zeros;
    let log_b = if log_b.is_empty() {
        zeros = vec![0.0; d];
        &zeros
    } else {
        log_b
    };
    let x = domain.marginals(log_b).map_err(|e| e.to_string())?;
    let log_partition = domain.log_partition(log_b).map_err(|e| e.to_string())?;
    Ok(json!({
        "dim": d,
        "vertices": domain.vertex_count().to_string(),
        "marginals": x,
        "log_partition": log_partition,
    }))
}

/// Last-iterate trajectory of OMWU self-play on a 2x2 zero-sum game with
/// row payoffs `[[a, -1], [-1, 1]]` (`a = 1` is matching pennies).
pub fn pennies_trajectory(a: f64, eta: f64, iterations: u64) -> Result<Value, String> {
    check_iterations(iterations)?;
    let tree =
        efg::zero_sum_matrix(&[vec![a, -1.0], vec![-1.0, 1.0]]).map_err(|e| e.to_string())?;
    let game = SequenceFormGame::new(&tree).map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::new(GameSpec::MatchingPennies, Algorithm::Komwu);
    cfg.eta = eta;
    cfg.iterations = iterations;
    cfg.stride = 1;
    cfg.keep_iterates = true;
    let rec = run_cols_on(&game, &cfg).map_err(|e| e.to_string())?;
    let iterates = rec.iterates.unwrap_or_default();
    let p: Vec<f64> = iterates.iter().map(|x| x[0][1]).collect();
    let q: Vec<f64> = iterates.iter().map(|x| x[1][1]).collect();
    let gap: Vec<Option<f64>> = rec.rows.iter().map(|r| r.expl_last).collect();
    Ok(json!({ "p": p, "q": q, "gap": gap }))
}

#[wasm_bindgen(js_name = regretCurves)]
pub fn regret_curves_js(iterations: u32, eta: f64, stride: u32) -> Result<String, JsValue> {
    to_js(regret_curves(iterations.into(), eta, stride.into()))
}

#[wasm_bindgen(js_name = domainMarginals)]
pub fn marginals_js(spec: &str, log_b: Vec<f64>) -> Result<String, JsValue> {
    to_js(marginals(spec, &log_b))
}

#[wasm_bindgen(js_name = penniesTrajectory)]
pub fn pennies_trajectory_js(a: f64, eta: f64, iterations: u32) -> Result<String, JsValue> {
    to_js(pennies_trajectory(a, eta, iterations.into()))
}
