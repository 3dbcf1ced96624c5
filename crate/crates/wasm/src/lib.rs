//! Browser bindings. Every export returns a JSON string so the page stays a
//! thin renderer; errors come back as plain messages.

use hillshare::allocator::allocate as allocate_instance;
use hillshare::csv::parse_instance;
use hillshare::experiments::{alpha_grid, curve_samples};
use hillshare::rational::{parse_rational, to_decimal, to_f64, to_fraction, Rational};
use hillshare::{
    guarantee, hill_share, mms_lower_bound, theoretical_ratio, ObjectCount, ShareQuery,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn count(m: u32) -> ObjectCount {
    if m == 0 {
        ObjectCount::Unrestricted
    } else {
        ObjectCount::Finite(m.into())
    }
}

fn number(r: &Rational) -> Value {
    json!({ "fraction": to_fraction(r), "value": to_f64(r) })
}

/// Closed forms on `j/points` plus every region endpoint. `m = 0` means
/// no limit on the number of objects.
#[wasm_bindgen]
pub fn curve(n: u32, m: u32, points: u32) -> Result<String, String> {
    if n < 2 {
        return Err(format!("need n >= 2 agents, got {n}"));
    }
    if points < 2 {
        return Err("need at least 2 grid points".into());
    }
    let rows: Vec<Value> = curve_samples(n.into(), &alpha_grid(n.into(), points.into()), count(m))
        .iter()
        .map(|r| {
            json!({
                "alpha": number(&r.alpha),
                "upper": number(&r.delta_upper),
                "lower": number(&r.delta_lower),
                "guarantee": number(&r.guarantee),
                "ratio": number(&r.ratio),
            })
        })
        .collect();
    Ok(Value::Array(rows).to_string())
}

/// One closed form: `kind` is `upper`, `lower`, `guarantee` or `ratio`.
#[wasm_bindgen]
pub fn share(n: u32, m: u32, alpha: &str, kind: &str) -> Result<String, String> {
    let alpha = parse_rational(alpha).map_err(|e| e.to_string())?;
    let value = if kind == "guarantee" {
        guarantee(n.into(), &alpha).map_err(|e| e.to_string())?
    } else {
        let q = ShareQuery::new(n.into(), count(m), alpha).map_err(|e| e.to_string())?;
        match kind {
            "upper" => hill_share(&q),
            "lower" => mms_lower_bound(&q),
            "ratio" => theoretical_ratio(&q),
            other => return Err(format!("unknown kind `{other}`")),
        }
    };
    Ok(json!({
        "fraction": to_fraction(&value),
        "decimal": to_decimal(&value, 12),
    })
    .to_string())
}

/// Allocates an instance given as CSV text, one row per agent.
#[wasm_bindgen]
pub fn allocate(csv: &str) -> Result<String, String> {
    let inst = parse_instance(csv).map_err(|e| e.to_string())?;
    let out = allocate_instance(&inst).map_err(|e| e.to_string())?;
    let agents: Vec<Value> = out
        .agents
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let bundle: Vec<usize> = out.allocation.bundle(i).iter().map(|e| e + 1).collect();
            json!({
                "agent": i + 1,
                "bundle": bundle,
                "disutility": number(&r.achieved),
                "alpha": number(&r.alpha),
                "guarantee": number(&r.guarantee),
                "satisfied": r.satisfied,
            })
        })
        .collect();
    Ok(json!({ "objects": inst.m(), "agents": agents }).to_string())
}
