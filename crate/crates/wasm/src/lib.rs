// SPDX-License-Identifier: Apache-2.0
//! Browser bindings for the demo page. Every export returns a JSON string;
//! errors come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use posit_lab::logspace::{lse2, naive_log_add, LogNum};
use posit_lab::posit::{
    decode_fields, field_widths_for, posit_to_real, real_to_posit, PositConfig, PositValue,
};
use posit_lab::{BigReal, Precision};

const CURVE_POINTS: i64 = 400;

fn config(n: u32, es: u32) -> Result<PositConfig, String> {
    PositConfig::new(n, es).map_err(|e| e.to_string())
}

/// log2|x| as an f64, usable far outside binary64's range.
fn log2_abs(x: &BigReal) -> Option<f64> {
    let e = x.exponent_of().ok()?;
    let m = x.abs().mul_pow2(-e).to_f64();
    Some(e as f64 + m.log2())
}

fn pattern_json(p: PositValue) -> Result<Value, String> {
    let c = p.config();
    let n = c.n_bits();
    let bits = format!("{:0width$b}", p.bits(), width = n as usize);
    if p.is_zero() || p.is_nar() {
        return Ok(json!({
            "config": c.to_string(),
            "hex": p.to_hex(),
            "bits": bits,
            "special": if p.is_zero() { "zero" } else { "NaR" },
        }));
    }
    let f = decode_fields(p).map_err(|e| e.to_string())?;
    let regime_bits = if f.k >= 0 {
        f.k as u32 + 2
    } else {
        (-f.k) as u32 + 1
    }
    .min(n - 1);
    let exponent_bits = n - 1 - regime_bits - f.fraction_bit_count;
    let v = posit_to_real(p).map_err(|e| e.to_string())?;
    Ok(json!({
        "config": c.to_string(),
        "hex": p.to_hex(),
        "bits": bits,
        "sign": f.sign,
        "regime_bits": regime_bits,
        "k": f.k,
        "exponent_bits": exponent_bits,
        "e": f.e,
        "fraction_bits": f.fraction_bit_count,
        "fraction": f.fraction.to_string(),
        "scale": f.scale(c.es()),
        "value": v.to_f64(),
        "log2": log2_abs(&v),
        "exact": v.to_string(),
    }))
}

/// Parses `1.5e-300`, `2^-40000` or `1.5*2^-40000`.
fn parse_real(s: &str) -> Result<BigReal, String> {
    let s = s.trim();
    let bad = || format!("cannot read '{s}' as a number");
    if let Some((head, exp)) = s.split_once("2^") {
        let e: i64 = exp.trim().parse().map_err(|_| bad())?;
        let head = head.trim().trim_end_matches(['*', 'x', '×']).trim();
        let m = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|_| bad())?
        };
        return Ok(BigReal::from_f64(m).map_err(|e| e.to_string())?.mul_pow2(e));
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    BigReal::from_f64(v).map_err(|e| e.to_string())
}

pub fn decode_json(n: u32, es: u32, hex: &str) -> Result<Value, String> {
    let c = config(n, es)?;
    pattern_json(PositValue::from_hex(hex, c).map_err(|e| e.to_string())?)
}

pub fn encode_json(n: u32, es: u32, value: &str) -> Result<Value, String> {
    let c = config(n, es)?;
    let x = parse_real(value)?;
    let p = real_to_posit(&x, c);
    let mut out = pattern_json(p)?;
    let rel = if x.is_zero() || p.is_nar() {
        None
    } else {
        let got = posit_to_real(p).map_err(|e| e.to_string())?;
        let prec = Precision::default();
        Some(
            got.sub(&x, prec)
                .abs()
                .div(&x.abs(), prec)
                .map_err(|e| e.to_string())?,
        )
    };
    out["input_log2"] = json!(log2_abs(&x));
    // errors past f64 range only survive as a log
    out["relative_error"] = json!(rel.as_ref().map(BigReal::to_f64).filter(|e| e.is_finite()));
    out["relative_error_log2"] = json!(rel.as_ref().and_then(log2_abs));
    Ok(out)
}

fn lognum_json(l: LogNum) -> Value {
    if l.is_zero() {
        json!(null)
    } else {
        json!(l.lx())
    }
}

/// Naive ln(e^lx + e^ly) against the shifted form and a 256-bit reference.
pub fn lse_json(lx: f64, ly: f64) -> Result<Value, String> {
    let a = LogNum::from_ln(lx).map_err(|e| e.to_string())?;
    let b = LogNum::from_ln(ly).map_err(|e| e.to_string())?;
    let prec = Precision::default();
    let truth = a
        .to_real(prec)
        .and_then(|x| Ok(x.add(&b.to_real(prec)?, prec)))
        .and_then(|s| s.ln(prec))
        .map_err(|e| e.to_string())?;
    let t = truth.to_f64();
    let err = |l: LogNum| {
        if l.is_zero() || !l.lx().is_finite() {
            return json!(null);
        }
        json!(((l.lx() - t) / t).abs())
    };
    let (naive, stable) = (naive_log_add(a, b), lse2(a, b));
    Ok(json!({
        "lx": lx,
        "ly": ly,
        "exp_lx": lx.exp(),
        "exp_ly": ly.exp(),
        "naive": lognum_json(naive),
        "naive_overflow": !naive.is_zero() && naive.lx().is_infinite(),
        "lse": lognum_json(stable),
        "reference": t,
        "naive_error": err(naive),
        "lse_error": err(stable),
    }))
}

/// Fraction bits against binary exponent for posit(n, es) for each ES, plus
/// binary64, over `[lo, hi]`.
pub fn curve_json(n: u32, es_list: &str, lo: i64, hi: i64) -> Result<Value, String> {
    if lo >= hi {
        return Err("need lo < hi".into());
    }
    let step = ((hi - lo) / CURVE_POINTS).max(1);
    let scales: Vec<i64> = (0..)
        .map(|i| lo + i * step)
        .take_while(|&s| s <= hi)
        .collect();
    let mut series = Vec::new();
    for tok in es_list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let es: u32 = tok.parse().map_err(|_| format!("bad ES '{tok}'"))?;
        let c = config(n, es)?;
        let pts: Vec<Value> = scales
            .iter()
            .filter_map(|&s| {
                field_widths_for(&BigReal::pow2(s), c)
                    .ok()
                    .map(|w| json!([s, w.fraction_bits]))
            })
            .collect();
        series.push(json!({ "name": c.to_string(), "points": pts }));
    }
    let b64: Vec<Value> = scales
        .iter()
        .filter_map(|&s| match s {
            -1022..=1023 => Some(json!([s, 52])),
            -1074..=-1023 => Some(json!([s, s + 1074])),
            _ => None,
        })
        .collect();
    series.push(json!({ "name": "binary64", "points": b64 }));
    Ok(json!({ "lo": lo, "hi": hi, "series": series }))
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[wasm_bindgen]
pub fn posit_decode(n: u32, es: u32, hex: &str) -> String {
    respond(decode_json(n, es, hex))
}

#[wasm_bindgen]
pub fn posit_encode(n: u32, es: u32, value: &str) -> String {
    respond(encode_json(n, es, value))
}

#[wasm_bindgen]
pub fn lse_compare(lx: f64, ly: f64) -> String {
    respond(lse_json(lx, ly))
}

#[wasm_bindgen]
pub fn precision_curve(n: u32, es_list: &str, lo: i64, hi: i64) -> String {
    respond(curve_json(n, es_list, lo, hi))
}
