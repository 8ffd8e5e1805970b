//! Canonical JSON writing and decimal rounding.
//!
//! All on-disk artifacts are written through [`to_canonical_json`]: object keys
//! sorted, floats fixed to four decimals, no insignificant whitespace. Given
//! equal logical values the bytes are equal, which is what makes determinism
//! and round-trip checks byte-testable.

use serde::Serialize;
use serde_json::Value;

/// Quantize to four decimal places (the on-disk float resolution).
///
/// Geometry is quantized at construction time so that in-memory values and
/// re-parsed file values are bit-identical; negative zero normalizes to zero.
pub fn q4(x: f64) -> f64 {
    let q = (x * 10_000.0).round() / 10_000.0;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Round to `decimals` places, half away from zero.
pub fn round_decimals(x: f64, decimals: u32) -> f64 {
    let p = 10f64.powi(decimals as i32);
    let r = (x * p).round() / p;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Distance from `x` to the nearest rounding decision boundary when rounding
/// with step `step` (e.g. step 0.1 puts boundaries at …, 0.05, 0.15, …),
/// expressed as a fraction of the step.
///
/// Quality gates reject numeric ground truths that sit too close to a
/// boundary so that an independent recomputation, correct to far better than
/// the gate margin, can never round to a different answer.
pub fn boundary_distance_frac(x: f64, step: f64) -> f64 {
    let t = (x / step).abs().fract();
    (t - 0.5).abs()
}

/// Serialize any value to canonical JSON bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut out = String::new();
    write_value(&v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().expect("numeric json value");
                assert!(f.is_finite(), "non-finite float in canonical json");
                out.push_str(&format!("{:.4}", f));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string encodes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default Map is a BTreeMap, so iteration is already
            // key-sorted.
            out.push('{');
            for (i, (k, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key encodes"));
                out.push(':');
                write_value(val, out);
            }
            out.push('}');
        }
    }
}
