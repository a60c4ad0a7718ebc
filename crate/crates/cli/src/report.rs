//! JSON and CSV rendering.
//!
//! Numbers are rounded to 12 significant digits; non-finite values become
//! the strings `"inf"`, `"-inf"` and `"nan"`. Object keys are sorted, so a
//! report is a deterministic function of its inputs apart from the
//! `timestamp` field.

use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

pub fn round12(v: f64) -> f64 {
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn num(v: f64) -> Value {
    if v.is_nan() {
        Value::from("nan")
    } else if v.is_infinite() {
        Value::from(if v > 0.0 { "inf" } else { "-inf" })
    } else {
        Value::from(round12(v))
    }
}

pub fn nums(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}

/// CSV cell text for a number, with the same rounding as JSON.
pub fn csv_num(v: f64) -> String {
    match num(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// `{"value": v, "diagnostics": {...}}`
pub fn measure(value: f64, diagnostics: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), num(value));
    m.insert("diagnostics".into(), Value::Object(diagnostics));
    Value::Object(m)
}

pub fn unix_timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Report envelope shared by the JSON-emitting commands.
pub fn envelope(command: &str, sha256: &str, body: Map<String, Value>) -> Value {
    let mut m = body;
    m.insert("tool".into(), Value::from("infosep"));
    m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), Value::from(command));
    m.insert("input_sha256".into(), Value::from(sha256));
    m.insert("timestamp".into(), Value::from(unix_timestamp()));
    Value::Object(m)
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
