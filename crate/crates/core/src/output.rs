//! Deterministic numeric formatting for JSON and CSV output.

use serde_json::{Map, Number, Value};

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back to the rounded value. Non-finite values print as `NaN`,
/// `inf` or `-inf`.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if !(1e-6..1e15).contains(&mag) {
        return format!("{rounded:e}");
    }
    format!("{rounded}")
}

/// JSON number with 12 significant digits; `null` when not finite.
pub fn num12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(fmt12(x).parse::<Number>().expect("decimal literal"))
}

/// Applies [`num12`] to every float in `value`, preserving integers.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => num12(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0625), "1.0625");
        assert_eq!(fmt12(2.0 / 15.0), "0.133333333333");
        assert_eq!(fmt12(62.0 / 21.0), "2.95238095238");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(1e-20 / 3.0), "3.33333333333e-21");
        assert_eq!(fmt12(f64::NAN), "NaN");
    }

    #[test]
    fn json_rounding() {
        let v = round_json(json!({"a": 1.0 / 3.0, "b": [2, 0.1 + 0.2], "c": "x"}));
        assert_eq!(v.to_string(), r#"{"a":0.333333333333,"b":[2,0.3],"c":"x"}"#);
    }
}
