//! Canonical report formatting: 15 significant digits, `"inf"` for +∞, keys
//! sorted, so identical runs produce byte-identical output.

use serde::Serializer;
use serde_json::{Map, Number, Value};

/// Serializes an extended real, writing `+∞` as the string `"inf"`.
pub fn extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *x == f64::INFINITY {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

pub fn extended_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if *x == f64::INFINITY {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Rounds every number to 15 significant digits and sorts object keys.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !(n.is_i64() || n.is_u64()) => {
                Number::from_f64(round_sig(x, 15)).map_or(Value::Null, Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonicalize).collect()),
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonicalize(v));
            }
            Value::Object(out)
        }
        other => other,
    }
}

/// Pretty JSON text of a serializable report in canonical form.
pub fn to_canonical_string<T: serde::Serialize>(value: &T) -> crate::Result<String> {
    let v = canonicalize(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}
