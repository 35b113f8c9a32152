use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::qudit::QuantumState;
use crate::semantics::Configuration;
use crate::syntax::pretty_term;

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round_float(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { 0.0 } else { x };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

fn canonicalize(value: Json) -> Json {
    match value {
        Json::Number(n) if n.is_f64() => {
            let x = round_float(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Json::Null, Json::Number)
        }
        Json::Array(items) => Json::Array(items.into_iter().map(canonicalize).collect()),
        Json::Object(map) => {
            Json::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with sorted keys and floats at 12 significant digits, so
/// equal inputs give byte-identical text.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string_pretty(&canonicalize(value)).expect("json text")
}

pub fn state_json(state: &QuantumState) -> Json {
    json!({
        "qudits": state.names(),
        "amplitudes": state
            .amplitudes()
            .iter()
            .map(|a| [a.re, a.im])
            .collect::<Vec<_>>(),
    })
}

pub fn configuration_json(config: &Configuration) -> Json {
    match config {
        Configuration::Pure(p) => json!({
            "kind": "pure",
            "term": pretty_term(&p.term),
            "owned": p.omega,
            "state": state_json(&p.sigma),
        }),
        Configuration::Mixed(m) => json!({
            "kind": "mixed",
            "term": pretty_term(&m.term),
            "owned": m.omega,
            "variables": m.vars,
            "components": m.components.iter().map(|c| json!({
                "weight": c.weight,
                "values": c.values,
                "state": state_json(&c.state),
            })).collect::<Vec<_>>(),
        }),
        Configuration::Distribution(d) => json!({
            "kind": "distribution",
            "branches": d.branches.iter().map(|(p, b)| json!({
                "probability": p,
                "configuration": configuration_json(b),
            })).collect::<Vec<_>>(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_float(-0.0), 0.0);
        assert_eq!(round_float(0.1 + 0.2), 0.3);
        assert_eq!(round_float(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn keys_sorted_and_stable() {
        let a = canonical_json(&json!({"b": 1.0000000000001, "a": [0.30000000000000004]}));
        assert_eq!(a, canonical_json(&json!({"a": [0.3], "b": 1.0})));
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
    }
}
