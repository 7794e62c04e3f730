//! JSON report builders. Maps are `BTreeMap`-backed, so keys come out
//! sorted and two runs with the same inputs serialize identically apart
//! from the `timestamp` field.

use std::time::{SystemTime, UNIX_EPOCH};

use finsler_core::classify::{ClassificationReport, CrosscheckSummary, PredicateResult, Tolerances};
use finsler_core::crosscheck::TensorComparison;
use finsler_core::{Provenance, SamplingPolicy, TensorSample};
use serde_json::{json, Value};

use crate::codec::point_to_json;

pub const STATUS_PASS: &str = "pass";
pub const STATUS_FAIL: &str = "fail";

pub fn status(passed: bool) -> &'static str {
    if passed {
        STATUS_PASS
    } else {
        STATUS_FAIL
    }
}

pub fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn engine(p: Provenance) -> &'static str {
    match p {
        Provenance::Jet => "jet",
        Provenance::FiniteDifference => "fd",
    }
}

pub fn tolerances_json(t: &Tolerances) -> Value {
    json!({
        "cartan": t.cartan,
        "berwald": t.berwald,
        "mean_berwald": t.mean_berwald,
        "douglas": t.douglas,
    })
}

pub fn policy_json(p: &SamplingPolicy) -> Value {
    json!({
        "x_count": p.x_count,
        "y_count": p.y_count,
        "total": p.total(),
        "fd_fraction": p.fd_fraction,
    })
}

pub fn tensor_json(t: &TensorSample) -> Value {
    let mut v = json!({
        "name": t.name,
        "upper": t.upper,
        "lower": t.lower,
        "shape": t.shape(),
        "components": t.components,
        "engine": engine(t.provenance),
    });
    if !t.error_estimates.is_empty() {
        v["error_estimates"] = json!(t.error_estimates);
    }
    v
}

pub fn comparison_json(c: &TensorComparison) -> Value {
    json!({
        "tensor": c.tensor,
        "point": point_to_json(&c.point),
        "max_deviation": c.max_deviation,
        "worst_ratio": c.worst_ratio,
        "passed": c.passed,
        "engine": "jet-vs-fd",
    })
}

pub fn crosscheck_json(c: &CrosscheckSummary) -> Value {
    json!({
        "samples": c.samples,
        "comparisons": c.comparisons,
        "worst_ratio": c.worst_ratio,
        "passed": c.passed(),
        "failures": c.failures.iter().map(comparison_json).collect::<Vec<_>>(),
    })
}

fn worst_point(p: &PredicateResult) -> Value {
    p.worst_point.as_ref().map(point_to_json).unwrap_or(Value::Null)
}

pub fn classification_json(r: &ClassificationReport) -> Value {
    let preds = r.predicates();
    let table = |f: &dyn Fn(&PredicateResult) -> Value| -> Value {
        Value::Object(preds.iter().map(|(name, p)| (name.to_string(), f(p))).collect())
    };
    json!({
        "label": r.label,
        "seed": r.seed,
        "samples": r.samples,
        "verdicts": table(&|p| json!(p.verdict)),
        "sup_norms": table(&|p| json!(p.sup_norm)),
        "tolerances": table(&|p| json!(p.tolerance)),
        "worst_points": table(&worst_point),
        "engine": "jet",
        "crosscheck": crosscheck_json(&r.crosscheck),
    })
}

/// Wraps a command result with the provenance every report carries.
pub fn envelope(command: &str, passed: bool, seed: u64, extra: Value, result: Value) -> Value {
    let mut v = json!({
        "command": command,
        "status": status(passed),
        "seed": seed,
        "timestamp": timestamp(),
        "result": result,
    });
    if let Value::Object(map) = extra {
        for (k, val) in map {
            v[k] = val;
        }
    }
    v
}

/// Removes the `timestamp` field wherever it appears, for comparing runs.
pub fn strip_timestamps(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timestamp");
            map.values_mut().for_each(strip_timestamps);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_timestamps),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted() {
        let v = envelope("classify", true, 42, json!({"zeta": 1, "alpha": 2}), json!({}));
        let text = serde_json::to_string(&v).unwrap();
        let a = text.find("\"alpha\"").unwrap();
        let c = text.find("\"command\"").unwrap();
        let z = text.find("\"zeta\"").unwrap();
        assert!(a < c && c < z);
    }

    #[test]
    fn timestamps_are_stripped_recursively() {
        let mut v = json!({"timestamp": 1, "inner": [{"timestamp": 2, "k": 3}]});
        strip_timestamps(&mut v);
        assert_eq!(v, json!({"inner": [{"k": 3}]}));
    }
}
