//! JSON formats for expressions, metrics, warped-product specs and
//! two-dimensional cases. Coordinate indices are 1-based on the wire.
//! Unknown keys are rejected everywhere.

use finsler_core::expr::Univariate;
use finsler_core::theorem2d::Theorem2DCase;
use finsler_core::warped::DWPSpec;
use finsler_core::{Expr, MetricSpec, Point};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

pub fn parse_document(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

fn object<'v>(v: &'v Value, path: &str, allowed: &[&str]) -> CliResult<&'v Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| CliError::schema(path, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::schema(path, format!("unknown key \"{k}\"")));
    }
    Ok(obj)
}

fn field<'v>(obj: &'v Map<String, Value>, path: &str, key: &str) -> CliResult<&'v Value> {
    obj.get(key).ok_or_else(|| CliError::schema(path, format!("missing key \"{key}\"")))
}

fn number(v: &Value, path: &str) -> CliResult<f64> {
    v.as_f64().filter(|f| f.is_finite()).ok_or_else(|| CliError::schema(path, "expected a finite number"))
}

fn index(v: &Value, path: &str) -> CliResult<usize> {
    match v.as_u64() {
        Some(i) if i >= 1 => Ok(i as usize - 1),
        _ => Err(CliError::schema(path, "coordinate index must be an integer ≥ 1")),
    }
}

pub fn expr_from_json(v: &Value, path: &str) -> CliResult<Expr> {
    if let Some(c) = v.as_f64() {
        return if c.is_finite() { Ok(Expr::Const(c)) } else { Err(CliError::schema(path, "non-finite constant")) };
    }
    let obj = v.as_object().ok_or_else(|| CliError::schema(path, "expected an expression object or a number"))?;
    let op = obj
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::schema(path, "missing string key \"op\""))?;
    let args = |min: usize, max: usize| -> CliResult<Vec<Expr>> {
        let list = field(obj, path, "args")?.as_array().ok_or_else(|| CliError::schema(path, "\"args\" must be an array"))?;
        if list.len() < min || list.len() > max {
            return Err(CliError::schema(path, format!("\"{op}\" takes {min}..={max} arguments, got {}", list.len())));
        }
        list.iter().enumerate().map(|(k, a)| expr_from_json(a, &format!("{path}/args/{}", k + 1))).collect()
    };
    let unary = |build: fn(Box<Expr>) -> Expr| -> CliResult<Expr> {
        object(v, path, &["op", "args"])?;
        Ok(build(Box::new(args(1, 1)?.remove(0))))
    };
    match op {
        "const" => {
            let o = object(v, path, &["op", "value"])?;
            Ok(Expr::Const(number(field(o, path, "value")?, &format!("{path}/value"))?))
        }
        "x" | "y" => {
            let o = object(v, path, &["op", "i"])?;
            let i = index(field(o, path, "i")?, &format!("{path}/i"))?;
            Ok(if op == "x" { Expr::X(i) } else { Expr::Y(i) })
        }
        "add" | "sum" => {
            object(v, path, &["op", "args"])?;
            Ok(Expr::Sum(args(1, usize::MAX)?))
        }
        "mul" | "product" => {
            object(v, path, &["op", "args"])?;
            Ok(Expr::Product(args(1, usize::MAX)?))
        }
        "sub" => {
            object(v, path, &["op", "args"])?;
            let mut a = args(2, 2)?;
            let b = a.pop().unwrap();
            Ok(a.pop().unwrap() - b)
        }
        "neg" => {
            object(v, path, &["op", "args"])?;
            Ok(-args(1, 1)?.remove(0))
        }
        "div" | "quotient" => {
            object(v, path, &["op", "args"])?;
            let mut a = args(2, 2)?;
            let d = a.pop().unwrap();
            Ok(Expr::Quotient(Box::new(a.pop().unwrap()), Box::new(d)))
        }
        "pow" => {
            let o = object(v, path, &["op", "args", "exponent"])?;
            let p = number(field(o, path, "exponent")?, &format!("{path}/exponent"))?;
            Ok(Expr::Pow(Box::new(args(1, 1)?.remove(0)), p))
        }
        "exp" => unary(Expr::Exp),
        "sqrt" => unary(Expr::Sqrt),
        other => match Univariate::from_name(other) {
            Some(f) => {
                object(v, path, &["op", "args"])?;
                Ok(Expr::Func(f, Box::new(args(1, 1)?.remove(0))))
            }
            None => Err(CliError::schema(path, format!("unknown op \"{other}\""))),
        },
    }
}

pub fn expr_to_json(e: &Expr) -> Value {
    let list = |xs: &[Expr]| Value::Array(xs.iter().map(expr_to_json).collect());
    match e {
        Expr::Const(c) => json!(c),
        Expr::X(i) => json!({"op": "x", "i": i + 1}),
        Expr::Y(i) => json!({"op": "y", "i": i + 1}),
        Expr::Sum(xs) => json!({"op": "add", "args": list(xs)}),
        Expr::Product(xs) => json!({"op": "mul", "args": list(xs)}),
        Expr::Pow(b, p) => json!({"op": "pow", "args": [expr_to_json(b)], "exponent": p}),
        Expr::Quotient(a, b) => json!({"op": "div", "args": [expr_to_json(a), expr_to_json(b)]}),
        Expr::Exp(a) => json!({"op": "exp", "args": [expr_to_json(a)]}),
        Expr::Sqrt(a) => json!({"op": "sqrt", "args": [expr_to_json(a)]}),
        Expr::Func(f, a) => json!({"op": f.name(), "args": [expr_to_json(a)]}),
    }
}

fn chart_box(v: &Value, path: &str, dim: usize) -> CliResult<Vec<(f64, f64)>> {
    let rows = v.as_array().ok_or_else(|| CliError::schema(path, "expected an array of [lo, hi] pairs"))?;
    if rows.len() != dim {
        return Err(CliError::schema(path, format!("expected {dim} intervals, got {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            let p = format!("{path}/{}", k + 1);
            match r.as_array().map(Vec::as_slice) {
                Some([lo, hi]) => Ok((number(lo, &p)?, number(hi, &p)?)),
                _ => Err(CliError::schema(&p, "expected [lo, hi]")),
            }
        })
        .collect()
}

fn chart_box_to_json(b: &[(f64, f64)]) -> Value {
    Value::Array(b.iter().map(|(lo, hi)| json!([lo, hi])).collect())
}

pub fn metric_from_json(v: &Value, path: &str) -> CliResult<MetricSpec> {
    let o = object(v, path, &["dimension", "F_squared", "chart_box", "label"])?;
    let dim = field(o, path, "dimension")?
        .as_u64()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::schema(format!("{path}/dimension"), "expected a positive integer"))? as usize;
    let f2 = expr_from_json(field(o, path, "F_squared")?, &format!("{path}/F_squared"))?;
    let cb = chart_box(field(o, path, "chart_box")?, &format!("{path}/chart_box"), dim)?;
    let label = match o.get("label") {
        None => "unnamed".to_string(),
        Some(l) => l.as_str().ok_or_else(|| CliError::schema(format!("{path}/label"), "expected a string"))?.to_string(),
    };
    MetricSpec::new(dim, f2, cb, label).map_err(CliError::core("finsler-core", "metric_spec"))
}

pub fn metric_to_json(m: &MetricSpec) -> Value {
    json!({
        "dimension": m.dimension,
        "F_squared": expr_to_json(&m.f_squared),
        "chart_box": chart_box_to_json(&m.chart_box),
        "label": m.label,
    })
}

pub fn dwp_from_json(v: &Value, path: &str) -> CliResult<DWPSpec> {
    let o = object(v, path, &["m1", "m2", "f1", "f2", "sigma"])?;
    let m1 = metric_from_json(field(o, path, "m1")?, &format!("{path}/m1"))?;
    let m2 = metric_from_json(field(o, path, "m2")?, &format!("{path}/m2"))?;
    let f1 = expr_from_json(field(o, path, "f1")?, &format!("{path}/f1"))?;
    let f2 = expr_from_json(field(o, path, "f2")?, &format!("{path}/f2"))?;
    let spec = DWPSpec::new(m1, m2, f1, f2).map_err(CliError::core("warped", "dwp_construct"))?;
    match o.get("sigma") {
        None => Ok(spec),
        Some(s) => spec
            .with_isotropic_scalar(expr_from_json(s, &format!("{path}/sigma"))?)
            .map_err(CliError::core("warped", "check_theorem_equivalences")),
    }
}

pub fn dwp_to_json(s: &DWPSpec) -> Value {
    let mut v = json!({
        "m1": metric_to_json(&s.m1),
        "m2": metric_to_json(&s.m2),
        "f1": expr_to_json(&s.f1),
        "f2": expr_to_json(&s.f2),
    });
    if let Some(sigma) = &s.isotropic_scalar {
        v["sigma"] = expr_to_json(sigma);
    }
    v
}

fn expr_pair(v: &Value, path: &str) -> CliResult<[Expr; 2]> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok([expr_from_json(a, &format!("{path}/1"))?, expr_from_json(b, &format!("{path}/2"))?]),
        _ => Err(CliError::schema(path, "expected a pair of expressions")),
    }
}

pub fn case_from_json(v: &Value, path: &str) -> CliResult<Theorem2DCase> {
    let o = object(v, path, &["c", "A", "a", "chart_box"])?;
    let c = expr_pair(field(o, path, "c")?, &format!("{path}/c"))?;
    let a_grad = expr_pair(field(o, path, "A")?, &format!("{path}/A"))?;
    let a = number(field(o, path, "a")?, &format!("{path}/a"))?;
    let cb = match o.get("chart_box") {
        Some(b) => chart_box(b, &format!("{path}/chart_box"), 2)?,
        None => vec![(0.0, 1.0); 2],
    };
    Theorem2DCase::new(c, a_grad, a, cb).map_err(CliError::core("theorem2d", "theorem2d_case"))
}

pub fn case_to_json(c: &Theorem2DCase) -> Value {
    json!({
        "c": [expr_to_json(&c.c[0]), expr_to_json(&c.c[1])],
        "A": [expr_to_json(&c.a_grad[0]), expr_to_json(&c.a_grad[1])],
        "a": c.a,
        "chart_box": chart_box_to_json(&c.chart_box),
    })
}

pub fn point_to_json(p: &Point) -> Value {
    json!({"x": p.x, "y": p.y})
}
