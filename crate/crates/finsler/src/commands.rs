//! Command dispatch: each subcommand turns its input into one JSON report
//! (JSON lines for `probe-n3`) and an exit status.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use finsler_core::classify::{classify, Tolerances};
use finsler_core::crosscheck::crosscheck_point;
use finsler_core::theorem2d::{self, probe_n3, random_admissible_cases, verify_main_theorem, Theorem2DCase};
use finsler_core::warped::{
    check_theorem_equivalences, dwp_construct, dwp_fundamental_blocks, wp_berwald_blocks, wp_spray, BlockReport,
    DWPSpec, EntryStatus, EquivalenceReport, Selection, Theorem,
};
use finsler_core::{Depth, FinslerEvaluator, MetricSpec, Point, SamplingPolicy};
use serde_json::{json, Value};

use crate::codec::{case_from_json, case_to_json, dwp_from_json, dwp_to_json, metric_from_json, metric_to_json, parse_document, point_to_json};
use crate::error::{CliError, CliResult};
use crate::report::{
    classification_json, comparison_json, envelope, policy_json, status, tensor_json, timestamp, tolerances_json,
};

#[derive(Parser, Debug, Clone)]
#[command(name = "finsler", version, about = "Numerical Finsler geometry: tensors, classification, warped products")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Total number of (x, y) samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "tol-cartan", global = true)]
    pub tol_cartan: Option<f64>,
    #[arg(long = "tol-berwald", global = true)]
    pub tol_berwald: Option<f64>,
    #[arg(long = "tol-mean-berwald", global = true)]
    pub tol_mean_berwald: Option<f64>,
    #[arg(long = "tol-douglas", global = true)]
    pub tol_douglas: Option<f64>,
    /// Run every sample through the finite-difference oracle instead of 10%.
    #[arg(long, global = true)]
    pub fd_crosscheck: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Every tensor at one point, with finite-difference cross-checks.
    Tensors {
        #[arg(long)]
        input: PathBuf,
        /// Base point, comma separated; defaults to the first sample.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
    },
    /// Riemannian / Berwald / weakly Berwald / Douglas verdicts.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Doubly warped product: block formulas and theorem equivalences.
    Dwp {
        #[arg(long)]
        input: PathBuf,
        /// Restrict to one theorem (theorem1, theorem1_dual, corollary1,
        /// theorem2, corollary2, theorem3); its premises are then enforced.
        #[arg(long)]
        theorem: Option<String>,
    },
    /// Two-dimensional reconstruction pipeline.
    #[command(name = "verify-theorem2d")]
    VerifyTheorem2d {
        /// A case object or an array of cases.
        #[arg(long, required_unless_present = "random_cases")]
        input: Option<PathBuf>,
        /// Generate this many seeded admissible cases instead.
        #[arg(long)]
        random_cases: Option<usize>,
    },
    /// Exploratory search over three-dimensional candidates.
    #[command(name = "probe-n3")]
    ProbeN3 {
        #[arg(long, default_value_t = 60)]
        budget: usize,
    },
}

/// The text to emit, the process exit code and stderr diagnostics.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            cartan: self.tol_cartan.unwrap_or(d.cartan),
            berwald: self.tol_berwald.unwrap_or(d.berwald),
            mean_berwald: self.tol_mean_berwald.unwrap_or(d.mean_berwald),
            douglas: self.tol_douglas.unwrap_or(d.douglas),
        }
    }

    /// `samples` split into base points times at most 16 fiber directions.
    pub fn policy(&self, default_samples: usize) -> SamplingPolicy {
        let total = self.samples.unwrap_or(default_samples).max(1);
        let y_count = total.min(16);
        let mut p = SamplingPolicy::with_counts(self.seed, total.div_ceil(y_count), y_count);
        if self.fd_crosscheck {
            p.fd_fraction = 1.0;
        }
        p
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Tensors { .. } => "tensors",
            Command::Classify { .. } => "classify",
            Command::Dwp { .. } => "dwp",
            Command::VerifyTheorem2d { .. } => "verify-theorem2d",
            Command::ProbeN3 { .. } => "probe-n3",
        }
    }
}

struct Report {
    value: Value,
    passed: bool,
    diagnostics: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let result = match &cfg.command {
        Command::Tensors { input, x, y } => tensors(cfg, input, x.as_deref(), y.as_deref()),
        Command::Classify { input } => classify_cmd(cfg, input),
        Command::Dwp { input, theorem } => dwp(cfg, input, theorem.as_deref()),
        Command::VerifyTheorem2d { input, random_cases } => verify(cfg, input.as_ref(), *random_cases),
        Command::ProbeN3 { budget } => return probe(cfg, *budget),
    };
    match result {
        Ok(r) => Outcome {
            text: pretty(&r.value),
            exit_code: if r.passed { 0 } else { 1 },
            diagnostics: r.diagnostics,
        },
        Err(e) => {
            let code = e.exit_code();
            let value = json!({
                "command": cfg.command_name(),
                "status": if code == 1 { "fail" } else { "invalid-input" },
                "seed": cfg.seed,
                "timestamp": timestamp(),
                "error": e.to_string(),
            });
            Outcome { text: pretty(&value), exit_code: code, diagnostics: vec![e.to_string()] }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports contain only JSON values");
    s.push('\n');
    s
}

fn read_input(path: &PathBuf) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_document(&text)
}

fn common(cfg: &RunConfig, policy: Option<&SamplingPolicy>) -> Value {
    let mut v = json!({ "tolerances": tolerances_json(&cfg.tolerances()) });
    if let Some(p) = policy {
        v["samples"] = policy_json(p);
    }
    v
}

fn point_text(p: &Point) -> String {
    format!("x={:?} y={:?}", p.x, p.y)
}

fn tensors(cfg: &RunConfig, input: &PathBuf, x: Option<&[f64]>, y: Option<&[f64]>) -> CliResult<Report> {
    let m = metric_from_json(&read_input(input)?, "$")?;
    let n = m.dimension;
    let point = match (x, y) {
        (Some(x), Some(y)) => Point::new(x.to_vec(), y.to_vec()),
        (None, None) => cfg
            .policy(1)
            .sample_points(&m)
            .map_err(CliError::core("finsler-core", "sample_points"))?
            .remove(0),
        _ => return Err(CliError::schema("--x/--y", "give both or neither")),
    };
    if point.x.len() != n || point.y.len() != n {
        return Err(CliError::schema("--x/--y", format!("expected {n} coordinates each")));
    }
    let eval = FinslerEvaluator::new(&m, Depth::Douglas).map_err(CliError::core("finsler-core", "evaluator"))?;
    let geo = eval.at(&point.x, &point.y).map_err(CliError::core("finsler-core", "fundamental_tensor"))?;
    let op = CliError::core("finsler-core", "tensors");
    let (c_raised, dginv) = geo.cartan_raised();
    let list = vec![
        geo.fundamental(),
        geo.inverse(),
        geo.cartan(),
        c_raised,
        dginv,
        geo.spray().map_err(&op)?,
        geo.berwald().map_err(&op)?,
        geo.mean_berwald().map_err(&op)?,
        geo.mean_berwald_derivative().map_err(&op)?,
        geo.douglas().map_err(op)?,
    ];
    let checks = crosscheck_point(&m, &geo, Depth::Douglas).map_err(CliError::core("finsler-core", "crosscheck"))?;
    let passed = checks.iter().all(|c| c.passed);
    let diagnostics = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "finsler-core/crosscheck: {} deviates from its oracle by {:e} (ratio {:.3} to the band) at {}",
                c.tensor,
                c.max_deviation,
                c.worst_ratio,
                point_text(&c.point)
            )
        })
        .collect();
    let result = json!({
        "metric": metric_to_json(&m),
        "point": point_to_json(&point),
        "F_squared": geo.f_squared(),
        "tensors": list.iter().map(tensor_json).collect::<Vec<_>>(),
        "index_order": "upper indices first, then lower; row-major; 0-based offsets",
        "fd_crosscheck": checks.iter().map(comparison_json).collect::<Vec<_>>(),
    });
    Ok(Report { value: envelope("tensors", passed, cfg.seed, common(cfg, None), result), passed, diagnostics })
}

fn classify_metric(cfg: &RunConfig, m: &MetricSpec, policy: &SamplingPolicy) -> CliResult<Report> {
    let r = classify(m, policy, &cfg.tolerances()).map_err(CliError::core("finsler-core", "classify"))?;
    let passed = r.crosscheck.passed();
    let diagnostics = r
        .crosscheck
        .failures
        .iter()
        .map(|c| {
            format!(
                "finsler-core/classify: jet {} disagrees with the oracle by {:e} at {}",
                c.tensor,
                c.max_deviation,
                point_text(&c.point)
            )
        })
        .collect();
    let result = json!({ "metric": metric_to_json(m), "classification": classification_json(&r) });
    Ok(Report { value: envelope("classify", passed, cfg.seed, common(cfg, Some(policy)), result), passed, diagnostics })
}

fn classify_cmd(cfg: &RunConfig, input: &PathBuf) -> CliResult<Report> {
    let m = metric_from_json(&read_input(input)?, "$")?;
    classify_metric(cfg, &m, &cfg.policy(256))
}

#[derive(Default)]
struct BlockAggregate {
    deviation: f64,
    tolerance: f64,
    declared_zero: bool,
    worst: Option<Point>,
    failures: usize,
}

fn absorb(table: &mut BTreeMap<String, BlockAggregate>, formula: &str, r: &BlockReport) {
    for c in &r.checks {
        let a = table.entry(format!("{formula}/{}", c.block)).or_default();
        a.tolerance = c.tolerance;
        a.declared_zero = c.declared_zero;
        if !c.passed() {
            a.failures += 1;
        }
        if a.worst.is_none() || c.deviation > a.deviation {
            a.deviation = c.deviation;
            a.worst = Some(r.direct.point.clone());
        }
    }
}

fn equivalence_json(r: &EquivalenceReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| match &e.status {
            EntryStatus::Evaluated { left, right } => json!({
                "theorem": e.theorem.name(),
                "status": "evaluated",
                "left": left,
                "right": right,
                "agrees": e.agrees(),
            }),
            EntryStatus::Skipped(why) => json!({
                "theorem": e.theorem.name(),
                "status": "skipped",
                "reason": why,
            }),
        })
        .collect();
    json!({
        "entries": entries,
        "conditions": {
            "cartan_f1": r.conditions.cartan_f1,
            "dginv_f1": r.conditions.dginv_f1,
            "cartan_f2": r.conditions.cartan_f2,
            "trace_f2": r.conditions.trace_f2,
            "tolerance": r.conditions.tolerance,
        },
        "isotropy_residual": r.isotropy_residual,
        "composite": classification_json(&r.composite),
        "m1": classification_json(&r.m1),
        "m2": classification_json(&r.m2),
    })
}

fn dwp(cfg: &RunConfig, input: &PathBuf, theorem: Option<&str>) -> CliResult<Report> {
    let spec: DWPSpec = dwp_from_json(&read_input(input)?, "$")?;
    let selection = match theorem {
        None => Selection::All,
        Some(name) => Selection::Only(
            Theorem::from_name(name).ok_or_else(|| CliError::schema("--theorem", format!("unknown theorem \"{name}\"")))?,
        ),
    };
    let policy = cfg.policy(32);
    let composite = dwp_construct(&spec).map_err(CliError::core("warped", "dwp_construct"))?;
    let points = policy.sample_points(&composite).map_err(CliError::core("warped", "sample_points"))?;
    let wp = spec.is_wp().map_err(CliError::core("warped", "is_wp"))?;
    let mut table = BTreeMap::new();
    for p in &points {
        let g = dwp_fundamental_blocks(&spec, &composite, p).map_err(CliError::core("warped", "dwp_fundamental_blocks"))?;
        absorb(&mut table, "fundamental", &g);
        if wp {
            let s = wp_spray(&spec, &composite, p).map_err(CliError::core("warped", "wp_spray"))?;
            absorb(&mut table, "spray", &s);
            let b = wp_berwald_blocks(&spec, &composite, p).map_err(CliError::core("warped", "wp_berwald_blocks"))?;
            absorb(&mut table, "berwald", &b);
        }
    }
    let equivalences = check_theorem_equivalences(&spec, &policy, &cfg.tolerances(), selection)
        .map_err(CliError::core("warped", "check_theorem_equivalences"))?;

    let mut diagnostics = Vec::new();
    let mut blocks = serde_json::Map::new();
    for (name, a) in &table {
        if a.failures > 0 {
            diagnostics.push(format!(
                "warped/{}: block {} deviates by {:e} > tolerance {:e} at {}",
                name.split('/').next().unwrap_or_default(),
                name,
                a.deviation,
                a.tolerance,
                a.worst.as_ref().map(point_text).unwrap_or_default()
            ));
        }
        blocks.insert(
            name.clone(),
            json!({
                "deviation": a.deviation,
                "tolerance": a.tolerance,
                "declared_zero": a.declared_zero,
                "failures": a.failures,
                "worst_point": a.worst.as_ref().map(point_to_json),
                "engine": if a.declared_zero { "jet" } else { "formula-vs-jet" },
            }),
        );
    }
    for e in &equivalences.entries {
        if e.agrees() == Some(false) {
            diagnostics.push(format!("warped/check_theorem_equivalences: {} sides disagree (reported, not failed)", e.theorem.name()));
        }
    }
    let passed = table.values().all(|a| a.failures == 0);
    let result = json!({
        "spec": dwp_to_json(&spec),
        "composite_dimension": composite.dimension,
        "warped_product": wp,
        "block_formulas": blocks,
        "block_formulas_skipped": (!wp).then_some("spray and Berwald block formulas need f2 ≡ 1"),
        "equivalences": equivalence_json(&equivalences),
    });
    Ok(Report { value: envelope("dwp", passed, cfg.seed, common(cfg, Some(&policy)), result), passed, diagnostics })
}

fn theorem2d_json(case: &Theorem2DCase, r: &theorem2d::Theorem2DReport) -> Value {
    let stages: Vec<Value> = r
        .stages()
        .iter()
        .map(|(name, value, tol)| json!({"stage": name, "value": value, "tolerance": tol, "passed": value <= tol}))
        .collect();
    json!({
        "case": case_to_json(case),
        "status": status(r.passed()),
        "failing_stage": r.failing_stage,
        "stages": stages,
        "base_points": r.base_points,
        "samples": r.samples,
        "integrability_defect": r.integrability_defect,
        "min_eigenvalue": r.min_eigenvalue,
        "cartan_sup_norm": r.cartan_sup_norm,
        "condition_residual": r.condition_residual,
        "characteristic_residual": r.characteristic_residual,
        "gradient_error": r.gradient_error,
        "engine": {
            "characteristic": "jet",
            "cartan": "jet",
            "condition": "jet",
            "potential": "path-integral",
            "gradient": "fd",
        },
    })
}

fn verify(cfg: &RunConfig, input: Option<&PathBuf>, random: Option<usize>) -> CliResult<Report> {
    let cases: Vec<Theorem2DCase> = match (input, random) {
        (Some(path), None) => match read_input(path)? {
            Value::Array(xs) => {
                xs.iter().enumerate().map(|(k, v)| case_from_json(v, &format!("$/{}", k + 1))).collect::<CliResult<_>>()?
            }
            v => vec![case_from_json(&v, "$")?],
        },
        (None, Some(n)) => random_admissible_cases(cfg.seed, n),
        _ => return Err(CliError::schema("--input/--random-cases", "give exactly one")),
    };
    let policy = cfg.policy(256);
    let mut out = Vec::with_capacity(cases.len());
    let mut diagnostics = Vec::new();
    let mut passed = true;
    for (k, case) in cases.iter().enumerate() {
        let r = verify_main_theorem(case, &policy).map_err(CliError::core("theorem2d", "verify_main_theorem"))?;
        if let Some(stage) = r.failing_stage {
            passed = false;
            let (_, value, tol) = r.stages().into_iter().find(|s| s.0 == stage).unwrap_or((stage, f64::NAN, f64::NAN));
            diagnostics.push(format!(
                "theorem2d/verify_main_theorem: case {} failed stage {stage}: {value:e} > tolerance {tol:e}",
                k + 1
            ));
        }
        out.push(theorem2d_json(case, &r));
    }
    let result = json!({ "cases": out, "generated": random.is_some() });
    Ok(Report {
        value: envelope("verify-theorem2d", passed, cfg.seed, common(cfg, Some(&policy)), result),
        passed,
        diagnostics,
    })
}

fn probe(cfg: &RunConfig, budget: usize) -> Outcome {
    let record = match probe_n3(cfg.seed, budget) {
        Ok(r) => r,
        Err(e) => {
            let e = CliError::core("theorem2d", "probe_n3")(e);
            let line = json!({"kind": "summary", "status": "invalid-input", "seed": cfg.seed, "error": e.to_string(), "timestamp": timestamp()});
            return Outcome { text: format!("{line}\n"), exit_code: e.exit_code(), diagnostics: vec![e.to_string()] };
        }
    };
    let mut text = String::new();
    for c in &record.candidates {
        let line = json!({
            "kind": "candidate",
            "index": c.index,
            "family": c.family.name(),
            "parameters": c.parameters,
            "f_gradient": c.f_gradient,
            "residual": c.residual,
            "cartan_norm": c.cartan_norm,
            "feasible": c.feasible,
            "engine": "jet",
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    let best = record.best.map(|b| &record.candidates[b]);
    let summary = json!({
        "kind": "summary",
        "command": "probe-n3",
        "status": "pass",
        "seed": record.seed,
        "budget": budget,
        "cartan_floor": theorem2d::PROBE_CARTAN_FLOOR,
        "best_index": best.map(|c| c.index),
        "best_residual": best.map(|c| c.residual),
        "note": "exploratory record; no claim about higher dimensions",
        "timestamp": timestamp(),
    });
    text.push_str(&summary.to_string());
    text.push('\n');
    Outcome { text, exit_code: 0, diagnostics: Vec::new() }
}
