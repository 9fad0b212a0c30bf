use std::io::Write;
use std::time::Instant;

use folchar_core::classes::{
    bott_rep, dbott_rep, fiber_integrate_rep, flk_rep, twist_deformation, verify_prop31, ClassKind, ClassRep,
    PROP31_SIGN,
};
use folchar_core::foliation::{
    dtheta_pow_sign, verify_identity, ChartFoliation, DeformationData, Identity, IdentityInstance, IdentityReport,
};
use folchar_core::numeric::{admissible_lambda, class_coefficient, ParamManifold, QuadratureSpec, REFERENCE_NODES};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::manifest::{ComplexValue, TaskSpec, DEFAULT_CIRCLE, DEFAULT_TOLERANCE};
use crate::report::{class_rep, complex, Report, Status, TaskReport};
use crate::{InputError, Model};

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Quadrature nodes per axis.
    pub quad_nodes: usize,
    /// Include wall-clock times in the report.
    pub timing: bool,
    /// Base seed for generic instances when a task names none.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { quad_nodes: REFERENCE_NODES, timing: false, seed: 0 }
    }
}

struct Outcome {
    label: String,
    status: Status,
    message: Option<String>,
    details: Map<String, Value>,
}

impl Outcome {
    fn fail(label: String, message: String) -> Self {
        Outcome { label, status: Status::Fail, message: Some(message), details: Map::new() }
    }
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json object literal"),
    }
}

fn quad_for(man: &ParamManifold, opts: &RunOptions) -> Result<QuadratureSpec, String> {
    QuadratureSpec::uniform(man.dimension(), opts.quad_nodes).map_err(|e| e.to_string())
}

fn within(value: Complex64, expected: Complex64, tol: f64) -> (bool, f64) {
    let err = (value - expected).norm();
    (err <= tol * expected.norm().max(1.0), err)
}

pub fn run(model: &Model, opts: &RunOptions) -> Report {
    let start = Instant::now();
    let tasks: Vec<TaskReport> =
        model.manifest.tasks.iter().enumerate().map(|(index, spec)| run_task(model, index, spec, opts)).collect();
    assemble(model, tasks, opts, start)
}

fn assemble(model: &Model, tasks: Vec<TaskReport>, opts: &RunOptions, start: Instant) -> Report {
    let passed = tasks.iter().filter(|t| t.status == Status::Pass).count();
    Report {
        manifest: model.manifest.name.clone(),
        quadrature_nodes: opts.quad_nodes,
        seed: opts.seed,
        sigma: PROP31_SIGN,
        dtheta_pow_sign_rule: "(-1)^(q(q-1)/2)",
        failed: tasks.len() - passed,
        passed,
        tasks,
        elapsed_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

fn run_task(model: &Model, index: usize, spec: &TaskSpec, opts: &RunOptions) -> TaskReport {
    let start = Instant::now();
    let (task, outcome) = match spec {
        TaskSpec::Check { identity, q, seeds, seed, chart, deformation } => {
            ("check", check_task(model, identity, *q, *seeds, *seed, chart.as_deref(), deformation.as_deref(), opts))
        }
        TaskSpec::Class { class, chart, deformation, manifold, m, circle, expect, tolerance } => (
            "class",
            class_task(
                model,
                class,
                chart.as_deref(),
                deformation.as_deref(),
                manifold.as_deref(),
                *m,
                circle,
                *expect,
                *tolerance,
                opts,
            ),
        ),
        TaskSpec::Prop31 { m, chart, deformation, manifold, circle, expect, tolerance } => (
            "prop31",
            prop31_task(
                model,
                *m,
                chart.as_deref(),
                deformation.as_deref(),
                manifold.as_deref(),
                circle,
                *expect,
                *tolerance,
                opts,
            ),
        ),
        TaskSpec::Sweep { parameter, start: a, stop: b, steps, m, chart, deformation, manifold, circle, max_step } => (
            "sweep",
            sweep_task(
                model,
                parameter,
                *a,
                *b,
                *steps,
                m,
                chart.as_deref(),
                deformation.as_deref(),
                manifold.as_deref(),
                circle,
                *max_step,
                opts,
            ),
        ),
    };
    TaskReport {
        index,
        task: task.into(),
        label: outcome.label,
        status: outcome.status,
        message: outcome.message,
        details: outcome.details,
        elapsed_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

fn identity_details(reports: &[IdentityReport]) -> Map<String, Value> {
    let passed = reports.iter().filter(|r| r.passed()).count();
    let mut d = obj(json!({
        "instances": reports.len(),
        "passed_instances": passed,
    }));
    if let Some(first) = reports.first() {
        d.insert("q".into(), json!(first.q));
        d.insert("notes".into(), json!(first.notes));
        if first.identity == Identity::DthetaPow {
            d.insert("sign_factor".into(), json!(dtheta_pow_sign(first.q)));
            d.insert("found_signs".into(), json!(reports.iter().map(|r| r.sign).collect::<Vec<_>>()));
        }
    }
    if let Some(bad) = reports.iter().find(|r| !r.passed()) {
        d.insert("residual".into(), json!(bad.residual_text()));
        d.insert("failing_notes".into(), json!(bad.notes));
    }
    d
}

#[allow(clippy::too_many_arguments)]
fn check_task(
    model: &Model,
    identity: &str,
    q: Option<usize>,
    seeds: Option<usize>,
    seed: Option<u64>,
    chart: Option<&str>,
    deformation: Option<&str>,
    opts: &RunOptions,
) -> Outcome {
    let id: Identity = match identity.parse() {
        Ok(id) => id,
        Err(e) => return Outcome::fail(identity.into(), e.to_string()),
    };
    if chart.is_some() || deformation.is_some() || q.is_none() {
        return check_on_chart(model, id, chart, deformation);
    }
    let q = q.expect("checked above");
    let n = seeds.unwrap_or(1);
    let base = seed.unwrap_or(opts.seed);
    let label = format!("{id} q={q} seeds={base}..{}", base + n as u64);
    let results: Result<Vec<IdentityReport>, String> = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let inst = IdentityInstance::generic(q, base + k).map_err(|e| e.to_string())?;
            verify_identity(id, &inst).map_err(|e| e.to_string())
        })
        .collect();
    match results {
        Err(e) => Outcome::fail(label, e),
        Ok(reports) => {
            let ok = reports.iter().all(|r| r.passed());
            let mut details = identity_details(&reports);
            details.insert("identity".into(), json!(id.name()));
            details.insert("base_seed".into(), json!(base));
            Outcome {
                label,
                status: if ok { Status::Pass } else { Status::Fail },
                message: (!ok).then(|| "nonzero residual".to_string()),
                details,
            }
        }
    }
}

fn check_on_chart(model: &Model, id: Identity, chart: Option<&str>, deformation: Option<&str>) -> Outcome {
    let label = format!("{id} on {}", chart.unwrap_or("chart"));
    let (name, ch) = match model.chart(chart) {
        Ok(x) => x,
        Err(e) => return Outcome::fail(label, e.0),
    };
    let label = format!("{id} on {name}");
    let def = model.deformation(deformation, name).ok().cloned();
    let inst = IdentityInstance { chart: Some(ch.clone()), deformation: def, ..Default::default() };
    match verify_identity(id, &inst) {
        Err(e) => Outcome::fail(label, e.to_string()),
        Ok(r) => {
            let ok = r.passed();
            let mut details = identity_details(std::slice::from_ref(&r));
            details.insert("identity".into(), json!(id.name()));
            details.insert("chart".into(), json!(name));
            Outcome {
                label,
                status: if ok { Status::Pass } else { Status::Fail },
                message: (!ok).then(|| format!("nonzero residual {}", r.residual_text())),
                details,
            }
        }
    }
}

/// Integrates a representative on `man`, treating forms of degree above the
/// dimension as zero.
fn integrate_rep(rep: &ClassRep, man: &ParamManifold, opts: &RunOptions) -> Result<Complex64, String> {
    match rep.degree() {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(d) if d > man.dimension() => Ok(Complex64::new(0.0, 0.0)),
        Some(_) => class_coefficient(rep, man, &quad_for(man, opts)?).map_err(|e| e.to_string()),
    }
}

#[allow(clippy::too_many_arguments)]
fn class_task(
    model: &Model,
    class: &str,
    chart: Option<&str>,
    deformation: Option<&str>,
    manifold: Option<&str>,
    m: Option<i64>,
    circle: &Option<String>,
    expect: Option<ComplexValue>,
    tolerance: Option<f64>,
    opts: &RunOptions,
) -> Outcome {
    let mut label = class.to_string();
    if let Some(m) = m {
        label.push_str(&format!(" m={m}"));
    }
    let result = (|| -> Result<(ClassRep, Complex64, &ParamManifold), String> {
        let kind: ClassKind = class.parse().map_err(|e: folchar_core::classes::ClassError| e.to_string())?;
        let (name, ch) = model.chart(chart).map_err(|e| e.0)?;
        let man = model.manifold(manifold).map_err(|e| e.0)?;
        let rep = match kind {
            ClassKind::Bott => bott_rep(ch),
            ClassKind::Dbott => dbott_rep(ch, model.deformation(deformation, name).map_err(|e| e.0)?),
            _ => {
                let def = model.deformation(deformation, name).map_err(|e| e.0)?;
                match m {
                    None => flk_rep(ch, def),
                    Some(m) => {
                        let t = circle.as_deref().unwrap_or(DEFAULT_CIRCLE);
                        let (tw, td) =
                            twist_deformation(ch, def, m, t, model.rules.as_ref()).map_err(|e| e.to_string())?;
                        let flk = flk_rep(&tw, &td);
                        if man.dimension() == 2 * ch.q() + 2 {
                            flk
                        } else {
                            fiber_integrate_rep(&flk, t).map_err(|e| e.to_string())?
                        }
                    }
                }
            }
        };
        let value = integrate_rep(&rep, man, opts)?;
        Ok((rep, value, man))
    })();
    match result {
        Err(e) => Outcome::fail(label, e),
        Ok((rep, value, man)) => {
            label = format!("{} on {}", label, man.name());
            let mut details = obj(json!({
                "class": class_rep(&rep),
                "value": complex(value),
                "manifold": man.name(),
                "parameters": man.parameters().iter().map(|(k, v)| (k.clone(), complex(*v))).collect::<Map<_, _>>(),
            }));
            let mut status = Status::Pass;
            let mut message = None;
            if let Some(e) = expect {
                let tol = tolerance.unwrap_or(DEFAULT_TOLERANCE);
                let (ok, err) = within(value, e.value(), tol);
                details.insert("expected".into(), complex(e.value()));
                details.insert("error".into(), json!(err));
                details.insert("tolerance".into(), json!(tol));
                if !ok {
                    status = Status::Fail;
                    message = Some(format!("value {value} differs from expected {} by {err:e}", e.value()));
                }
            }
            Outcome { label, status, message, details }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn prop31_task(
    model: &Model,
    m: i64,
    chart: Option<&str>,
    deformation: Option<&str>,
    manifold: Option<&str>,
    circle: &Option<String>,
    expect: Option<ComplexValue>,
    tolerance: Option<f64>,
    opts: &RunOptions,
) -> Outcome {
    let label = format!("m={m}");
    let t = circle.as_deref().unwrap_or(DEFAULT_CIRCLE);
    let (name, ch) = match model.chart(chart) {
        Ok(x) => x,
        Err(e) => return Outcome::fail(label, e.0),
    };
    let def = match model.deformation(deformation, name) {
        Ok(d) => d,
        Err(e) => return Outcome::fail(label, e.0),
    };
    let r = match verify_prop31(ch, def, m, t, model.rules.as_ref()) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(label, e.to_string()),
    };
    let mut details = obj(json!({
        "m": m,
        "sigma": r.sigma,
        "symbolic_difference": r.symbolic_difference.render(),
        "fiber_difference": r.fiber_difference.render(),
        "flk_twisted": class_rep(&r.flk_twisted),
        "flk_fiber": class_rep(&r.flk_fiber),
        "dbott": class_rep(&r.dbott),
    }));
    let mut status = if r.passed() { Status::Pass } else { Status::Fail };
    let mut message = (!r.passed()).then(|| "symbolic twist identity has a nonzero difference".to_string());
    if manifold.is_some() || expect.is_some() {
        let man = match model.manifold(manifold) {
            Ok(man) => man,
            Err(e) => return Outcome::fail(label, e.0),
        };
        let values = integrate_rep(&r.flk_fiber, man, opts).and_then(|f| Ok((f, integrate_rep(&r.dbott, man, opts)?)));
        match values {
            Err(e) => return Outcome::fail(label, e),
            Ok((fiber, dbott)) => {
                details.insert("manifold".into(), json!(man.name()));
                details.insert("flk_fiber_value".into(), complex(fiber));
                details.insert("dbott_value".into(), complex(dbott));
                let predicted = -(r.sigma * m) as f64 * dbott;
                details.insert("sigma_times_minus_m_dbott".into(), complex(predicted));
                if let Some(e) = expect {
                    let tol = tolerance.unwrap_or(DEFAULT_TOLERANCE);
                    let (ok, err) = within(fiber, e.value(), tol);
                    details.insert("expected".into(), complex(e.value()));
                    details.insert("error".into(), json!(err));
                    details.insert("tolerance".into(), json!(tol));
                    if !ok {
                        status = Status::Fail;
                        message = Some(format!("fiber value {fiber} differs from expected {} by {err:e}", e.value()));
                    }
                }
            }
        }
    }
    Outcome { label, status, message, details }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: Complex64,
    pub bott: Complex64,
    pub dbott: Complex64,
    pub flk_fiber: Complex64,
    pub m: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub m: i64,
    pub max_step_bott: f64,
    pub max_step_dbott: f64,
    pub max_step_flk_fiber: f64,
    /// max − min of |π_!FLK°| over the path
    pub flk_fiber_spread: f64,
}

/// Points a, a + (b−a)/(n−1), …, b; a single point when n = 1.
fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Evaluates Bott, DBott and π_!FLK° of the m-twisted chart along a real path of
/// the parameter. Rows are ordered by parameter value, then by m.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    chart: &ChartFoliation,
    deformation: &DeformationData,
    rules: Option<&folchar_core::cdga::RuleSet>,
    manifold: &ParamManifold,
    parameter: &str,
    (start, stop, steps): (f64, f64, usize),
    ms: &[i64],
    circle: &str,
    quad_nodes: usize,
) -> Result<Vec<SweepRow>, String> {
    let points = grid(start, stop, steps);
    if let Some(bad) = points.iter().find(|&&x| !admissible_lambda(Complex64::new(x, 0.0))) {
        return Err(format!("{parameter} = {bad} lies on the closed negative real axis"));
    }
    let bott = bott_rep(chart);
    let dbott = dbott_rep(chart, deformation);
    let fibers: Vec<(i64, ClassRep)> = ms
        .iter()
        .map(|&m| {
            let r = verify_prop31(chart, deformation, m, circle, rules).map_err(|e| e.to_string())?;
            Ok((m, r.flk_fiber))
        })
        .collect::<Result<_, String>>()?;
    let quad = QuadratureSpec::uniform(manifold.dimension(), quad_nodes).map_err(|e| e.to_string())?;
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&x| {
            let l = Complex64::new(x, 0.0);
            let man = manifold.clone().with_parameter(parameter, l);
            let eval = |rep: &ClassRep| class_coefficient(rep, &man, &quad).map_err(|e| e.to_string());
            let b = eval(&bott)?;
            let d = eval(&dbott)?;
            fibers
                .iter()
                .map(|(m, rep)| Ok(SweepRow { lambda: l, bott: b, dbott: d, flk_fiber: eval(rep)?, m: *m }))
                .collect()
        })
        .collect::<Result<_, String>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

pub fn summarize(rows: &[SweepRow], ms: &[i64]) -> Vec<SweepSummary> {
    ms.iter()
        .map(|&m| {
            let col: Vec<&SweepRow> = rows.iter().filter(|r| r.m == m).collect();
            let max_step = |f: &dyn Fn(&SweepRow) -> Complex64| {
                col.windows(2).map(|w| (f(w[1]) - f(w[0])).norm()).fold(0.0, f64::max)
            };
            let norms: Vec<f64> = col.iter().map(|r| r.flk_fiber.norm()).collect();
            let spread = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - norms.iter().cloned().fold(f64::INFINITY, f64::min);
            SweepSummary {
                m,
                max_step_bott: max_step(&|r| r.bott),
                max_step_dbott: max_step(&|r| r.dbott),
                max_step_flk_fiber: max_step(&|r| r.flk_fiber),
                flk_fiber_spread: if col.is_empty() { 0.0 } else { spread },
            }
        })
        .collect()
}

pub const CSV_HEADER: [&str; 9] =
    ["lambda_re", "lambda_im", "bott_re", "bott_im", "dbott_re", "dbott_im", "flk_fiber_re", "flk_fiber_im", "m"];

/// Shortest round-trip form, with an exponent for very small or large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.lambda.re),
            num(r.lambda.im),
            num(r.bott.re),
            num(r.bott.im),
            num(r.dbott.re),
            num(r.dbott.im),
            num(r.flk_fiber.re),
            num(r.flk_fiber.im),
            r.m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn row_json(r: &SweepRow) -> Value {
    json!({
        "lambda": complex(r.lambda),
        "bott": complex(r.bott),
        "dbott": complex(r.dbott),
        "flk_fiber": complex(r.flk_fiber),
        "m": r.m,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep_task(
    model: &Model,
    parameter: &str,
    a: f64,
    b: f64,
    steps: usize,
    m: &[i64],
    chart: Option<&str>,
    deformation: Option<&str>,
    manifold: Option<&str>,
    circle: &Option<String>,
    max_step: Option<f64>,
    opts: &RunOptions,
) -> Outcome {
    let ms: Vec<i64> = if m.is_empty() { vec![1] } else { m.to_vec() };
    let label = format!("{parameter} {a}:{b}:{steps} m={ms:?}");
    let result = (|| -> Result<Vec<SweepRow>, String> {
        let (name, ch) = model.chart(chart).map_err(|e| e.0)?;
        let def = model.deformation(deformation, name).map_err(|e| e.0)?;
        let man = model.manifold(manifold).map_err(|e| e.0)?;
        let t = circle.as_deref().unwrap_or(DEFAULT_CIRCLE);
        sweep(ch, def, model.rules.as_ref(), man, parameter, (a, b, steps), &ms, t, opts.quad_nodes)
    })();
    let rows = match result {
        Ok(rows) => rows,
        Err(e) => return Outcome::fail(label, e),
    };
    let summary = summarize(&rows, &ms);
    let mut status = Status::Pass;
    let mut message = None;
    if let Some(bound) = max_step {
        if let Some(s) = summary.iter().find(|s| s.max_step_flk_fiber >= bound) {
            status = Status::Fail;
            message = Some(format!("m={}: successive difference {} exceeds {bound}", s.m, s.max_step_flk_fiber));
        }
    }
    let details = obj(json!({
        "parameter": parameter,
        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
        "continuity": summary.iter().map(|s| json!({
            "m": s.m,
            "max_step_bott": s.max_step_bott,
            "max_step_dbott": s.max_step_dbott,
            "max_step_flk_fiber": s.max_step_flk_fiber,
            "flk_fiber_spread": s.flk_fiber_spread,
        })).collect::<Vec<_>>(),
        "max_step_bound": max_step,
    }));
    Outcome { label, status, message, details }
}

/// Runs the manifest's check tasks for one identity; without such tasks, runs it on
/// the manifest's chart and deformation.
pub fn check_identity(model: &Model, identity: &str, opts: &RunOptions) -> Result<Report, InputError> {
    let id: Identity =
        identity.parse().map_err(|e: folchar_core::foliation::FoliationError| InputError(e.to_string()))?;
    let start = Instant::now();
    let mut tasks: Vec<TaskReport> = model
        .manifest
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, TaskSpec::Check { identity, .. } if identity == id.name()))
        .map(|(i, t)| run_task(model, i, t, opts))
        .collect();
    if tasks.is_empty() {
        if model.charts.is_empty() {
            return Err(InputError(format!("manifest has no `{id}` check task and no chart to check it on")));
        }
        let o = check_on_chart(model, id, None, None);
        tasks.push(TaskReport {
            index: 0,
            task: "check".into(),
            label: o.label,
            status: o.status,
            message: o.message,
            details: o.details,
            elapsed_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        });
    }
    Ok(assemble(model, tasks, opts, start))
}
