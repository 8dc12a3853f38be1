//! JSON and CSV renderings of matrices, count tables and reports.
//!
//! Reals are written with 12 significant digits in `%g` style. JSON objects
//! keep the key order in which they are built here; each builder documents
//! its order. Matrices are nested arrays of `[re, im]` pairs next to a
//! `"basis"` field naming the row/column ordering.

use std::str::FromStr;

use distill_core::channels::ChiMatrix;
use distill_core::matcore::{CMatrix, C64};
use distill_core::metrics::MetricsReport;
use distill_core::pipelines::{
    DistillationReport, MetricErrors, QptCharacterization, StageReport, SweepRow, Table1Row,
};
use distill_core::tomography::{Analyzer, CountTable, Setting, TomoResult};
use distill_core::uncertainty::McReport;
use serde_json::{json, Map, Number, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// `x` with 12 significant digits, `%g` style: fixed notation for decimal
/// exponents in `[-5, 12)`, otherwise `d.ddde±XX`; trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number carrying exactly [`fmt_num`]'s text; non-finite becomes null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&fmt_num(x)).expect("formatted reals are valid JSON numbers"))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    OneQubit,
    TwoQubit,
    Pauli,
}

impl Basis {
    pub fn label(self) -> &'static str {
        match self {
            Basis::OneQubit => "H,V",
            Basis::TwoQubit => "HH,HV,VH,VV",
            Basis::Pauli => "I,X,Y,Z",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        [Basis::OneQubit, Basis::TwoQubit, Basis::Pauli]
            .into_iter()
            .find(|b| b.label() == s)
    }

    fn dim(self) -> usize {
        match self {
            Basis::OneQubit => 2,
            _ => 4,
        }
    }

    pub fn for_state(dim: usize) -> Self {
        if dim == 2 {
            Basis::OneQubit
        } else {
            Basis::TwoQubit
        }
    }
}

/// `{"basis", "matrix"}`.
pub fn matrix_json(m: &CMatrix, basis: Basis) -> Value {
    let n = m.dim();
    let rows: Vec<Value> = (0..n)
        .map(|i| Value::Array((0..n).map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)])).collect()))
        .collect();
    json!({ "basis": basis.label(), "matrix": rows })
}

pub fn matrix_from_json(v: &Value) -> Result<(CMatrix, Basis), FormatError> {
    let basis = v
        .get("basis")
        .and_then(Value::as_str)
        .and_then(Basis::from_label)
        .ok_or_else(|| invalid("missing or unknown \"basis\""))?;
    let rows = v
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("missing \"matrix\""))?;
    let n = basis.dim();
    if rows.len() != n {
        return Err(invalid(format!("expected {n} rows, found {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| invalid("ragged matrix row"))?;
        for pair in row {
            let p = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| invalid("entry is not [re, im]"))?;
            let re = p[0].as_f64().ok_or_else(|| invalid("non-numeric entry"))?;
            let im = p[1].as_f64().ok_or_else(|| invalid("non-numeric entry"))?;
            entries.push(C64::new(re, im));
        }
    }
    Ok((CMatrix::from_entries(n, entries), basis))
}

pub fn chi_json(chi: &ChiMatrix) -> Value {
    matrix_json(chi.matrix(), Basis::Pauli)
}

fn setting_arms(s: Setting) -> (char, Option<char>) {
    match s {
        Setting::One(a) => (a.label(), None),
        Setting::Two(a, b) => (a.label(), Some(b.label())),
    }
}

/// CSV with header `arm1,arm2,count`; `arm2` is empty for one-photon tables.
pub fn counts_csv(t: &CountTable) -> String {
    let mut w = csv_writer();
    w.write_record(["arm1", "arm2", "count"]).expect("in-memory write");
    for (s, n) in t.iter() {
        let (a, b) = setting_arms(s);
        w.write_record([a.to_string(), b.map(String::from).unwrap_or_default(), n.to_string()])
            .expect("in-memory write");
    }
    finish(w)
}

pub fn counts_from_csv(text: &str, acquisition_scale: f64) -> Result<CountTable, FormatError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["arm1", "arm2", "count"] {
        return Err(invalid("count table header must be arm1,arm2,count"));
    }
    let mut table = CountTable::new(acquisition_scale).map_err(|e| invalid(e.to_string()))?;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let arm = |s: &str| -> Result<Option<Analyzer>, FormatError> {
            if s.is_empty() {
                return Ok(None);
            }
            let mut chars = s.chars();
            match (chars.next().and_then(Analyzer::from_label), chars.next()) {
                (Some(a), None) => Ok(Some(a)),
                _ => Err(invalid(format!("row {}: unknown analyzer {s:?}", line + 1))),
            }
        };
        let a = arm(&rec[0])?.ok_or_else(|| invalid(format!("row {}: empty arm1", line + 1)))?;
        let setting = match arm(&rec[1])? {
            Some(b) => Setting::Two(a, b),
            None => Setting::One(a),
        };
        let n: u64 = rec[2].parse().map_err(|_| {
            invalid(format!(
                "row {}: count {:?} is not a nonnegative integer",
                line + 1,
                &rec[2]
            ))
        })?;
        table.insert(setting, n);
    }
    Ok(table)
}

/// `{"acquisition_scale", "counts": [{"arm1", "arm2", "count"}]}`.
pub fn counts_json(t: &CountTable) -> Value {
    let rows: Vec<Value> = t
        .iter()
        .map(|(s, n)| {
            let (a, b) = setting_arms(s);
            json!({ "arm1": a.to_string(), "arm2": b.map(String::from), "count": n })
        })
        .collect();
    json!({ "acquisition_scale": num(t.acquisition_scale()), "counts": rows })
}

/// `{"purity", "fidelity_bell", "eof", "concurrence", "epsilon_exp", "lambda_exp"}`.
pub fn metrics_json(r: &MetricsReport) -> Value {
    json!({
        "purity": num(r.purity),
        "fidelity_bell": num(r.fidelity_bell),
        "eof": num(r.eof),
        "concurrence": num(r.concurrence),
        "epsilon_exp": opt_num(r.epsilon_exp),
        "lambda_exp": opt_num(r.lambda_exp),
    })
}

/// `{"mean", "std", "n_trials", "skipped", "seed"}`.
pub fn mc_json(r: &McReport) -> Value {
    json!({
        "mean": num(r.mean),
        "std": num(r.std),
        "n_trials": r.n_trials,
        "skipped": r.skipped,
        "seed": r.seed,
    })
}

fn errors_json(e: &MetricErrors) -> Value {
    json!({
        "purity": mc_json(&e.purity),
        "fidelity_bell": mc_json(&e.fidelity_bell),
        "eof": mc_json(&e.eof),
        "concurrence": mc_json(&e.concurrence),
        "epsilon_exp": mc_json(&e.epsilon_exp),
        "lambda_exp": mc_json(&e.lambda_exp),
    })
}

/// `{"rho", "method", "log_likelihood", "iterations", "converged", "clipped_mass"}`.
pub fn tomo_json(t: &TomoResult) -> Value {
    json!({
        "rho": matrix_json(t.rho.matrix(), Basis::for_state(t.rho.dim())),
        "method": t.method.name(),
        "log_likelihood": opt_num(t.log_likelihood),
        "iterations": t.iterations,
        "converged": t.converged,
        "clipped_mass": num(t.clipped_mass),
    })
}

/// `{"model", "reconstructed", "errors", "state", "tomography", "counts"}`.
fn stage_json(s: &StageReport) -> Value {
    json!({
        "model": metrics_json(&s.model),
        "reconstructed": metrics_json(&s.reconstructed),
        "errors": s.errors.as_ref().map_or(Value::Null, errors_json),
        "state": matrix_json(s.state.matrix(), Basis::TwoQubit),
        "tomography": tomo_json(&s.tomography),
        "counts": counts_json(&s.counts),
    })
}

/// `{"success_prob", "fitted_tv", "initial", "distilled"}`.
pub fn distill_json(r: &DistillationReport) -> Value {
    json!({
        "success_prob": num(r.success_prob),
        "fitted_tv": opt_num(r.fitted_tv),
        "initial": stage_json(&r.initial),
        "distilled": stage_json(&r.distilled),
    })
}

const METRIC_KEYS: [&str; 6] = [
    "purity",
    "fidelity_bell",
    "eof",
    "concurrence",
    "epsilon_exp",
    "lambda_exp",
];

fn metric_values(r: &MetricsReport) -> [Option<f64>; 6] {
    [
        Some(r.purity),
        Some(r.fidelity_bell),
        Some(r.eof),
        Some(r.concurrence),
        r.epsilon_exp,
        r.lambda_exp,
    ]
}

fn cell(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(fmt_num).unwrap_or_default()
}

/// Flat two-stage summary, one row per stage:
/// `stage,success_prob,<metrics>,model_<metrics>`.
pub fn distill_csv(r: &DistillationReport) -> String {
    let mut w = csv_writer();
    let mut header = vec!["stage".to_string(), "success_prob".to_string()];
    header.extend(METRIC_KEYS.iter().map(|k| k.to_string()));
    header.extend(METRIC_KEYS.iter().map(|k| format!("model_{k}")));
    header.extend(METRIC_KEYS.iter().map(|k| format!("{k}_std")));
    w.write_record(&header).expect("in-memory write");
    for (name, s, p) in [
        ("initial", &r.initial, 1.0),
        ("distilled", &r.distilled, r.success_prob),
    ] {
        let mut row = vec![name.to_string(), fmt_num(p)];
        row.extend(metric_values(&s.reconstructed).map(cell));
        row.extend(metric_values(&s.model).map(cell));
        let stds: [Option<f64>; 6] = match &s.errors {
            Some(e) => [
                e.purity,
                e.fidelity_bell,
                e.eof,
                e.concurrence,
                e.epsilon_exp,
                e.lambda_exp,
            ]
            .map(|m| Some(m.std)),
            None => [None; 6],
        };
        row.extend(stds.map(cell));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// `{"parameter", "rows": [{"value", "success_prob", "reconstructed", "model"}]}`.
pub fn sweep_json(parameter: &str, rows: &[SweepRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "value": num(r.value),
                "success_prob": num(r.success_prob),
                "reconstructed": metrics_json(&r.reconstructed),
                "model": metrics_json(&r.model),
            })
        })
        .collect();
    json!({ "parameter": parameter, "rows": rows })
}

/// `<parameter>,success_prob,<metrics>,model_<metrics>`.
pub fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut w = csv_writer();
    let mut header = vec![parameter.to_string(), "success_prob".to_string()];
    header.extend(METRIC_KEYS.iter().map(|k| k.to_string()));
    header.extend(METRIC_KEYS.iter().map(|k| format!("model_{k}")));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut row = vec![fmt_num(r.value), fmt_num(r.success_prob)];
        row.extend(metric_values(&r.reconstructed).map(cell));
        row.extend(metric_values(&r.model).map(cell));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// Per row: `{"row", "family", "fitted_tv", "model": {...}, "published": {...},
/// "eof_deviation", "lambda_deviation", "success_prob", "reconstructed"}`.
pub fn table1_json(rows: &[Table1Row]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let d = &r.report.distilled.model;
            let i = &r.report.initial.model;
            let p = &r.published;
            json!({
                "row": r.index,
                "family": p.family.name(),
                "fitted_tv": num(r.fitted_tv),
                "model": {
                    "initial_epsilon": opt_num(i.epsilon_exp),
                    "initial_lambda": opt_num(i.lambda_exp),
                    "initial_fidelity": num(i.fidelity_bell),
                    "initial_eof": num(i.eof),
                    "distilled_epsilon": num(r.model_epsilon),
                    "distilled_lambda": num(r.model_lambda),
                    "distilled_fidelity": num(d.fidelity_bell),
                    "distilled_eof": num(d.eof),
                },
                "published": {
                    "initial_epsilon": [num(p.initial_epsilon.value), num(p.initial_epsilon.error)],
                    "initial_lambda": [num(p.initial_lambda.value), num(p.initial_lambda.error)],
                    "initial_fidelity": [num(p.initial_fidelity.value), num(p.initial_fidelity.error)],
                    "initial_eof": [num(p.initial_eof.value), num(p.initial_eof.error)],
                    "distilled_epsilon": [num(p.distilled_epsilon.value), num(p.distilled_epsilon.error)],
                    "distilled_lambda": [num(p.distilled_lambda.value), num(p.distilled_lambda.error)],
                    "distilled_fidelity": [num(p.distilled_fidelity.value), num(p.distilled_fidelity.error)],
                    "distilled_eof": [num(p.distilled_eof.value), num(p.distilled_eof.error)],
                },
                "eof_deviation": num(r.eof_deviation),
                "lambda_deviation": num(r.lambda_deviation),
                "success_prob": num(r.report.success_prob),
                "reconstructed": {
                    "initial": metrics_json(&r.report.initial.reconstructed),
                    "distilled": metrics_json(&r.report.distilled.reconstructed),
                },
            })
        })
        .collect();
    json!({ "rows": rows })
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut w = csv_writer();
    w.write_record([
        "row",
        "family",
        "fitted_tv",
        "success_prob",
        "model_distilled_epsilon",
        "model_distilled_lambda",
        "model_distilled_fidelity",
        "model_distilled_eof",
        "published_distilled_epsilon",
        "published_distilled_lambda",
        "published_distilled_fidelity",
        "published_distilled_eof",
        "eof_deviation",
        "lambda_deviation",
    ])
    .expect("in-memory write");
    for r in rows {
        let d = &r.report.distilled.model;
        let p = &r.published;
        w.write_record([
            r.index.to_string(),
            p.family.name().to_string(),
            fmt_num(r.fitted_tv),
            fmt_num(r.report.success_prob),
            fmt_num(r.model_epsilon),
            fmt_num(r.model_lambda),
            fmt_num(d.fidelity_bell),
            fmt_num(d.eof),
            fmt_num(p.distilled_epsilon.value),
            fmt_num(p.distilled_lambda.value),
            fmt_num(p.distilled_fidelity.value),
            fmt_num(p.distilled_eof.value),
            fmt_num(r.eof_deviation),
            fmt_num(r.lambda_deviation),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// `{"tv_true", "fitted_tv", "process_fidelity", "trace", "probe_weights",
/// "clipped_mass", "chi", "chi_raw"}`.
pub fn qpt_json(q: &QptCharacterization) -> Value {
    json!({
        "tv_true": num(q.tv_true),
        "fitted_tv": num(q.fitted_tv),
        "process_fidelity": num(q.process_fidelity),
        "trace": num(q.result.chi.trace()),
        "probe_weights": q.result.probe_weights.iter().map(|&w| num(w)).collect::<Vec<_>>(),
        "clipped_mass": num(q.result.clipped_mass),
        "chi": chi_json(&q.result.chi),
        "chi_raw": chi_json(&q.result.chi_raw),
    })
}

/// Any JSON document as `key,value` rows with dotted/indexed key paths.
pub fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut w = csv_writer();
    w.write_record(["key", "value"]).expect("in-memory write");
    for (k, x) in rows {
        w.write_record([k, x]).expect("in-memory write");
    }
    finish(w)
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Value, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Builds an object in insertion order.
pub fn object(entries: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in entries {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}
