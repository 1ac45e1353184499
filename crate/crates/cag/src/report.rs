//! Text, CSV and JSON renderings of single records and the counterexample report.

use std::fmt::Write as _;

use cag_core::counterexample::CounterexampleReport;
use serde_json::{Map, Value};

use crate::format::{fmt_f64, json_f64};

/// Ordered key-value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Map<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record(Map::new())
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn float(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.into(), json_f64(v));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn value(mut self, key: &str, v: Value) -> Self {
        self.0.insert(key.into(), v);
        self
    }

    pub fn to_json(&self) -> String {
        Value::Object(self.0.clone()).to_string()
    }

    /// Header line plus one value line; nested values are written as JSON text.
    pub fn to_csv(&self) -> String {
        let header: Vec<&str> = self.0.keys().map(String::as_str).collect();
        let values: Vec<String> = self.0.values().map(csv_cell).collect();
        format!("{}\n{}\n", header.join(","), values.join(","))
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => {
            let s = other.to_string().replace('"', "\"\"");
            format!("\"{s}\"")
        }
    }
}

pub const COUNTEREXAMPLE_HEADER: &str = "k,y,term,weighted_term,partial,weighted_partial,log2_n,ln_n,ln_m,m_ratio,m_tail,connect_lower,connect_lower_holds,above_floor,lambda,half_ln_n,lambda_holds";

pub fn counterexample_csv(report: &CounterexampleReport) -> String {
    let mut out = String::from(COUNTEREXAMPLE_HEADER);
    out.push('\n');
    for (m, r) in report.moments.iter().zip(&report.rows) {
        let cells = [
            m.k.to_string(),
            m.y.to_string(),
            fmt_f64(m.term),
            fmt_f64(m.weighted_term),
            fmt_f64(m.partial),
            fmt_f64(m.weighted_partial),
            fmt_f64(r.log2_n),
            fmt_f64(r.ln_n),
            fmt_f64(r.ln_m),
            fmt_f64(r.m_ratio),
            fmt_f64(r.m_tail),
            fmt_f64(r.connect_lower),
            r.connect_lower_holds.to_string(),
            r.above_floor.to_string(),
            fmt_f64(r.lambda),
            fmt_f64(r.half_ln_n),
            r.lambda_holds.to_string(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn counterexample_json(report: &CounterexampleReport) -> Value {
    let rows: Vec<Value> = report
        .moments
        .iter()
        .zip(&report.rows)
        .map(|(m, r)| {
            Record::new()
                .int("k", m.k as u64)
                .int("y", m.y as u64)
                .float("term", m.term)
                .float("weighted_term", m.weighted_term)
                .float("partial", m.partial)
                .float("weighted_partial", m.weighted_partial)
                .float("log2_n", r.log2_n)
                .float("ln_n", r.ln_n)
                .float("ln_m", r.ln_m)
                .float("m_ratio", r.m_ratio)
                .float("m_tail", r.m_tail)
                .float("connect_lower", r.connect_lower)
                .flag("connect_lower_holds", r.connect_lower_holds)
                .flag("above_floor", r.above_floor)
                .float("lambda", r.lambda)
                .float("half_ln_n", r.half_ln_n)
                .flag("lambda_holds", r.lambda_holds)
                .0
                .into()
        })
        .collect();
    Record::new()
        .int("k_max", report.k_max as u64)
        .float("ln_s", report.ln_s)
        .float("floor_log2", report.floor.log2)
        .float("floored_mean", report.floored_mean)
        .float("kappa", report.kappa)
        .float("reference_bound", report.reference_bound)
        .value("rows", Value::Array(rows))
        .0
        .into()
}

/// Aligned plain-text table.
pub fn counterexample_text(report: &CounterexampleReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "K = {}   S_K = {:.6}   log2 L = {}",
        report.k_max,
        report.ln_s.exp(),
        report.floor.log2
    );
    let _ = writeln!(
        out,
        "E[X' 1{{X' >= L}}] = {:.6}   kappa = {:.6}",
        report.floored_mean, report.kappa
    );
    let _ = writeln!(out, "reference bound 1 - e^-1 = {:.4}", report.reference_bound);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>12} {:>12} {:>12} {:>12}",
        "k", "y", "term", "f-term", "partial", "f-partial"
    );
    for m in &report.moments {
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>12.6e} {:>12.6e} {:>12.6} {:>12.6e}",
            m.k, m.y, m.term, m.weighted_term, m.partial, m.weighted_partial
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>12} {:>9} {:>10} {:>10} {:>7} {:>12} {:>12} {:>6}",
        "k", "y", "ln n", "m/nlnn", "m P{X>=n}", "1-e^-mP", ">=0.6321", "lambda", "0.5 ln n", "holds"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>12.6e} {:>9.6} {:>10.6} {:>10.6} {:>7} {:>12.6e} {:>12.6e} {:>6}",
            r.k,
            r.y,
            r.ln_n,
            r.m_ratio,
            r.m_tail,
            r.connect_lower,
            r.connect_lower_holds,
            r.lambda,
            r.half_ln_n,
            r.lambda_holds
        );
    }
    out
}
