//! Report envelopes and their JSON / CSV renderings.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), pass, measured, bound }
    }

    /// `measured ≤ bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured <= bound, measured, bound)
    }

    /// `measured ≥ bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured >= bound, measured, bound)
    }

    /// `|measured − reference| ≤ tol·max(|measured|, |reference|)`; the
    /// reference is reported as the bound.
    pub fn close(name: impl Into<String>, measured: f64, reference: f64, tol: f64) -> Self {
        let scale = measured.abs().max(reference.abs());
        let ok = (measured - reference).abs() <= tol * scale;
        Self::new(name, ok, measured, reference)
    }
}

/// A tabular view for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub version: String,
    pub elapsed_ms: u64,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl Envelope {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            checks: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed_ms: 0,
            table: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Sorted keys, floats rounded to nine significant digits.
    pub fn to_value(&self) -> Value {
        round_floats(serde_json::to_value(self).expect("serializable"))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_value()).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => render_csv(t),
                None => render_csv(&checks_table(&self.checks)),
            },
        }
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    Table {
        header: ["name", "pass", "measured", "bound"].map(String::from).to_vec(),
        rows: checks
            .iter()
            .map(|c| vec![c.name.clone(), c.pass.to_string(), fmt_float(c.measured), fmt_float(c.bound)])
            .collect(),
    }
}

pub fn render_csv(t: &Table) -> String {
    let mut out = String::new();
    out.push_str(&t.header.join(","));
    out.push('\n');
    for row in &t.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Rounds to nine significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{}", sig9(x))
    } else {
        format!("{x}")
    }
}

/// Recursively rounds every non-integral number; key order is already sorted
/// because `serde_json::Map` is a `BTreeMap`.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            serde_json::Number::from_f64(sig9(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}
