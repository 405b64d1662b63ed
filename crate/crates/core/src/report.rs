//! Machine-readable run reports.
//!
//! JSON output has a fixed key order (struct field order, sorted parameter
//! maps) and floats are printed in shortest round-trip form, so identical
//! runs produce identical bytes. CSV floats use 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// A check passing when `value <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { check_name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    pub fn flag(name: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        Self { check_name: name.into(), value, tolerance, pass }
    }
}

/// A table cell; integers print without an exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => csv_float(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            experiment: experiment.into(),
            params: BTreeMap::new(),
            seed,
            metrics: Vec::new(),
            checks: Vec::new(),
            table: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.metrics.push(Metric { name: name.into(), value });
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The table if there is one, otherwise `kind,name,value,tolerance,pass`
    /// rows for metrics and checks.
    pub fn to_csv(&self) -> String {
        if let Some(t) = &self.table {
            return t.to_csv();
        }
        let mut out = String::from("kind,name,value,tolerance,pass\n");
        for m in &self.metrics {
            let _ = writeln!(out, "metric,{},{},,", csv_field(&m.name), csv_float(m.value));
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check,{},{},{},{}",
                csv_field(&c.check_name),
                csv_float(c.value),
                csv_float(c.tolerance),
                c.pass
            );
        }
        out
    }
}

/// A float with 17 significant digits.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let mut r = Report::new("demo", Some(7));
        r.param("n", 64).param("hurst", 0.7);
        r.metric("x", 0.1);
        r.check(Check::at_most("err", 1e-3, 1e-2));
        let j = r.to_json();
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["experiment"], "demo");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["checks"][0]["pass"], true);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys.len(), 5);
        // params sorted
        assert!(j.find("\"hurst\"").unwrap() < j.find("\"n\"").unwrap());
        assert_eq!(j, r.clone().to_json());
        assert!(r.all_pass());
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn csv_round_trips() {
        let x = 0.1 + 0.2;
        let s = csv_float(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        let mut t = Table::new(&["k", "x"]);
        t.push(vec![3usize.into(), std::f64::consts::PI.into()]);
        let text = t.to_csv();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "3");
        assert_eq!(row[1].parse::<f64>().unwrap(), std::f64::consts::PI);
        let mut r = Report::new("t", None);
        r.table = Some(t.clone());
        assert_eq!(r.to_csv(), text);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["table"]["rows"][0][0], 3);
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
