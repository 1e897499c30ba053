use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use casimir_piston::model::Side;
use clap::ValueEnum;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Physical dimension of a number, rendered as a units tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    /// ħc × length^k.
    Energy(i32),
    Length,
    Frequency,
    Dimensionless,
    Index,
    /// Mixed natural-unit quantities, never rescaled.
    Natural,
}

/// Unit system for the tags and for scaling energy-type values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar_c: Option<f64>,
}

impl Units {
    pub fn tag(&self, dim: Dim) -> String {
        let si = self.hbar_c.is_some();
        let (unit, power) = match dim {
            Dim::Energy(k) if si => return power_tag("J", "m", k + 1),
            Dim::Energy(k) => ("length", k),
            Dim::Length => (if si { "m" } else { "length" }, 1),
            Dim::Frequency => (if si { "m" } else { "length" }, -1),
            Dim::Dimensionless => return "1".into(),
            Dim::Index => return "index".into(),
            Dim::Natural => return "natural".into(),
        };
        power_tag("", unit, power)
    }

    pub fn scale(&self, dim: Dim, value: f64) -> f64 {
        match (dim, self.hbar_c) {
            (Dim::Energy(_), Some(h)) => value * h,
            _ => value,
        }
    }
}

fn power_tag(prefix: &str, unit: &str, k: i32) -> String {
    let body = match k {
        0 => String::new(),
        1 => unit.to_string(),
        -1 => format!("/{unit}"),
        k if k < 0 => format!("/{unit}^{}", -k),
        k => format!("{unit}^{k}"),
    };
    match (prefix.is_empty(), body.is_empty()) {
        (true, true) => "1".into(),
        (true, false) if body.starts_with('/') => format!("1{body}"),
        (true, false) => body,
        (false, true) => prefix.into(),
        (false, false) if body.starts_with('/') => format!("{prefix}{body}"),
        (false, false) => format!("{prefix}*{body}"),
    }
}

/// One output row: a number with its provenance and context.
#[derive(Debug, Clone)]
pub struct Record {
    pub quantity: String,
    pub method: String,
    pub value: f64,
    pub dim: Dim,
    pub uncertainty: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub flag: Option<bool>,
    pub side: Option<Side>,
    pub m: Option<u32>,
    pub lambda: Option<u8>,
    pub k_par: Option<f64>,
    pub a: Option<f64>,
    pub xi: Option<f64>,
    pub coefficient: Option<String>,
    pub label: Option<String>,
}

impl Record {
    pub fn new(quantity: impl Into<String>, method: impl ToString, value: f64, dim: Dim) -> Self {
        Self {
            quantity: quantity.into(),
            method: method.to_string(),
            value,
            dim,
            uncertainty: None,
            reference: None,
            tolerance: None,
            flag: None,
            side: None,
            m: None,
            lambda: None,
            k_par: None,
            a: None,
            xi: None,
            coefficient: None,
            label: None,
        }
    }
}

/// Context columns shared by every record of a command.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context {
    pub side: Option<Side>,
    pub m: Option<u32>,
    pub lambda: Option<u8>,
    pub k_par: Option<f64>,
    pub a: Option<f64>,
    pub xi: Option<f64>,
}

impl Context {
    pub fn apply(&self, mut r: Record) -> Record {
        r.side = r.side.or(self.side);
        r.m = r.m.or(self.m);
        r.lambda = r.lambda.or(self.lambda);
        r.k_par = r.k_par.or(self.k_par);
        r.a = r.a.or(self.a);
        r.xi = r.xi.or(self.xi);
        r
    }
}

/// Header of the CSV projection, shared by every command.
pub const CSV_HEADER: [&str; 17] = [
    "command",
    "quantity",
    "side",
    "m",
    "lambda",
    "k_par",
    "a",
    "xi",
    "coefficient",
    "label",
    "method",
    "value",
    "uncertainty",
    "reference",
    "tolerance",
    "units",
    "flag",
];

/// Header of the `--emit-plot-data` file.
pub const PLOT_HEADER: [&str; 6] = ["quantity", "a", "xi", "method", "value", "units"];

#[derive(Debug, Clone)]
pub struct PlotRow {
    pub quantity: String,
    pub a: f64,
    pub xi: f64,
    pub method: String,
    pub value: f64,
    pub dim: Dim,
}

pub struct Report {
    pub command: String,
    pub units: Units,
    pub parameters: Vec<(String, Value, Dim)>,
    pub records: Vec<Record>,
    pub warnings: Vec<String>,
    /// Replaces the generic JSON body when set.
    pub json: Option<Value>,
    /// Replaces the generic text body when set.
    pub text: Option<String>,
    pub plot: Vec<PlotRow>,
}

impl Report {
    pub fn new(command: impl Into<String>, units: Units) -> Self {
        Self {
            command: command.into(),
            units,
            parameters: Vec::new(),
            records: Vec::new(),
            warnings: Vec::new(),
            json: None,
            text: None,
            plot: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: f64, dim: Dim) {
        let value = match dim {
            Dim::Index if value.fract() == 0.0 && value.abs() < 2f64.powi(53) => json!(value as i64),
            _ => json!(value),
        };
        self.parameters.push((name.into(), value, dim));
    }

    pub fn param_label(&mut self, name: &str, value: impl ToString) {
        self.parameters
            .push((name.into(), Value::String(value.to_string()), Dim::Dimensionless));
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn num(&self, value: f64, dim: Dim, method: &str) -> Value {
        json!({
            "value": self.units.scale(dim, value),
            "units": self.units.tag(dim),
            "method": method,
        })
    }

    fn parameters_json(&self) -> Value {
        let mut map = Map::new();
        for (name, value, dim) in &self.parameters {
            let v = match value {
                Value::Number(n) if n.is_i64() => {
                    json!({"value": n, "units": self.units.tag(*dim), "method": "input"})
                }
                Value::Number(n) => self.num(n.as_f64().unwrap_or(f64::NAN), *dim, "input"),
                other => other.clone(),
            };
            map.insert(name.clone(), v);
        }
        Value::Object(map)
    }

    fn record_json(&self, r: &Record) -> Value {
        let mut map = Map::new();
        map.insert("quantity".into(), json!(r.quantity));
        if let Some(c) = &r.coefficient {
            map.insert("coefficient".into(), json!(c));
        }
        if let Some(l) = &r.label {
            map.insert("label".into(), json!(l));
        }
        if let Some(s) = r.side {
            map.insert("side".into(), json!(s.to_string()));
        }
        let input = |v: f64, dim: Dim| self.num(v, dim, "input");
        let index = |v: u32| json!({"value": v, "units": self.units.tag(Dim::Index), "method": "input"});
        if let Some(m) = r.m {
            map.insert("m".into(), index(m));
        }
        if let Some(l) = r.lambda {
            map.insert("lambda".into(), index(u32::from(l)));
        }
        if let Some(k) = r.k_par {
            map.insert("k_par".into(), input(k, Dim::Frequency));
        }
        if let Some(a) = r.a {
            map.insert("a".into(), input(a, Dim::Length));
        }
        if let Some(xi) = r.xi {
            map.insert("xi".into(), input(xi, Dim::Length));
        }
        map.insert("value".into(), json!(self.units.scale(r.dim, r.value)));
        if let Some(u) = r.uncertainty {
            map.insert("uncertainty".into(), json!(self.units.scale(r.dim, u)));
        }
        if let Some(x) = r.reference {
            map.insert("reference".into(), json!(self.units.scale(r.dim, x)));
        }
        if let Some(t) = r.tolerance {
            map.insert("tolerance".into(), json!(t));
        }
        map.insert("units".into(), json!(self.units.tag(r.dim)));
        map.insert("method".into(), json!(r.method));
        if let Some(f) = r.flag {
            map.insert("flag".into(), json!(f));
        }
        Value::Object(map)
    }

    pub fn to_json(&self) -> Value {
        if let Some(v) = &self.json {
            return v.clone();
        }
        json!({
            "command": self.command,
            "parameters": self.parameters_json(),
            "results": self.records.iter().map(|r| self.record_json(r)).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(io_error)?;
        for r in &self.records {
            let opt = |v: Option<f64>| v.map(|x| fmt_num(self.units.scale(r.dim, x)));
            w.write_record([
                self.command.clone(),
                r.quantity.clone(),
                r.side.map(|s| s.to_string()).unwrap_or_default(),
                r.m.map(|m| m.to_string()).unwrap_or_default(),
                r.lambda.map(|l| l.to_string()).unwrap_or_default(),
                r.k_par.map(fmt_num).unwrap_or_default(),
                r.a.map(fmt_num).unwrap_or_default(),
                r.xi.map(fmt_num).unwrap_or_default(),
                r.coefficient.clone().unwrap_or_default(),
                r.label.clone().unwrap_or_default(),
                r.method.clone(),
                fmt_num(self.units.scale(r.dim, r.value)),
                opt(r.uncertainty).unwrap_or_default(),
                opt(r.reference).unwrap_or_default(),
                r.tolerance.map(fmt_num).unwrap_or_default(),
                self.units.tag(r.dim),
                r.flag.map(|f| f.to_string()).unwrap_or_default(),
            ])
            .map_err(io_error)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        if let Some(t) = &self.text {
            let mut out = t.clone();
            for w in &self.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            return out;
        }
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        for (name, value, dim) in &self.parameters {
            match value {
                Value::Number(n) if n.is_i64() => {
                    let _ = writeln!(out, "  {name} = {n}");
                }
                Value::Number(n) => {
                    let v = self.units.scale(*dim, n.as_f64().unwrap_or(f64::NAN));
                    let _ = writeln!(out, "  {name} = {} {}", fmt_num(v), self.units.tag(*dim));
                }
                Value::String(s) => {
                    let _ = writeln!(out, "  {name} = {s}");
                }
                other => {
                    let _ = writeln!(out, "  {name} = {other}");
                }
            }
        }
        let rows: Vec<[String; 5]> = self
            .records
            .iter()
            .map(|r| {
                let mut what = r.quantity.clone();
                let mut context = Vec::new();
                if let Some(c) = &r.coefficient {
                    context.push(c.clone());
                }
                if let Some(l) = &r.label {
                    context.push(l.clone());
                }
                if let Some(s) = r.side {
                    context.push(s.to_string());
                }
                if let Some(m) = r.m {
                    context.push(format!("m={m}"));
                }
                if let Some(l) = r.lambda {
                    context.push(format!("lambda={l}"));
                }
                if let Some(a) = r.a {
                    context.push(format!("a={a}"));
                }
                if let Some(xi) = r.xi {
                    context.push(format!("xi={xi}"));
                }
                if !context.is_empty() {
                    what = format!("{what} [{}]", context.join(", "));
                }
                let mut extra = Vec::new();
                if let Some(u) = r.uncertainty {
                    extra.push(format!("+/- {}", fmt_num(self.units.scale(r.dim, u))));
                }
                if let Some(x) = r.reference {
                    extra.push(format!("ref {}", fmt_num(self.units.scale(r.dim, x))));
                }
                if let Some(f) = r.flag {
                    extra.push(format!("flag {f}"));
                }
                [
                    what,
                    r.method.clone(),
                    fmt_num(self.units.scale(r.dim, r.value)),
                    self.units.tag(r.dim),
                    extra.join("  "),
                ]
            })
            .collect();
        let mut widths = [0usize; 5];
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for row in &rows {
            let _ = writeln!(
                out,
                "  {:<w0$}  {:<w1$}  {:>w2$}  {:<w3$}  {}",
                row[0],
                row[1],
                row[2],
                row[3],
                row[4],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv()?,
            Format::Text => self.to_text(),
        })
    }

    pub fn plot_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(PLOT_HEADER).map_err(io_error)?;
        for p in &self.plot {
            w.write_record([
                p.quantity.clone(),
                fmt_num(p.a),
                fmt_num(p.xi),
                p.method.clone(),
                fmt_num(self.units.scale(p.dim, p.value)),
                self.units.tag(p.dim),
            ])
            .map_err(io_error)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Resolves relative paths against `PISTON_OUTPUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os("PISTON_OUTPUT_DIR") {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_to(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let p = resolve(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_tags() {
        let natural = Units { hbar_c: None };
        let si = Units { hbar_c: Some(2.0) };
        assert_eq!(natural.tag(Dim::Energy(-3)), "1/length^3");
        assert_eq!(natural.tag(Dim::Energy(-1)), "1/length");
        assert_eq!(natural.tag(Dim::Energy(0)), "1");
        assert_eq!(natural.tag(Dim::Energy(1)), "length");
        assert_eq!(si.tag(Dim::Energy(-3)), "J/m^2");
        assert_eq!(si.tag(Dim::Energy(-4)), "J/m^3");
        assert_eq!(si.tag(Dim::Energy(-1)), "J");
        assert_eq!(si.tag(Dim::Energy(1)), "J*m^2");
        assert_eq!(si.tag(Dim::Frequency), "1/m");
        assert_eq!(si.scale(Dim::Energy(-3), 1.5), 3.0);
        assert_eq!(si.scale(Dim::Frequency, 1.5), 1.5);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -10.398_250_113_737_28, 1e-300, std::f64::consts::PI] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
