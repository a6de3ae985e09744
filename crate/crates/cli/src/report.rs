//! JSON encoding of library values and the on-disk report bundle.
//!
//! `serde_json` keeps object keys in a `BTreeMap` and prints floats with the
//! shortest round-trip representation, so identical inputs give identical
//! bytes. Non-finite floats become `null`.

use serde_json::{json, Map, Value};
use statespace_kit::model::StateSpace;
use statespace_kit::numkit::{Complex64, Polynomial, RealMatrix, RealVector};
use statespace_kit::Error;
use std::fs;
use std::io;
use std::path::Path;

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn vec_json(v: &RealVector) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn mat_json(m: &RealMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect())).collect())
}

/// `[re, im]`.
pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn complexes(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

/// Coefficients, highest degree first.
pub fn poly_json(p: &Polynomial) -> Value {
    floats(p.coeffs())
}

pub fn ss_json(sys: &StateSpace) -> Value {
    json!({
        "A": mat_json(&sys.a),
        "B": mat_json(&sys.b),
        "C": mat_json(&sys.c),
        "D": mat_json(&sys.d),
        "n": sys.n(),
        "m": sys.m(),
        "p": sys.p(),
    })
}

pub fn error_json(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(e.kind().into()));
    obj.insert("message".into(), Value::String(e.to_string()));
    if let Error::Schema { pointer, .. } = e {
        obj.insert("pointer".into(), Value::String(pointer.clone()));
    }
    Value::Object(obj)
}

/// Everything a command produces before anything touches the disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
    /// Extra files written next to `report.json`, in insertion order.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.into(), contents));
    }
}

pub struct ReportHeader<'a> {
    pub command: &'a str,
    pub input_sha256: &'a str,
    pub seed: u64,
    pub tolerances: Value,
}

pub fn report_json(header: &ReportHeader, outcome: Result<&Outcome, &Error>) -> Value {
    let mut report = Map::new();
    report.insert("command".into(), Value::String(header.command.into()));
    report.insert(
        "inputs".into(),
        json!({"sha256": header.input_sha256, "seed": header.seed, "tolerances": header.tolerances}),
    );
    report.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    match outcome {
        Ok(o) => {
            report.insert("status".into(), Value::String("ok".into()));
            report.insert("results".into(), Value::Object(o.results.clone()));
            report.insert("warnings".into(), json!(o.warnings));
            report.insert("files".into(), json!(o.files.iter().map(|(n, _)| n).collect::<Vec<_>>()));
        }
        Err(e) => {
            report.insert("status".into(), Value::String("error".into()));
            report.insert("error".into(), error_json(e));
            report.insert("results".into(), Value::Object(Map::new()));
            report.insert("warnings".into(), json!([]));
            report.insert("files".into(), json!([]));
        }
    }
    Value::Object(report)
}

pub fn write_bundle(out: &Path, report: &Value, files: &[(String, String)]) -> io::Result<()> {
    fs::create_dir_all(out)?;
    let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    text.push('\n');
    for (name, contents) in files {
        fs::write(out.join(name), contents)?;
    }
    fs::write(out.join("report.json"), text)
}
