//! JSON model schema.
//!
//! ```json
//! {"type": "lti", "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}
//! {"type": "ltv-samples", "times": [...], "A": [[[...]]...], "B": ..., "C": ..., "D": ..., "breaks": [...]}
//! {"type": "nonlinear-builtin", "name": "pendulum", "params": {"g": 9.81}}
//! ```
//!
//! Matrices are row-major nested arrays. For `lti`, `C` defaults to the
//! identity and `D` to zeros. Every error carries the JSON pointer of the
//! offending value.

use super::{builtin, LtvModel, Model, StateSpace};
use crate::error::{Error, Result};
use crate::numkit::{RealMatrix, RealVector};
use serde_json::Value;
use std::collections::BTreeMap;

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn number(v: &Value, pointer: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(schema(pointer, "expected a finite number")),
    }
}

pub fn vector_from_json(v: &Value, pointer: &str) -> Result<RealVector> {
    let arr = v.as_array().ok_or_else(|| schema(pointer, "expected an array of numbers"))?;
    let vals = arr
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{pointer}/{i}")))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RealVector::from_vec(vals))
}

/// Row-major nested array to matrix; rows must be non-empty and equal length.
pub fn matrix_from_json(v: &Value, pointer: &str) -> Result<RealMatrix> {
    let rows = v.as_array().ok_or_else(|| schema(pointer, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(schema(pointer, "matrix has no rows"));
    }
    let mut data = Vec::new();
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{pointer}/{i}");
        let r = vector_from_json(row, &rp)?;
        if r.is_empty() {
            return Err(schema(&rp, "row is empty"));
        }
        match width {
            None => width = Some(r.len()),
            Some(w) if w != r.len() => return Err(schema(&rp, format!("row has {} entries, expected {w}", r.len()))),
            _ => {}
        }
        data.push(r);
    }
    let c = width.unwrap_or(0);
    Ok(RealMatrix::from_fn(data.len(), c, |i, j| data[i][j]))
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, pointer: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(pointer, format!("missing field {key:?}")))
}

fn check_shape(m: &RealMatrix, rows: usize, cols: usize, pointer: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(schema(pointer, format!("expected {rows}x{cols}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn lti_from_parts(
    a: RealMatrix,
    b: RealMatrix,
    c: Option<RealMatrix>,
    d: Option<RealMatrix>,
    base: &str,
) -> Result<StateSpace> {
    let n = a.nrows();
    check_shape(&a, n, n, &format!("{base}/A"))?;
    if b.nrows() != n {
        return Err(schema(&format!("{base}/B"), format!("B has {} rows, A has {n}", b.nrows())));
    }
    let m = b.ncols();
    let c = c.unwrap_or_else(|| RealMatrix::identity(n, n));
    if c.ncols() != n {
        return Err(schema(&format!("{base}/C"), format!("C has {} columns, A has {n}", c.ncols())));
    }
    let p = c.nrows();
    let d = d.unwrap_or_else(|| RealMatrix::zeros(p, m));
    check_shape(&d, p, m, &format!("{base}/D"))?;
    StateSpace::new(a, b, c, d)
}

/// Parse and dimension-check a model description.
pub fn model_from_json(v: &Value) -> Result<Model> {
    let obj = v.as_object().ok_or_else(|| schema("", "model must be a JSON object"))?;
    let ty = field(obj, "type", "")?.as_str().ok_or_else(|| schema("/type", "expected a string"))?;
    match ty {
        "lti" => {
            let a = matrix_from_json(field(obj, "A", "")?, "/A")?;
            let b = matrix_from_json(field(obj, "B", "")?, "/B")?;
            let c = obj.get("C").map(|x| matrix_from_json(x, "/C")).transpose()?;
            let d = obj.get("D").map(|x| matrix_from_json(x, "/D")).transpose()?;
            Ok(Model::Lti(lti_from_parts(a, b, c, d, "")?))
        }
        "ltv-samples" => {
            let times = vector_from_json(field(obj, "times", "")?, "/times")?;
            let k = times.len();
            if k == 0 {
                return Err(schema("/times", "need at least one sample"));
            }
            if times.as_slice().windows(2).any(|w| !(w[1] > w[0])) {
                return Err(schema("/times", "sample times must be strictly increasing"));
            }
            let mut mats: BTreeMap<&str, Vec<RealMatrix>> = BTreeMap::new();
            for key in ["A", "B", "C", "D"] {
                let Some(arr) = obj.get(key) else { continue };
                let list = arr.as_array().ok_or_else(|| schema(&format!("/{key}"), "expected an array of matrices"))?;
                if list.len() != k {
                    return Err(schema(&format!("/{key}"), format!("expected {k} samples, got {}", list.len())));
                }
                let ms = list
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix_from_json(m, &format!("/{key}/{i}")))
                    .collect::<Result<Vec<_>>>()?;
                mats.insert(key, ms);
            }
            let a = mats.remove("A").ok_or_else(|| schema("", "missing field \"A\""))?;
            let b = mats.remove("B").ok_or_else(|| schema("", "missing field \"B\""))?;
            let mut c = mats.remove("C");
            let mut d = mats.remove("D");
            let (mut aa, mut bb, mut cc, mut dd): (Vec<RealMatrix>, Vec<RealMatrix>, Vec<RealMatrix>, Vec<RealMatrix>) =
                (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..k {
                let ss = lti_from_parts(
                    a[i].clone(),
                    b[i].clone(),
                    c.as_mut().map(|v| v[i].clone()),
                    d.as_mut().map(|v| v[i].clone()),
                    &format!("/samples/{i}"),
                )?;
                if i > 0 && (ss.n() != aa[0].nrows() || ss.m() != bb[0].ncols() || ss.p() != cc[0].nrows()) {
                    return Err(schema(&format!("/A/{i}"), "dimensions change between samples"));
                }
                aa.push(ss.a);
                bb.push(ss.b);
                cc.push(ss.c);
                dd.push(ss.d);
            }
            let mut ltv = LtvModel::from_samples(times.as_slice().to_vec(), aa, bb, cc, dd)?;
            if let Some(br) = obj.get("breaks") {
                let br = vector_from_json(br, "/breaks")?;
                let mut b: Vec<f64> = br.iter().copied().collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                ltv.breaks = b;
            }
            Ok(Model::Ltv(ltv))
        }
        "nonlinear-builtin" => {
            let name = field(obj, "name", "")?.as_str().ok_or_else(|| schema("/name", "expected a string"))?;
            let mut params = BTreeMap::new();
            if let Some(p) = obj.get("params") {
                let po = p.as_object().ok_or_else(|| schema("/params", "expected an object"))?;
                for (k, v) in po {
                    params.insert(k.clone(), number(v, &format!("/params/{k}"))?);
                }
            }
            builtin(name, &params).map_err(|e| match e {
                Error::InvalidArgument(msg) if msg.contains("parameter") => schema("/params", msg),
                Error::InvalidArgument(msg) => schema("/name", msg),
                other => other,
            })
        }
        other => Err(schema("/type", format!("unknown model type {other:?}"))),
    }
}
