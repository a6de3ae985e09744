//! Command input documents.
//!
//! An input file is either a bare model (an object with `"type"`) or an
//! object with a `"model"` member plus command parameters. Every lookup
//! failure is a schema error carrying the JSON pointer of the value.

use serde_json::Value;
use statespace_kit::model::{matrix_from_json, model_from_json, vector_from_json, Model, StateSpace};
use statespace_kit::numkit::{Complex64, Polynomial, RealMatrix, RealVector};
use statespace_kit::realization::{rational_from_json, transfer_matrix_from_json, RationalFunction, TransferMatrix};
use statespace_kit::{Error, Result};

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema { pointer: pointer.into(), message: message.into() }
}

pub struct Input {
    doc: Value,
}

impl Input {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| schema("/", format!("invalid JSON: {e}")))?;
        if !doc.is_object() {
            return Err(schema("/", "input must be a JSON object"));
        }
        Ok(Self { doc })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.doc.get(key)
    }

    fn require(&self, key: &str) -> Result<&Value> {
        self.get(key).ok_or_else(|| schema("/", format!("missing field {key:?}")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn model(&self) -> Result<Model> {
        if self.doc.get("type").is_some() {
            return model_from_json(&self.doc);
        }
        let m = self.require("model")?;
        model_from_json(m).map_err(|e| match e {
            Error::Schema { pointer, message } => {
                let rest = if pointer == "/" { String::new() } else { pointer };
                schema(&format!("/model{rest}"), message)
            }
            other => other,
        })
    }

    pub fn lti(&self) -> Result<StateSpace> {
        match self.model()? {
            Model::Lti(s) => Ok(s),
            other => Err(schema("/model/type", format!("this command needs an LTI model, got {}", other.kind()))),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<RealMatrix> {
        matrix_from_json(self.require(key)?, &format!("/{key}"))
    }

    pub fn opt_matrix(&self, key: &str) -> Result<Option<RealMatrix>> {
        self.get(key).map(|v| matrix_from_json(v, &format!("/{key}"))).transpose()
    }

    pub fn vector(&self, key: &str) -> Result<RealVector> {
        vector_from_json(self.require(key)?, &format!("/{key}"))
    }

    pub fn opt_vector(&self, key: &str) -> Result<Option<RealVector>> {
        self.get(key).map(|v| vector_from_json(v, &format!("/{key}"))).transpose()
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(&format!("/{key}"), "expected a finite number"))
    }

    pub fn opt_number(&self, key: &str) -> Result<Option<f64>> {
        if self.has(key) {
            self.number(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| v.as_bool().ok_or_else(|| schema(&format!("/{key}"), "expected a boolean")))
            .transpose()
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&str>> {
        self.get(key)
            .map(|v| v.as_str().ok_or_else(|| schema(&format!("/{key}"), "expected a string")))
            .transpose()
    }

    pub fn bool_list(&self, key: &str) -> Result<Option<Vec<bool>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let arr = v.as_array().ok_or_else(|| schema(&format!("/{key}"), "expected an array of booleans"))?;
        arr.iter()
            .enumerate()
            .map(|(i, b)| b.as_bool().ok_or_else(|| schema(&format!("/{key}/{i}"), "expected a boolean")))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Poles as numbers (real) or `[re, im]` pairs.
    pub fn poles(&self, key: &str) -> Result<Vec<Complex64>> {
        let arr = self
            .require(key)?
            .as_array()
            .ok_or_else(|| schema(&format!("/{key}"), "expected an array of poles"))?;
        arr.iter()
            .enumerate()
            .map(|(i, p)| {
                let pointer = format!("/{key}/{i}");
                if let Some(x) = p.as_f64() {
                    return Ok(Complex64::new(x, 0.0));
                }
                match p.as_array().map(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>()) {
                    Some(Some(v)) if v.len() == 2 && v.iter().all(|x| x.is_finite()) => Ok(Complex64::new(v[0], v[1])),
                    _ => Err(schema(&pointer, "expected a number or a [re, im] pair")),
                }
            })
            .collect()
    }

    pub fn polynomial(&self, key: &str) -> Result<Polynomial> {
        let v = self.vector(key)?;
        if v.is_empty() {
            return Err(schema(&format!("/{key}"), "empty coefficient list"));
        }
        Ok(Polynomial::from_slice(v.as_slice()))
    }

    pub fn rational(&self, key: &str) -> Result<RationalFunction> {
        rational_from_json(self.require(key)?, &format!("/{key}"))
    }

    pub fn transfer(&self, key: &str) -> Result<TransferMatrix> {
        transfer_matrix_from_json(self.require(key)?, &format!("/{key}"))
    }

    /// `[t0, t1]` with `t0 < t1`.
    pub fn horizon(&self, key: &str) -> Result<Option<(f64, f64)>> {
        let Some(v) = self.opt_vector(key)? else { return Ok(None) };
        if v.len() != 2 || !(v[1] > v[0]) {
            return Err(schema(&format!("/{key}"), "expected [t0, t1] with t0 < t1"));
        }
        Ok(Some((v[0], v[1])))
    }
}
