//! Typed access to a command's parameter map.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2};
use serde_json::Value;

use crate::config::Command;
use crate::error::{CliError, CliResult};

pub struct Params<'a> {
    command: Command,
    map: &'a BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    pub fn new(command: Command, map: &'a BTreeMap<String, Value>) -> Self {
        Self { command, map }
    }

    pub fn error(&self, key: &str, reason: impl Into<String>) -> CliError {
        CliError::Param {
            command: self.command.name(),
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn raw(&self, key: &str) -> &'a Value {
        self.map.get(key).unwrap_or(&Value::Null)
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_null()
    }

    pub fn f64(&self, key: &str) -> CliResult<f64> {
        self.raw(key)
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(key, "expected a finite number"))
    }

    pub fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        if self.is_set(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn u64(&self, key: &str) -> CliResult<u64> {
        self.raw(key)
            .as_u64()
            .ok_or_else(|| self.error(key, "expected a nonnegative integer"))
    }

    pub fn u32(&self, key: &str) -> CliResult<u32> {
        u32::try_from(self.u64(key)?).map_err(|_| self.error(key, "integer too large"))
    }

    pub fn usize(&self, key: &str) -> CliResult<usize> {
        usize::try_from(self.u64(key)?).map_err(|_| self.error(key, "integer too large"))
    }

    pub fn opt_usize(&self, key: &str) -> CliResult<Option<usize>> {
        if self.is_set(key) {
            self.usize(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn str(&self, key: &str) -> CliResult<&'a str> {
        self.raw(key)
            .as_str()
            .ok_or_else(|| self.error(key, "expected a string"))
    }

    fn array(&self, key: &str) -> CliResult<&'a Vec<Value>> {
        self.raw(key)
            .as_array()
            .ok_or_else(|| self.error(key, "expected a list"))
    }

    pub fn f64_list(&self, key: &str) -> CliResult<Vec<f64>> {
        self.array(key)?
            .iter()
            .map(|v| v.as_f64().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.error(key, "expected a list of finite numbers"))
    }

    pub fn u32_list(&self, key: &str) -> CliResult<Vec<u32>> {
        self.array(key)?
            .iter()
            .map(|v| v.as_u64().and_then(|x| u32::try_from(x).ok()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.error(key, "expected a list of nonnegative integers"))
    }

    /// A number (1×1), a flat list (diagonal) or a list of rows.
    pub fn matrix(&self, key: &str) -> CliResult<DMatrix<f64>> {
        matrix_from(self.raw(key)).map_err(|reason| self.error(key, reason))
    }

    pub fn matrix2(&self, key: &str) -> CliResult<Matrix2<f64>> {
        matrix2_from(self.raw(key)).map_err(|reason| self.error(key, reason))
    }

    /// A list of vectors, each a list of numbers.
    pub fn vectors(&self, key: &str) -> CliResult<Vec<Vec<f64>>> {
        vectors_from(self.raw(key)).map_err(|reason| self.error(key, reason))
    }

    pub fn raw_value(&self, key: &str) -> &'a Value {
        self.raw(key)
    }
}

fn number(v: &Value) -> Result<f64, String> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a finite number, got {v}"))
}

pub fn matrix_from(v: &Value) -> Result<DMatrix<f64>, String> {
    match v {
        Value::Number(_) => Ok(DMatrix::from_element(1, 1, number(v)?)),
        Value::Array(rows) if rows.is_empty() => Err("matrix must be nonempty".into()),
        Value::Array(rows) if rows.iter().all(|r| r.is_number()) => {
            let diag: Vec<f64> = rows.iter().map(number).collect::<Result<_, _>>()?;
            Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
        }
        Value::Array(rows) => {
            let parsed: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| "expected a list of rows".to_string())?
                        .iter()
                        .map(number)
                        .collect()
                })
                .collect::<Result<_, String>>()?;
            let cols = parsed[0].len();
            if parsed.iter().any(|r| r.len() != cols) {
                return Err("rows have different lengths".into());
            }
            if cols != parsed.len() {
                return Err(format!("matrix must be square, got {}x{cols}", parsed.len()));
            }
            Ok(DMatrix::from_fn(parsed.len(), cols, |i, j| parsed[i][j]))
        }
        _ => Err(format!("expected a number or a list, got {v}")),
    }
}

pub fn matrix2_from(v: &Value) -> Result<Matrix2<f64>, String> {
    let m = matrix_from(v)?;
    if m.nrows() != 2 {
        return Err(format!("expected a 2x2 matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    Ok(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
}

pub fn vectors_from(v: &Value) -> Result<Vec<Vec<f64>>, String> {
    v.as_array()
        .ok_or_else(|| "expected a list of vectors".to_string())?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| "expected a list of vectors".to_string())?
                .iter()
                .map(number)
                .collect()
        })
        .collect()
}
