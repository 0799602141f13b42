//! JSON literals for vectors, matrices and superoperators.
//!
//! ```text
//! vector:        {"dim": n, "entries": ["p/q" | number, ...]}
//! matrix:        {"rows": r, "cols": c, "entries": [[...], ...]}
//! superoperator: {"dims": [w, x, y, z], "A": matrix, "B": matrix}
//!              | {"dims": [w, x, y, z], "rep": matrix}
//! ```
//!
//! Rational strings are parsed exactly in rational mode.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::regular_op::RegularOperator;
use crate::scalar::Scalar;
use crate::superop::{SuperDims, Superoperator};

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON object")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
}

fn scalars<S: Scalar>(v: &Value, what: &str) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))?
        .iter()
        .map(S::from_json)
        .collect()
}

pub fn vector_to_json<S: Scalar>(v: &LatticeVector<S>) -> Value {
    json!({
        "dim": v.dim(),
        "entries": v.entries().iter().map(Scalar::to_json).collect::<Vec<_>>(),
    })
}

pub fn vector_from_json<S: Scalar>(v: &Value) -> Result<LatticeVector<S>> {
    let obj = as_object(v, "vector")?;
    let dim = as_usize(field(obj, "dim")?, "dim")?;
    let entries = scalars(field(obj, "entries")?, "entries")?;
    if entries.len() != dim {
        return Err(Error::Parse(format!(
            "vector declares dim {dim} but has {} entries",
            entries.len()
        )));
    }
    LatticeVector::new(entries)
}

pub fn matrix_to_json<S: Scalar>(m: &RegularOperator<S>) -> Value {
    let rows: Vec<Value> = m
        .to_rows()
        .iter()
        .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
        .collect();
    json!({ "rows": m.rows(), "cols": m.cols(), "entries": rows })
}

pub fn matrix_from_json<S: Scalar>(v: &Value) -> Result<RegularOperator<S>> {
    let obj = as_object(v, "matrix")?;
    let rows = as_usize(field(obj, "rows")?, "rows")?;
    let cols = as_usize(field(obj, "cols")?, "cols")?;
    let entries = field(obj, "entries")?
        .as_array()
        .ok_or_else(|| Error::Parse("entries must be an array of rows".into()))?;
    if entries.len() != rows {
        return Err(Error::Parse(format!(
            "matrix declares {rows} rows but has {}",
            entries.len()
        )));
    }
    let data: Vec<Vec<S>> = entries
        .iter()
        .map(|r| scalars(r, "matrix row"))
        .collect::<Result<_>>()?;
    if data.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("every row must have {cols} entries")));
    }
    RegularOperator::from_rows(data)
}

pub fn superop_to_json<S: Scalar>(m: &Superoperator<S>) -> Value {
    let d = m.dims();
    let dims = json!([d.w, d.x, d.y, d.z]);
    match m.factors() {
        Ok((a, b)) => json!({ "dims": dims, "A": matrix_to_json(a), "B": matrix_to_json(b) }),
        Err(_) => json!({ "dims": dims, "rep": matrix_to_json(m.rep()) }),
    }
}

pub fn superop_from_json<S: Scalar>(v: &Value) -> Result<Superoperator<S>> {
    let obj = as_object(v, "superoperator")?;
    let dims: Vec<usize> = field(obj, "dims")?
        .as_array()
        .ok_or_else(|| Error::Parse("dims must be [w, x, y, z]".into()))?
        .iter()
        .map(|d| as_usize(d, "dims entry"))
        .collect::<Result<_>>()?;
    let [w, x, y, z] = dims[..] else {
        return Err(Error::Parse("dims must have four entries".into()));
    };
    let dims = SuperDims { w, x, y, z };
    if let (Some(a), Some(b)) = (obj.get("A"), obj.get("B")) {
        let m = Superoperator::build(&matrix_from_json(a)?, &matrix_from_json(b)?);
        if m.dims() != dims {
            return Err(Error::Parse(format!(
                "declared dims {:?} disagree with factor shapes {:?}",
                dims,
                m.dims()
            )));
        }
        return Ok(m);
    }
    let rep = obj
        .get("rep")
        .ok_or_else(|| Error::Parse("superoperator needs A and B, or rep".into()))?;
    Superoperator::from_rep(dims, matrix_from_json(rep)?)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_matrix<S: Scalar>(path: &Path) -> Result<RegularOperator<S>> {
    matrix_from_json(&read_json(path)?)
}

pub fn read_vector<S: Scalar>(path: &Path) -> Result<LatticeVector<S>> {
    vector_from_json(&read_json(path)?)
}
