//! JSON file formats for distributions, joints, kernels and distortion tables.
//!
//! ```json
//! {"alphabet": ["a", "b"], "masses": [0.5, 0.5]}
//! {"rows": ["x0", "x1"], "cols": ["y0", "y1"], "masses": [[0.4, 0.1], [0.1, 0.4]]}
//! {"rows": ["x0", "x1"], "cols": ["y0", "y1"], "values": [[0, 1], [1, 0]]}
//! ```
//!
//! A kernel file uses the joint layout with one normalized row per conditioning symbol.
//! Totals more than [`FILE_TOL`] away from 1 are rejected unless renormalization is requested.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::prob::{FiniteDist, JointDist, Kernel};
use crate::rate_distortion::DistortionTable;

/// How far a file's totals may drift from 1 before it is rejected.
pub const FILE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Labeled<T> {
    pub labels: Vec<String>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledJoint<T> {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub value: T,
}

/// Either kind of mass table, for commands that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDist {
    Single(Labeled<FiniteDist>),
    Joint(LabeledJoint<JointDist>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistFile {
    #[serde(default)]
    alphabet: Option<Vec<Value>>,
    masses: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    #[serde(default)]
    rows: Option<Vec<Value>>,
    #[serde(default)]
    cols: Option<Vec<Value>>,
    masses: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(default)]
    rows: Option<Vec<Value>>,
    #[serde(default)]
    cols: Option<Vec<Value>>,
    values: Vec<Vec<f64>>,
}

fn label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn labels(given: Option<Vec<Value>>, n: usize, what: &str) -> Result<Vec<String>> {
    match given {
        None => Ok((0..n).map(|i| i.to_string()).collect()),
        Some(v) if v.len() == n => Ok(v.iter().map(label).collect()),
        Some(v) => Err(Error::Format(format!(
            "{what} has {} labels but {n} entries",
            v.len()
        ))),
    }
}

fn check_total(weights: &[f64], renormalize: bool) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if !renormalize && (sum - 1.0).abs() > FILE_TOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

fn rect(table: &[Vec<f64>], what: &str) -> Result<(usize, usize)> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyAlphabet);
    }
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::Format(format!("{what} rows have unequal lengths")));
    }
    Ok((rows, cols))
}

pub fn parse_dist(text: &str, renormalize: bool) -> Result<Labeled<FiniteDist>> {
    let f: DistFile = parse(text)?;
    let labels = labels(f.alphabet, f.masses.len(), "alphabet")?;
    check_total(&f.masses, renormalize)?;
    Ok(Labeled {
        labels,
        value: FiniteDist::from_weights(f.masses)?,
    })
}

pub fn parse_joint(text: &str, renormalize: bool) -> Result<LabeledJoint<JointDist>> {
    let f: JointFile = parse(text)?;
    let (r, c) = rect(&f.masses, "joint")?;
    let flat = f.masses.concat();
    check_total(&flat, renormalize)?;
    Ok(LabeledJoint {
        rows: labels(f.rows, r, "rows")?,
        cols: labels(f.cols, c, "cols")?,
        value: JointDist::from_weights(r, c, flat)?,
    })
}

pub fn parse_kernel(text: &str, renormalize: bool) -> Result<LabeledJoint<Kernel>> {
    let f: JointFile = parse(text)?;
    let (r, c) = rect(&f.masses, "kernel")?;
    let rows = f
        .masses
        .into_iter()
        .map(|row| {
            check_total(&row, renormalize)?;
            FiniteDist::from_weights(row).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledJoint {
        rows: labels(f.rows, r, "rows")?,
        cols: labels(f.cols, c, "cols")?,
        value: Kernel::new(rows, c)?,
    })
}

pub fn parse_distortion(text: &str) -> Result<LabeledJoint<DistortionTable>> {
    let f: TableFile = parse(text)?;
    let (r, c) = rect(&f.values, "distortion")?;
    Ok(LabeledJoint {
        rows: labels(f.rows, r, "rows")?,
        cols: labels(f.cols, c, "cols")?,
        value: DistortionTable::new(r, c, f.values.concat())?,
    })
}

/// Accepts either the single-distribution or the joint layout.
pub fn parse_any(text: &str, renormalize: bool) -> Result<AnyDist> {
    let v: Value = parse(text)?;
    match v.get("masses") {
        Some(Value::Array(a)) if a.first().is_some_and(Value::is_array) => {
            parse_joint(text, renormalize).map(AnyDist::Joint)
        }
        _ => parse_dist(text, renormalize).map(AnyDist::Single),
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn read_dist(path: &Path, renormalize: bool) -> Result<Labeled<FiniteDist>> {
    parse_dist(&read(path)?, renormalize)
}

pub fn read_joint(path: &Path, renormalize: bool) -> Result<LabeledJoint<JointDist>> {
    parse_joint(&read(path)?, renormalize)
}

pub fn read_kernel(path: &Path, renormalize: bool) -> Result<LabeledJoint<Kernel>> {
    parse_kernel(&read(path)?, renormalize)
}

pub fn read_distortion(path: &Path) -> Result<LabeledJoint<DistortionTable>> {
    parse_distortion(&read(path)?)
}

pub fn read_any(path: &Path, renormalize: bool) -> Result<AnyDist> {
    parse_any(&read(path)?, renormalize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_round_trip() {
        let d = parse_dist(r#"{"alphabet":["a","b",3],"masses":[0.25,0.25,0.5]}"#, false).unwrap();
        assert_eq!(d.labels, ["a", "b", "3"]);
        assert_eq!(d.value.mass(2), 0.5);
    }

    #[test]
    fn off_total_needs_renormalize() {
        let text = r#"{"alphabet":["a","b"],"masses":[0.5,0.4]}"#;
        assert!(matches!(parse_dist(text, false), Err(Error::NotNormalized { .. })));
        let d = parse_dist(text, true).unwrap();
        assert!((d.value.mass(0) - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn small_drift_is_normalized() {
        let d = parse_dist(r#"{"masses":[0.5,0.5000000001]}"#, false).unwrap();
        assert!((d.value.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn joint_and_kernel() {
        let j = parse_joint(r#"{"rows":["0","1"],"cols":["0","1"],"masses":[[0.4,0.1],[0.1,0.4]]}"#, false)
            .unwrap();
        assert_eq!(j.value.get(1, 0), 0.1);
        let k = parse_kernel(r#"{"masses":[[1,0],[0.5,0.5]]}"#, false).unwrap();
        assert_eq!(k.value.row(1).unwrap().mass(0), 0.5);
        assert!(parse_kernel(r#"{"masses":[[1,0.1],[0.5,0.5]]}"#, false).is_err());
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_dist("{", false), Err(Error::Format(_))));
        assert!(matches!(parse_joint(r#"{"masses":[[0.5],[0.25,0.25]]}"#, false), Err(Error::Format(_))));
        assert!(matches!(parse_dist(r#"{"alphabet":["a"],"masses":[0.5,0.5]}"#, false), Err(Error::Format(_))));
        assert!(matches!(parse_dist(r#"{"masses":[1.5,-0.5]}"#, false), Err(Error::InvalidMass { .. })));
    }

    #[test]
    fn any_detects_layout() {
        assert!(matches!(parse_any(r#"{"masses":[1]}"#, false), Ok(AnyDist::Single(_))));
        assert!(matches!(parse_any(r#"{"masses":[[1]]}"#, false), Ok(AnyDist::Joint(_))));
    }
}
