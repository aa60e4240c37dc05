//! File formats: posets as text or JSON, matrices as CSV or JSON, sample
//! dumps as CSV.
//!
//! The poset text format is one cover `a < b` per line with `#` comments;
//! a bare token declares an isolated element. The JSON form is
//! `{"labels": [...], "covers": [[a, b], ...]}` (labels may be strings or
//! numbers). Matrices are dense with a header naming the columns by poset
//! labels; a nonzero entry at an unrelated pair is an error naming the
//! offending labels.

use crate::algebra::StructuredMatrix;
use crate::cone::ConePoint;
use crate::poset::{Poset, PosetError, PosetSpec};
use crate::scalar::Scalar;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("structural zero violated at ({row}, {col}): entries of unrelated pairs must be 0")]
    StructuralZero { row: String, col: String },
    #[error("header labels do not match the poset: {0}")]
    LabelMismatch(String),
    #[error("expected {want} rows/columns, found {got}")]
    Shape { want: usize, got: usize },
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line: line + 1,
        message: message.into(),
    }
}

/// Parses the `a < b` cover-per-line format.
pub fn parse_poset_text(s: &str) -> Result<Poset, IoError> {
    let mut labels: Vec<String> = Vec::new();
    let mut covers: Vec<(String, String)> = Vec::new();
    let declare = |l: &str, labels: &mut Vec<String>| {
        if !labels.iter().any(|x| x == l) {
            labels.push(l.to_string());
        }
    };
    for (lineno, raw) in s.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('<').map(str::trim).collect();
        match parts.as_slice() {
            [single] => {
                if single.is_empty() || single.split_whitespace().count() != 1 {
                    return Err(parse_err(lineno, format!("expected `a < b`, got `{raw}`")));
                }
                declare(single, &mut labels);
            }
            chain if chain.len() >= 2 => {
                for w in chain.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if a.is_empty() || b.is_empty() {
                        return Err(parse_err(lineno, format!("empty label in `{raw}`")));
                    }
                    declare(a, &mut labels);
                    declare(b, &mut labels);
                    covers.push((a.to_string(), b.to_string()));
                }
            }
            _ => return Err(parse_err(lineno, format!("expected `a < b`, got `{raw}`"))),
        }
    }
    if labels.is_empty() {
        return Err(parse_err(0, "no elements declared"));
    }
    let edges: Vec<(&str, &str)> = covers
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let labels: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    Ok(Poset::from_cover_edges(&labels, &edges)?)
}

fn json_label(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn parse_poset_json(s: &str) -> Result<Poset, IoError> {
    let v: serde_json::Value = serde_json::from_str(s)?;
    let labels = v
        .get("labels")
        .and_then(|l| l.as_array())
        .ok_or_else(|| parse_err(0, "missing `labels` array"))?
        .iter()
        .map(|x| json_label(x).ok_or_else(|| parse_err(0, "labels must be strings or numbers")))
        .collect::<Result<Vec<String>, _>>()?;
    let covers = match v.get("covers") {
        None => Vec::new(),
        Some(c) => c
            .as_array()
            .ok_or_else(|| parse_err(0, "`covers` must be an array of pairs"))?
            .iter()
            .map(|pair| {
                let arr = pair
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| parse_err(0, "each cover must be a pair"))?;
                let a = json_label(&arr[0]).ok_or_else(|| parse_err(0, "bad cover label"))?;
                let b = json_label(&arr[1]).ok_or_else(|| parse_err(0, "bad cover label"))?;
                Ok::<(String, String), IoError>((a, b))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let spec = PosetSpec { labels, covers };
    Ok(spec.to_poset()?)
}

/// Loads a poset from text or JSON, deciding by content.
pub fn parse_poset(s: &str) -> Result<Poset, IoError> {
    if s.trim_start().starts_with('{') {
        parse_poset_json(s)
    } else {
        parse_poset_text(s)
    }
}

pub fn load_poset(path: &Path) -> Result<Poset, IoError> {
    parse_poset(&std::fs::read_to_string(path)?)
}

pub fn poset_to_json(p: &Poset) -> String {
    serde_json::to_string_pretty(&PosetSpec::from(p)).expect("poset serializes")
}

/// Reads a dense matrix with a header of poset labels (any order).
pub fn parse_matrix_csv<T: Scalar>(
    s: &str,
    poset: &Arc<Poset>,
) -> Result<StructuredMatrix<T>, IoError> {
    let mut lines = s
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty matrix file"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let n = poset.len();
    if names.len() != n {
        return Err(IoError::Shape {
            want: n,
            got: names.len(),
        });
    }
    let mut order = Vec::with_capacity(n);
    for name in &names {
        match poset.index_of(name) {
            Some(i) if !order.contains(&i) => order.push(i),
            Some(_) => return Err(IoError::LabelMismatch(format!("duplicate column `{name}`"))),
            None => {
                let _ = hline;
                return Err(IoError::LabelMismatch(format!("unknown column `{name}`")));
            }
        }
    }
    let mut rows = Vec::with_capacity(n);
    for (lineno, line) in lines {
        let vals = line
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno, format!("bad number `{}`: {e}", x.trim())))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if vals.len() != n {
            return Err(IoError::Shape {
                want: n,
                got: vals.len(),
            });
        }
        rows.push(vals);
    }
    if rows.len() != n {
        return Err(IoError::Shape {
            want: n,
            got: rows.len(),
        });
    }
    matrix_from_rows(&rows, &order, poset)
}

fn matrix_from_rows<T: Scalar>(
    rows: &[Vec<f64>],
    order: &[usize],
    poset: &Arc<Poset>,
) -> Result<StructuredMatrix<T>, IoError> {
    let mut m = StructuredMatrix::zeros(poset);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (i, j) = (order[r], order[c]);
            if poset.comparable(i, j) {
                m.set(i, j, T::of(v));
            } else if v != 0.0 {
                return Err(IoError::StructuralZero {
                    row: poset.label(i).to_string(),
                    col: poset.label(j).to_string(),
                });
            }
        }
    }
    Ok(m)
}

pub fn matrix_to_csv<T: Scalar>(m: &StructuredMatrix<T>) -> String {
    let poset = m.poset();
    let mut out = poset.labels().join(",");
    out.push('\n');
    for i in 0..m.len() {
        let row: Vec<String> = (0..m.len())
            .map(|j| format!("{}", m.get(i, j).to_f64_lossy()))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_json<T: Scalar>(
    s: &str,
    poset: &Arc<Poset>,
) -> Result<StructuredMatrix<T>, IoError> {
    let v: serde_json::Value = serde_json::from_str(s)?;
    let labels = v
        .get("labels")
        .and_then(|l| l.as_array())
        .ok_or_else(|| parse_err(0, "missing `labels` array"))?
        .iter()
        .map(|x| json_label(x).ok_or_else(|| parse_err(0, "labels must be strings or numbers")))
        .collect::<Result<Vec<String>, _>>()?;
    if labels.len() != poset.len() {
        return Err(IoError::Shape {
            want: poset.len(),
            got: labels.len(),
        });
    }
    let mut order = Vec::with_capacity(labels.len());
    for name in &labels {
        match poset.index_of(name) {
            Some(i) if !order.contains(&i) => order.push(i),
            _ => return Err(IoError::LabelMismatch(format!("bad column `{name}`"))),
        }
    }
    let entries = v
        .get("entries")
        .and_then(|e| e.as_array())
        .ok_or_else(|| parse_err(0, "missing `entries` array"))?;
    let rows = entries
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| parse_err(0, "entries must be an array of rows"))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| parse_err(0, "entries must be numbers"))
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    if rows.len() != poset.len() || rows.iter().any(|r| r.len() != poset.len()) {
        return Err(IoError::Shape {
            want: poset.len(),
            got: rows.len(),
        });
    }
    matrix_from_rows(&rows, &order, poset)
}

pub fn matrix_to_json<T: Scalar>(m: &StructuredMatrix<T>) -> String {
    let entries: Vec<Vec<f64>> = (0..m.len())
        .map(|i| (0..m.len()).map(|j| m.get(i, j).to_f64_lossy()).collect())
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "labels": m.poset().labels(),
        "entries": entries,
    }))
    .expect("matrix serializes")
}

/// Loads a matrix, deciding between CSV and JSON by content.
pub fn parse_matrix<T: Scalar>(
    s: &str,
    poset: &Arc<Poset>,
) -> Result<StructuredMatrix<T>, IoError> {
    if s.trim_start().starts_with('{') {
        parse_matrix_json(s, poset)
    } else {
        parse_matrix_csv(s, poset)
    }
}

pub fn load_matrix<T: Scalar>(
    path: &Path,
    poset: &Arc<Poset>,
) -> Result<StructuredMatrix<T>, IoError> {
    parse_matrix(&std::fs::read_to_string(path)?, poset)
}

/// Header of a sample dump: the structural lower entries in linear-extension
/// order.
pub fn sample_header(poset: &Poset) -> String {
    StructuredMatrix::<f64>::lower_mask_entries(poset)
        .iter()
        .map(|&(i, j)| format!("x[{},{}]", poset.label(i), poset.label(j)))
        .collect::<Vec<_>>()
        .join(",")
}

/// One dump row: the structural lower entries of a draw.
pub fn sample_row<T: Scalar>(x: &ConePoint<T>) -> String {
    let m = x.matrix();
    StructuredMatrix::<T>::lower_mask_entries(x.poset())
        .iter()
        .map(|&(i, j)| format!("{}", m.get(i, j).to_f64_lossy()))
        .collect::<Vec<_>>()
        .join(",")
}
