//! Matrix file format: a one-line header comment followed by one CSV row per
//! matrix row.
//!
//! ```text
//! # kind=additive, n=4
//! 0.0000000000000000e0,1.0000000000000000e0,...
//! ```
//!
//! Floats are written with 17 significant digits so every f64 round-trips
//! bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{PcmError, Result};
use crate::pcm::{AdditivePcm, MultiplicativePcm};

/// Formats an f64 with enough digits to round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Additive,
    Multiplicative,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Additive => "additive",
            MatrixKind::Multiplicative => "multiplicative",
        }
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = PcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(MatrixKind::Additive),
            "multiplicative" => Ok(MatrixKind::Multiplicative),
            other => Err(PcmError::Parse {
                what: "matrix kind".into(),
                detail: format!("expected additive or multiplicative, got {other:?}"),
            }),
        }
    }
}

/// A matrix read from disk, in whichever form the file declared.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedMatrix {
    Additive(AdditivePcm),
    Multiplicative(MultiplicativePcm),
}

impl LoadedMatrix {
    pub fn kind(&self) -> MatrixKind {
        match self {
            LoadedMatrix::Additive(_) => MatrixKind::Additive,
            LoadedMatrix::Multiplicative(_) => MatrixKind::Multiplicative,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            LoadedMatrix::Additive(a) => a.n(),
            LoadedMatrix::Multiplicative(m) => m.n(),
        }
    }

    /// The additive form, converting if the file held a multiplicative one.
    pub fn into_additive(self) -> AdditivePcm {
        match self {
            LoadedMatrix::Additive(a) => a,
            LoadedMatrix::Multiplicative(m) => m.to_additive(),
        }
    }

    /// The multiplicative form, converting if the file held an additive one.
    pub fn into_multiplicative(self) -> MultiplicativePcm {
        match self {
            LoadedMatrix::Additive(a) => a.to_multiplicative(),
            LoadedMatrix::Multiplicative(m) => m,
        }
    }
}

fn parse_error(detail: impl Into<String>) -> PcmError {
    PcmError::Parse {
        what: "matrix file".into(),
        detail: detail.into(),
    }
}

fn parse_header(line: &str) -> Result<(MatrixKind, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| parse_error("first line must be a '# kind=..., n=...' header"))?;
    let mut kind: Option<MatrixKind> = None;
    let mut n: Option<usize> = None;
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_error(format!("malformed header field {part:?}")))?;
        match key.trim() {
            "kind" => kind = Some(value.trim().parse()?),
            "n" => {
                n = Some(value.trim().parse().map_err(|e| {
                    parse_error(format!("bad n value {:?}: {e}", value.trim()))
                })?)
            }
            other => return Err(parse_error(format!("unknown header key {other:?}"))),
        }
    }
    match (kind, n) {
        (Some(kind), Some(n)) => Ok((kind, n)),
        _ => Err(parse_error("header must declare both kind and n")),
    }
}

/// Reads a matrix file, validating the declared kind's invariants.
pub fn read_matrix(path: &Path) -> Result<LoadedMatrix> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| parse_error("empty matrix file"))?;
    let (kind, n) = parse_header(header)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for line in lines {
        if rows.len() == n {
            return Err(parse_error(format!("more than {n} data rows")));
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_error(format!("bad entry {:?}: {e}", cell.trim())))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(parse_error(format!(
                "row {} has {} entries, expected {n}",
                rows.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_error(format!(
            "found {} data rows, expected {n}",
            rows.len()
        )));
    }
    match kind {
        MatrixKind::Additive => Ok(LoadedMatrix::Additive(AdditivePcm::from_rows(&rows)?)),
        MatrixKind::Multiplicative => Ok(LoadedMatrix::Multiplicative(
            MultiplicativePcm::from_rows(&rows)?,
        )),
    }
}

fn render(kind: MatrixKind, n: usize, rows: &[Vec<f64>]) -> String {
    let mut out = format!("# kind={}, n={n}\n", kind.as_str());
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_additive(path: &Path, a: &AdditivePcm) -> Result<()> {
    fs::write(path, render(MatrixKind::Additive, a.n(), &a.to_rows()))?;
    Ok(())
}

pub fn write_multiplicative(path: &Path, m: &MultiplicativePcm) -> Result<()> {
    fs::write(
        path,
        render(MatrixKind::Multiplicative, m.n(), &m.to_rows()),
    )?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &LoadedMatrix) -> Result<()> {
    match m {
        LoadedMatrix::Additive(a) => write_additive(path, a),
        LoadedMatrix::Multiplicative(m) => write_multiplicative(path, m),
    }
}
