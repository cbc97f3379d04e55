//! CSV readers and writers for the file formats the CLI speaks.
//!
//! Samples: header `x_1,...,x_m,f`. Gradients: header `x_1,...,x_m,g_1,...,g_m`.
//! Comma delimiter, '.' decimal, no locale; floats are written with 17
//! significant digits so outputs reproduce bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::linalg::Matrix;
use crate::lipschitz::SampleSet;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad header: {0}")]
    Header(String),
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn split_header(line: &str) -> Vec<String> {
    line.split(',').map(|s| s.trim().to_string()).collect()
}

fn parse_row(line: &str, lineno: usize, want: usize) -> Result<Vec<f64>, IoError> {
    let fields: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
    if fields.len() != want {
        return Err(IoError::Parse {
            line: lineno,
            msg: format!("expected {want} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|e| IoError::Parse {
                line: lineno,
                msg: format!("bad float '{f}': {e}"),
            })
        })
        .collect()
}

/// Columns x_1..x_m, f.
pub fn read_samples_csv(path: &Path) -> Result<SampleSet, IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::Header("empty file".into()))?;
    let cols = split_header(header);
    if cols.len() < 2 || cols.last().map(|s| s.as_str()) != Some("f") {
        return Err(IoError::Header(format!(
            "expected x_1,...,x_m,f; got '{header}'"
        )));
    }
    let m = cols.len() - 1;
    for (i, c) in cols[..m].iter().enumerate() {
        let want = format!("x_{}", i + 1);
        if c != &want {
            return Err(IoError::Header(format!("column {i} should be {want}, got {c}")));
        }
    }
    let mut points = Matrix::zeros(0, m);
    let mut values = Vec::new();
    for (idx, line) in lines {
        let row = parse_row(line, idx + 1, m + 1)?;
        points.push_row(&row[..m]);
        values.push(row[m]);
    }
    SampleSet::from_samples(points, values).map_err(|e| IoError::Header(e.to_string()))
}

/// Columns x_1..x_m only (evaluation points).
pub fn read_points_csv(path: &Path) -> Result<Matrix, IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::Header("empty file".into()))?;
    let cols = split_header(header);
    let m = cols.len();
    for (i, c) in cols.iter().enumerate() {
        let want = format!("x_{}", i + 1);
        if c != &want {
            return Err(IoError::Header(format!("column {i} should be {want}, got {c}")));
        }
    }
    let mut points = Matrix::zeros(0, m);
    for (idx, line) in lines {
        let row = parse_row(line, idx + 1, m)?;
        points.push_row(&row);
    }
    Ok(points)
}

/// Columns x_1..x_m, g_1..g_m; returns (points, gradients).
pub fn read_gradients_csv(path: &Path) -> Result<(Matrix, Matrix), IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::Header("empty file".into()))?;
    let cols = split_header(header);
    if cols.len() < 2 || cols.len() % 2 != 0 {
        return Err(IoError::Header(format!(
            "expected x_1,...,x_m,g_1,...,g_m; got '{header}'"
        )));
    }
    let m = cols.len() / 2;
    for i in 0..m {
        if cols[i] != format!("x_{}", i + 1) || cols[m + i] != format!("g_{}", i + 1) {
            return Err(IoError::Header(format!(
                "expected x_1,...,x_{m},g_1,...,g_{m}; got '{header}'"
            )));
        }
    }
    let mut points = Matrix::zeros(0, m);
    let mut grads = Matrix::zeros(0, m);
    for (idx, line) in lines {
        let row = parse_row(line, idx + 1, 2 * m)?;
        points.push_row(&row[..m]);
        grads.push_row(&row[m..]);
    }
    Ok((points, grads))
}

/// Write a CSV with the given header; every cell formatted at 17 significant
/// digits.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{}", format_float(*v));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Samples CSV (x_1..x_m, f).
pub fn write_samples_csv(path: &Path, s: &SampleSet) -> Result<(), IoError> {
    let m = s.dim();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
    header.push("f".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = (0..s.len())
        .map(|i| {
            let mut row = s.point(i).to_vec();
            row.push(s.value(i));
            row
        })
        .collect();
    write_csv(path, &header_refs, &rows)
}

/// Gradients CSV (x_1..x_m, g_1..g_m).
pub fn write_gradients_csv(path: &Path, points: &Matrix, grads: &Matrix) -> Result<(), IoError> {
    let m = points.cols();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
    header.extend((1..=m).map(|i| format!("g_{i}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = (0..points.rows())
        .map(|i| {
            let mut row = points.row(i).to_vec();
            row.extend_from_slice(grads.row(i));
            row
        })
        .collect();
    write_csv(path, &header_refs, &rows)
}
