//! Matrix input (dense CSV and MatrixMarket `array` files) and trace output.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::refinement::IterationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    /// MatrixMarket if the first line starts with `%%MatrixMarket`, CSV otherwise.
    #[default]
    Auto,
    MatrixMarket,
    Csv,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "matrixmarket" | "mm" | "mtx" => Ok(Self::MatrixMarket),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidOption(format!(
                "unknown matrix format '{other}'"
            ))),
        }
    }
}

const MM_BANNER: &str = "%%MatrixMarket";

pub fn parse_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_str(&text, format)
}

/// Like [`parse_matrix`] but also requires a square matrix.
pub fn parse_square_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    parse_square_matrix_str(&text, format)
}

pub fn parse_matrix_str(text: &str, format: MatrixFormat) -> Result<Matrix> {
    Ok(parse_located(text, format)?.0)
}

pub fn parse_square_matrix_str(text: &str, format: MatrixFormat) -> Result<Matrix> {
    let (m, shape_line) = parse_located(text, format)?;
    if !m.is_square() {
        return Err(Error::Parse {
            line: shape_line,
            message: format!("expected a square matrix, got {}x{}", m.rows(), m.cols()),
        });
    }
    Ok(m)
}

/// Returns the matrix and the line that fixes its shape (the size line for
/// MatrixMarket, the last data row for CSV), used to locate squareness errors.
fn parse_located(text: &str, format: MatrixFormat) -> Result<(Matrix, usize)> {
    let format = match format {
        MatrixFormat::Auto => {
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            if first.trim_start().starts_with(MM_BANNER) {
                MatrixFormat::MatrixMarket
            } else {
                MatrixFormat::Csv
            }
        }
        f => f,
    };
    match format {
        MatrixFormat::MatrixMarket => parse_matrix_market(text),
        _ => parse_csv(text),
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let x: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("non-numeric token '{token}'"),
    })?;
    if !x.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value '{token}'"),
        });
    }
    Ok(x)
}

fn parse_csv(text: &str) -> Result<(Matrix, usize)> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let values = raw
            .split(',')
            .map(|t| parse_value(t.trim(), line))
            .collect::<Result<Vec<_>>>()?;
        match cols {
            None => cols = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("row has {} values, expected {c}", values.len()),
                })
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
        last_line = line;
    }
    let cols = cols.ok_or_else(|| Error::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    let m = Matrix::new(rows, cols, data).map_err(|e| Error::Parse {
        line: last_line,
        message: e.to_string(),
    })?;
    Ok((m, last_line))
}

fn parse_matrix_market(text: &str) -> Result<(Matrix, usize)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    let bad_header = |message: String| Error::Parse {
        line: hline,
        message,
    };
    if fields.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(bad_header("header must start with %%MatrixMarket".into()));
    }
    if fields.len() != 5 {
        return Err(bad_header(format!(
            "header needs 'matrix array real general', got '{}'",
            header.trim()
        )));
    }
    if fields[1] != "matrix" {
        return Err(bad_header(format!("unsupported object '{}'", fields[1])));
    }
    if fields[2] != "array" {
        return Err(bad_header(format!(
            "unsupported layout '{}', only dense 'array' is read",
            fields[2]
        )));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(bad_header(format!("unsupported field '{}'", fields[3])));
    }
    if fields[4] != "general" {
        return Err(bad_header(format!("unsupported symmetry '{}'", fields[4])));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| Error::Parse {
        line: hline + 1,
        message: "missing size line".into(),
    })?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_dim = |t: &str| -> Result<usize> {
        t.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Parse {
                line: size_line,
                message: format!("invalid dimension '{t}'"),
            })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: size_line,
            message: format!("size line needs 'rows cols', got '{}'", size.trim()),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let expected = rows * cols;
    let mut col_major = Vec::with_capacity(expected);
    let mut last = size_line;
    for (line, raw) in body {
        for token in raw.split_whitespace() {
            if col_major.len() == expected {
                return Err(Error::Parse {
                    line,
                    message: format!("more than {expected} values"),
                });
            }
            col_major.push(parse_value(token, line)?);
        }
        last = line;
    }
    if col_major.len() != expected {
        return Err(Error::Parse {
            line: last,
            message: format!("expected {expected} values, found {}", col_major.len()),
        });
    }
    let mut m = Matrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = col_major[j * rows + i];
        }
    }
    Ok((m, size_line))
}

/// Dense CSV, one row per line, shortest round-trip representation.
pub fn to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// MatrixMarket `array real general`, column-major body.
pub fn to_matrix_market(m: &Matrix) -> String {
    let mut out = format!(
        "{MM_BANNER} matrix array real general\n{} {}\n",
        m.rows(),
        m.cols()
    );
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            out.push_str(&format!("{:e}\n", m[(i, j)]));
        }
    }
    out
}

/// 17 significant digits; parses back to the identical double.
pub fn format_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// 15 significant digits for human-facing output.
pub fn format_human(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor();
    if (-3.0..6.0).contains(&mag) {
        let decimals = (14.0 - mag) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.14e}")
    }
}

/// One half-sweep of a refinement, as written to a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub l: usize,
    pub e: String,
    pub h_norm: String,
    pub rho: Option<String>,
    pub corner_flipped: bool,
}

impl From<&IterationRecord> for TraceLine {
    fn from(rec: &IterationRecord) -> Self {
        Self {
            l: rec.l,
            e: format_exact(rec.e),
            h_norm: format_exact(rec.h_norm),
            rho: rec.rho.map(format_exact),
            corner_flipped: rec.corner_flipped,
        }
    }
}

impl TraceLine {
    pub fn to_record(&self) -> Result<IterationRecord> {
        let num = |s: &str| parse_value(s, self.l + 1);
        Ok(IterationRecord {
            l: self.l,
            e: num(&self.e)?,
            h_norm: num(&self.h_norm)?,
            rho: self.rho.as_deref().map(num).transpose()?,
            corner_flipped: self.corner_flipped,
        })
    }
}

/// Writes one JSON object per record, one per line.
pub fn write_trace<W: Write>(mut w: W, history: &[IterationRecord]) -> Result<()> {
    for rec in history {
        serde_json::to_writer(&mut w, &TraceLine::from(rec)).map_err(|e| Error::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(text: &str) -> Result<Vec<TraceLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
