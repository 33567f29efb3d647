//! Plain-text dense vectors: one value per line.
//!
//! Blank lines and lines starting with `%` or `#` are ignored, so a Matrix
//! Market `array` file with a single column reads correctly once its size
//! line is skipped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub fn read_vector_from<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut array_size: Option<usize> = None;
    let mut is_array = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let no = i + 1;
        let text = line.trim();
        if no == 1 && text.to_ascii_lowercase().starts_with("%%matrixmarket") {
            if !text.to_ascii_lowercase().contains(" array ") {
                return Err(Error::Parse {
                    line: 1,
                    message: "only 'matrix array' files can hold a vector".into(),
                });
            }
            is_array = true;
            continue;
        }
        if text.is_empty() || text.starts_with('%') || text.starts_with('#') {
            continue;
        }
        if is_array && array_size.is_none() {
            let dims: Vec<usize> = text
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: no,
                    message: "invalid size line".into(),
                })?;
            if dims.len() != 2 || dims[1] != 1 {
                return Err(Error::Parse {
                    line: no,
                    message: "expected an 'n 1' size line".into(),
                });
            }
            array_size = Some(dims[0]);
            continue;
        }
        let v: f64 = text.parse().map_err(|_| Error::Parse {
            line: no,
            message: format!("invalid value '{text}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: no,
                message: format!("non-finite value '{text}'"),
            });
        }
        values.push(v);
    }
    if let Some(n) = array_size {
        if n != values.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
    }
    Ok(values)
}

pub fn write_vector_to<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}
