//! Matrix and vector files: JSON `{rows, cols, re, im}`, Matrix Market, and
//! JSON vectors as `[[re, im], ...]` or `[x, ...]`.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use psfmat::{DenseMatrix, StateVector};
use serde::Deserialize;

#[derive(Deserialize)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_mm = path.extension().is_some_and(|e| e == "mtx") || text.trim_start().starts_with("%%MatrixMarket");
    if is_mm {
        parse_matrix_market(&text).with_context(|| format!("parsing Matrix Market file {}", path.display()))
    } else {
        parse_json_matrix(&text).with_context(|| format!("parsing JSON matrix {}", path.display()))
    }
}

pub fn parse_json_matrix(text: &str) -> Result<DenseMatrix> {
    let m: JsonMatrix = serde_json::from_str(text)?;
    let count = m.rows * m.cols;
    if m.re.len() != count {
        bail!("expected {count} real parts, found {}", m.re.len());
    }
    let im = m.im.unwrap_or_else(|| vec![0.0; count]);
    if im.len() != count {
        bail!("expected {count} imaginary parts, found {}", im.len());
    }
    let entries = m.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    Ok(DenseMatrix::from_row_major(m.rows, m.cols, entries)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        bail!("bad header `{header}`");
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => bail!("unsupported format `{other}`"),
    };
    let complex = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "complex" => true,
        other => bail!("unsupported field `{other}`"),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => Symmetry::Hermitian,
        other => bail!("unsupported symmetry `{other}`"),
    };

    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size: Vec<usize> = body
        .next()
        .ok_or_else(|| anyhow!("missing size line"))?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let (rows, cols) = match size.as_slice() {
        [r, c, ..] => (*r, *c),
        _ => bail!("malformed size line"),
    };
    let mut dense = vec![Complex64::new(0.0, 0.0); rows * cols];

    let parse_value = |parts: &[&str]| -> Result<Complex64> {
        let re: f64 = parts.first().ok_or_else(|| anyhow!("missing value"))?.parse()?;
        let im: f64 = if complex {
            parts.get(1).ok_or_else(|| anyhow!("missing imaginary part"))?.parse()?
        } else {
            0.0
        };
        Ok(Complex64::new(re, im))
    };
    let mut place = |i: usize, j: usize, v: Complex64| -> Result<()> {
        if i >= rows || j >= cols {
            bail!("entry ({}, {}) outside {rows}x{cols}", i + 1, j + 1);
        }
        dense[i * cols + j] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => dense[j * cols + i] = v,
                Symmetry::Skew => dense[j * cols + i] = -v,
                Symmetry::Hermitian => dense[j * cols + i] = v.conj(),
            }
        }
        Ok(())
    };

    if coordinate {
        let nnz = *size.get(2).ok_or_else(|| anyhow!("coordinate size line needs nnz"))?;
        for _ in 0..nnz {
            let line = body.next().ok_or_else(|| anyhow!("fewer than {nnz} entries"))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() < 3 {
                bail!("malformed entry `{line}`");
            }
            let i: usize = parts[0].parse()?;
            let j: usize = parts[1].parse()?;
            if i == 0 || j == 0 {
                bail!("indices are 1-based");
            }
            place(i - 1, j - 1, parse_value(&parts[2..])?)?;
        }
    } else {
        // Column-major; symmetric variants store the lower triangle only.
        for j in 0..cols {
            let start = if symmetry == Symmetry::General { 0 } else { j };
            let start = if symmetry == Symmetry::Skew { j + 1 } else { start };
            for i in start..rows {
                let line = body.next().ok_or_else(|| anyhow!("too few array entries"))?;
                let parts: Vec<&str> = line.split_whitespace().collect();
                place(i, j, parse_value(&parts)?)?;
            }
        }
    }
    Ok(DenseMatrix::from_row_major(rows, cols, dense)?)
}

pub fn read_state(path: &Path) -> Result<StateVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_state(&text).with_context(|| format!("parsing state vector {}", path.display()))
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let items = value.as_array().ok_or_else(|| anyhow!("state must be a JSON array"))?;
    let entries = items
        .iter()
        .map(|item| match item {
            serde_json::Value::Number(n) => n.as_f64().map(|x| Complex64::new(x, 0.0)),
            serde_json::Value::Array(pair) if pair.len() == 2 => {
                Some(Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?))
            }
            _ => None,
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| anyhow!("entries must be numbers or [re, im] pairs"))?;
    if entries.is_empty() {
        bail!("state vector is empty");
    }
    Ok(StateVector::from_complex(entries))
}

pub fn state_to_json(v: &StateVector) -> String {
    let pairs: Vec<[f64; 2]> = v.to_vec().iter().map(|z| [z.re, z.im]).collect();
    serde_json::to_string(&pairs).expect("finite pairs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_matrix() {
        let m = parse_json_matrix(r#"{"rows": 2, "cols": 2, "re": [1, 2, 3, 4], "im": [0, 1, 0, 0]}"#).unwrap();
        assert_eq!(m.get(0, 1), Complex64::new(2.0, 1.0));
        assert_eq!(m.get(1, 0), Complex64::new(3.0, 0.0));
        assert!(parse_json_matrix(r#"{"rows": 2, "cols": 2, "re": [1, 2, 3]}"#).is_err());
    }

    #[test]
    fn matrix_market_coordinate_symmetric() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 2\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 1).re, -1.0);
        assert_eq!(m.get(1, 0).re, -1.0);
        assert_eq!(m.get(2, 2).re, 2.0);
        assert_eq!(m.get(0, 2).re, 0.0);
    }

    #[test]
    fn matrix_market_array_and_hermitian() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(m.get(0, 1).re, 2.0);
        assert_eq!(m.get(1, 0).re, 3.0);
        let h = parse_matrix_market("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 0 1\n").unwrap();
        assert_eq!(h.get(0, 1), Complex64::new(0.0, -1.0));
        assert!(h.is_hermitian());
    }

    #[test]
    fn state_formats() {
        let v = parse_state("[[1, 0], [0, 2]]").unwrap();
        assert_eq!(v.to_vec()[1], Complex64::new(0.0, 2.0));
        let w = parse_state("[0.5, 0.5]").unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(parse_state(&state_to_json(&v)).unwrap(), v);
        assert!(parse_state("[]").is_err());
        assert!(parse_state("[[1, 2, 3]]").is_err());
    }
}
