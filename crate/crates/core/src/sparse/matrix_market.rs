//! Matrix Market coordinate-format reader.
//!
//! Supports `real`, `integer`, `pattern` and `complex` fields with
//! `general`, `symmetric`, `skew-symmetric` and `hermitian` symmetry.
//! Implicit entries of symmetric files are expanded.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use num_complex::Complex64;

use super::{OperatorFamily, SparseOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_path(path: impl AsRef<Path>) -> Result<SparseOperator> {
    let p = path.as_ref();
    let file = fs::File::open(p)?;
    let op = read(file)?;
    Ok(op.with_family(OperatorFamily::MatrixMarket {
        path: p.display().to_string(),
    }))
}

pub fn read<R: Read>(reader: R) -> Result<SparseOperator> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let words: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "header must be '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triples: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut declared = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let Some((rows, cols, nnz)) = size else {
            if tokens.len() != 3 {
                return Err(parse_err(line_no, "size line must be 'rows cols nnz'"));
            }
            let nums = tokens
                .iter()
                .map(|t| t.parse::<usize>().map_err(|e| parse_err(line_no, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if nums[0] != nums[1] {
                return Err(parse_err(line_no, format!("matrix is not square ({} x {})", nums[0], nums[1])));
            }
            size = Some((nums[0], nums[1], nums[2]));
            triples.reserve(nums[2]);
            continue;
        };
        let expected = match field {
            Field::Pattern => 2,
            Field::Real => 3,
            Field::Complex => 4,
        };
        if tokens.len() != expected {
            return Err(parse_err(line_no, format!("expected {expected} fields, found {}", tokens.len())));
        }
        let index = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| parse_err(line_no, format!("bad index '{t}'")))?;
            if v == 0 || v > rows.max(cols) {
                return Err(parse_err(line_no, format!("index {v} out of range 1..={rows}")));
            }
            Ok(v - 1)
        };
        let number = |t: &str| -> Result<f64> {
            t.parse().map_err(|_| parse_err(line_no, format!("bad value '{t}'")))
        };
        let (i, j) = (index(tokens[0])?, index(tokens[1])?);
        let v = match field {
            Field::Pattern => Complex64::new(1.0, 0.0),
            Field::Real => Complex64::new(number(tokens[2])?, 0.0),
            Field::Complex => Complex64::new(number(tokens[2])?, number(tokens[3])?),
        };
        if declared == nnz {
            return Err(parse_err(line_no, format!("more than the declared {nnz} entries")));
        }
        declared += 1;
        triples.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triples.push((j, i, v)),
                Symmetry::SkewSymmetric => triples.push((j, i, -v)),
                Symmetry::Hermitian => triples.push((j, i, v.conj())),
            }
        }
    }
    let (dim, _, _) = size.ok_or_else(|| parse_err(0, "missing size line"))?;

    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
    for (i, j, v) in triples {
        rows[i].push((j, v));
    }
    SparseOperator::from_oracle(dim, |j| rows[j].clone(), OperatorFamily::Custom { name: "matrix-market".into() })
}
