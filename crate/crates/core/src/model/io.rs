//! Text formats.
//!
//! Mask file: UTF-8, first line `n <n>`, then one `i j` pair per line (0-based),
//! LF-terminated. Matrix file: CSV with one row per line, entries written with
//! 17 significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{IndexSet, Matrix};
use crate::error::{Error, Result};

pub fn format_mask(mask: &IndexSet) -> String {
    let mut out = format!("n {}\n", mask.n());
    for (i, j) in mask.iter() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

pub fn parse_mask(text: &str) -> Result<IndexSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty mask file".into(),
    })?;
    let n = header
        .strip_prefix("n ")
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or(Error::Parse {
            line: 1,
            message: format!("expected `n <n>`, found {header:?}"),
        })?;
    let mut entries = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: idx + 1,
            message: format!("expected `i j`, found {line:?}"),
        };
        let mut parts = line.split_whitespace();
        let i = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        entries.push((i, j));
    }
    IndexSet::new(n, entries)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<IndexSet> {
    parse_mask(&fs::read_to_string(path)?)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &IndexSet) -> Result<()> {
    fs::write(path, format_mask(mask))?;
    Ok(())
}

/// 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_matrix(x: &Matrix) -> String {
    let mut out = String::new();
    for row in x.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a square CSV matrix; rejects ragged rows and non-finite values.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: idx + 1,
                        message: format!("bad entry {cell:?}"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "empty matrix file".into(),
        });
    }
    if let Some(k) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse {
            line: k + 1,
            message: format!("expected {n} entries, found {}", rows[k].len()),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Matrix::from_row_slice(n, n, &flat))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, x: &Matrix) -> Result<()> {
    fs::write(path, format_matrix(x))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mask_text_layout() {
        let m = IndexSet::new(3, vec![(2, 1), (0, 0)]).unwrap();
        assert_eq!(format_mask(&m), "n 3\n0 0\n2 1\n");
        assert_eq!(parse_mask("n 3\n0 0\n2 1\n").unwrap(), m);
    }

    #[test]
    fn mask_parse_errors() {
        assert!(matches!(parse_mask(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_mask("3\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_mask("n 3\n0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_mask("n 3\n0 3\n"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn matrix_parse_errors() {
        assert!(parse_matrix("1,2\n3\n").is_err());
        assert!(parse_matrix("1,NaN\n3,4\n").is_err());
        assert!(parse_matrix("1,2,3\n4,5,6\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_text_round_trips(vals in prop::collection::vec(-1e6f64..1e6, 9)) {
            let x = Matrix::from_row_slice(3, 3, &vals);
            let back = parse_matrix(&format_matrix(&x)).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn mask_text_round_trips(bits in prop::collection::vec(any::<bool>(), 16)) {
            let m = IndexSet::from_predicate(4, |i, j| bits[i * 4 + j]);
            prop_assert_eq!(parse_mask(&format_mask(&m)).unwrap(), m);
        }
    }
}
