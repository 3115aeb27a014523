use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense rows read from a LibSVM file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub labels: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_libsvm_str(&text)
}

/// Parses `label idx:val …` lines. Indices are 1-based and rows are
/// densified to the largest index seen; `{0, 1}` labels become `{−1, +1}`.
pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("label {label_tok:?} is not a number")))?;
        let mut feats = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
            let idx: i64 = idx
                .parse()
                .map_err(|_| err(format!("index {idx:?} is not an integer")))?;
            if idx < 1 {
                return Err(err(format!("index must be >= 1, got {idx}")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("value {val:?} is not a number")))?;
            let idx = idx as usize;
            dim = dim.max(idx);
            feats.push((idx - 1, val));
        }
        labels.push(label);
        sparse.push(feats);
    }
    if labels.iter().all(|&y| y == 0.0 || y == 1.0) {
        labels
            .iter_mut()
            .filter(|y| **y == 0.0)
            .for_each(|y| *y = -1.0);
    }
    let rows = sparse
        .into_iter()
        .map(|feats| {
            let mut row = vec![0.0; dim];
            for (j, v) in feats {
                row[j] = v;
            }
            row
        })
        .collect();
    Ok(Dataset { labels, rows, dim })
}

/// Writes nonzero entries only; the first row also names the last column so
/// the dimension survives a round trip.
pub fn to_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for (r, (label, row)) in data.labels.iter().zip(&data.rows).enumerate() {
        write!(out, "{label}").unwrap();
        for (j, v) in row.iter().enumerate() {
            let last_of_first = r == 0 && j + 1 == data.dim;
            if *v != 0.0 || last_of_first {
                write!(out, " {}:{v}", j + 1).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_row_is_densified() {
        let d = parse_libsvm_str("+1 1:0.5 3:2\n").unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.rows[0], vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn label_only_row() {
        let d = parse_libsvm_str("-1\n+1 2:1\n").unwrap();
        assert_eq!(d.rows[0], vec![0.0, 0.0]);
        assert_eq!(d.labels[0], -1.0);
    }

    #[test]
    fn zero_index_reports_line() {
        let e = parse_libsvm_str("\n1 0:3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn binary_zero_one_labels_are_mapped() {
        let d = parse_libsvm_str("0 1:1\n1 1:2\n").unwrap();
        assert_eq!(d.labels, vec![-1.0, 1.0]);
    }

    #[test]
    fn malformed_pairs_rejected() {
        assert!(parse_libsvm_str("1 3\n").is_err());
        assert!(parse_libsvm_str("1 a:3\n").is_err());
        assert!(parse_libsvm_str("1 2:x\n").is_err());
        assert!(parse_libsvm_str("pos 2:1\n").is_err());
    }

    #[test]
    fn round_trip_keeps_trailing_zero_column() {
        let d = parse_libsvm_str("1 1:1 4:0\n-1 2:0.25\n").unwrap();
        assert_eq!(d.dim, 4);
        assert_eq!(parse_libsvm_str(&to_libsvm(&d)).unwrap(), d);
    }
}
