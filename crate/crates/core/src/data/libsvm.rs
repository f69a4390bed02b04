//! LIBSVM sparse text format: `label index:value ...`, 1-based indices.

use std::fmt::Write as _;

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses LIBSVM text into a dense dataset. Absent indices are 0.0 and the
/// feature count is the largest index seen.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut raw_labels = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut n_features = 0usize;

    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_ascii_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_error(lineno, format!("non-numeric label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(parse_error(lineno, format!("non-finite label {label_tok:?}")));
        }

        let mut entries = Vec::new();
        let mut last_index = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(lineno, format!("expected index:value, got {tok:?}")))?;
            let index: usize = idx_str
                .parse()
                .map_err(|_| parse_error(lineno, format!("invalid index {idx_str:?}")))?;
            if index == 0 {
                return Err(parse_error(lineno, "indices are 1-based"));
            }
            if index == last_index {
                return Err(parse_error(lineno, format!("duplicate index {index}")));
            }
            if index < last_index {
                return Err(parse_error(
                    lineno,
                    format!("indices not increasing ({index} after {last_index})"),
                ));
            }
            let value: f64 = val_str
                .parse()
                .map_err(|_| parse_error(lineno, format!("non-numeric value {val_str:?}")))?;
            if !value.is_finite() {
                return Err(parse_error(lineno, format!("non-finite value {val_str:?}")));
            }
            last_index = index;
            entries.push((index - 1, value));
        }
        n_features = n_features.max(last_index);
        raw_labels.push(label);
        sparse_rows.push(entries);
    }

    if sparse_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_features == 0 {
        return Err(Error::InvalidArgument("dataset has no features".into()));
    }

    let mut features = Matrix::zeros(sparse_rows.len(), n_features);
    for (i, entries) in sparse_rows.iter().enumerate() {
        let row = features.row_mut(i);
        for &(j, v) in entries {
            row[j] = v;
        }
    }
    Dataset::from_raw_labels("libsvm", features, &raw_labels)
}

/// Writes the dataset with its raw labels; zero entries are omitted.
pub fn serialize_libsvm(dataset: &Dataset) -> String {
    let map = dataset.label_map();
    let mut out = String::new();
    for (i, &y) in dataset.labels().iter().enumerate() {
        write!(out, "{}", map.raw(y)).unwrap();
        for (j, &v) in dataset.row(i).iter().enumerate() {
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_sparse_rows() {
        let d = parse_libsvm("+1 1:0.5 3:2.0\n-1 2:1.0").unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.n_features(), 3);
        assert_eq!(d.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(d.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(d.labels(), &[1, -1]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_libsvm(""), Err(Error::EmptyDataset)));
        assert!(matches!(parse_libsvm("\n  \n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn decreasing_indices_rejected() {
        match parse_libsvm("1 2:1 1:1") {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("not increasing")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let text = "1 1:1\n\n0 1:2 1:3\n";
        match parse_libsvm(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_libsvm("1 1:x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("a 1:1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 1-1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 0:1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn raw_labels_survive_serialization() {
        let d = parse_libsvm("2 1:1\n7 1:-3.25\n").unwrap();
        assert_eq!(d.labels(), &[-1, 1]);
        assert_eq!(serialize_libsvm(&d), "2 1:1\n7 1:-3.25\n");
    }

    fn dataset_strategy() -> impl Strategy<Value = Dataset> {
        (1usize..12, 1usize..6)
            .prop_flat_map(|(n, m)| {
                (
                    prop::collection::vec(
                        prop::collection::vec(
                            prop_oneof![Just(0.0), -1e6f64..1e6, Just(1.0)],
                            m,
                        ),
                        n + 1,
                    ),
                    -1e3f64..1e3,
                    -1e3f64..1e3,
                )
            })
            .prop_filter("distinct labels", |(_, a, b)| a != b)
            .prop_map(|(mut rows, a, b)| {
                // The last column must be nonzero somewhere so the width survives.
                let last = rows[0].len() - 1;
                rows[0][last] = 1.5;
                let raw: Vec<f64> = (0..rows.len()).map(|i| if i % 2 == 0 { a } else { b }).collect();
                let m = Matrix::from_rows(&rows).unwrap();
                Dataset::from_raw_labels("libsvm", m, &raw).unwrap()
            })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(d in dataset_strategy()) {
            let back = parse_libsvm(&serialize_libsvm(&d)).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
