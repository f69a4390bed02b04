//! CSV datasets: last column is the label, the rest are numeric features.
//! A first row that does not parse as numbers is taken as a header.

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width = None;

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(record.len());
                continue;
            }
            Err(_) => {
                return Err(Error::Parse {
                    line,
                    message: "non-numeric field".into(),
                })
            }
        };
        if values.len() < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature and a label".into(),
            });
        }
        if let Some(w) = width {
            if values.len() != w {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} columns, found {}", values.len()),
                });
            }
        }
        width = Some(values.len());
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        let (label, feats) = values.split_last().expect("at least two values");
        raw_labels.push(*label);
        rows.push(feats.to_vec());
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_raw_labels("csv", Matrix::from_rows(&rows)?, &raw_labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_detected() {
        let d = parse_csv("a,b,class\n1.0,2.0,0\n3,4,1\n").unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.labels(), &[-1, 1]);
    }

    #[test]
    fn headerless() {
        let d = parse_csv("1, 2, 5\n3, 4, 2\n").unwrap();
        assert_eq!(d.labels(), &[1, -1]);
        assert_eq!(d.label_map().negative, 2.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_csv(""), Err(Error::EmptyDataset)));
        assert!(matches!(parse_csv("a,b\n"), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse_csv("1,2,0\nx,2,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_csv("1,2,0\n1,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_csv("1\n2\n"), Err(Error::Parse { .. })));
    }
}
