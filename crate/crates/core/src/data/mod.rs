//! Datasets with ±1 labels, their file formats, and seeded splits.

mod csv;
mod libsvm;
mod split;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use self::csv::parse_csv;
pub use self::libsvm::{parse_libsvm, serialize_libsvm};
pub use self::split::{fraction_split, stratified_kfold, FoldPlan};

/// Raw label values that were mapped to −1 and +1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    pub negative: f64,
    pub positive: f64,
}

impl LabelMap {
    pub const IDENTITY: LabelMap = LabelMap {
        negative: -1.0,
        positive: 1.0,
    };

    pub fn raw(&self, label: i8) -> f64 {
        if label > 0 {
            self.positive
        } else {
            self.negative
        }
    }
}

/// Maps exactly two distinct raw values onto {−1, +1}; the smaller value
/// becomes −1.
pub fn normalize_labels(raw: &[f64]) -> Result<(Vec<i8>, LabelMap)> {
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite label {bad}")));
    }
    let mut distinct = raw.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::LabelClasses {
            found: distinct.len(),
        });
    }
    let map = LabelMap {
        negative: distinct[0],
        positive: distinct[1],
    };
    let labels = raw
        .iter()
        .map(|&v| if v == map.positive { 1 } else { -1 })
        .collect();
    Ok((labels, map))
}

/// Dense feature matrix with labels in {−1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<i8>,
    label_map: LabelMap,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Matrix, labels: Vec<i8>) -> Result<Self> {
        Self::with_label_map(name, features, labels, LabelMap::IDENTITY)
    }

    /// Builds a dataset from raw labels, normalizing them with
    /// [`normalize_labels`].
    pub fn from_raw_labels(name: impl Into<String>, features: Matrix, raw: &[f64]) -> Result<Self> {
        let (labels, map) = normalize_labels(raw)?;
        Self::with_label_map(name, features, labels, map)
    }

    pub fn with_label_map(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<i8>,
        label_map: LabelMap,
    ) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.cols() == 0 {
            return Err(Error::InvalidArgument("dataset has no features".into()));
        }
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not ±1")));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            label_map,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label_map(&self) -> LabelMap {
        self.label_map
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Counts of (−1, +1) labels.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0).count();
        (self.labels.len() - pos, pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (neg, pos) = self.class_counts();
        neg > 0 && pos > 0
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(Error::LabelClasses { found: 1 })
        }
    }

    /// Rows at `indices`, in order. Panics on an empty index list.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        assert!(!indices.is_empty(), "empty subset");
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_map: self.label_map,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Libsvm,
    Csv,
}

impl DataFormat {
    /// `.csv` files are CSV; everything else is treated as LIBSVM.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DataFormat::Csv,
            _ => DataFormat::Libsvm,
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Libsvm => "libsvm",
            DataFormat::Csv => "csv",
        })
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "libsvm" => Ok(DataFormat::Libsvm),
            "csv" => Ok(DataFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// Reads a dataset file; the dataset is named after the file stem.
pub fn load(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let ds = match format {
        DataFormat::Libsvm => parse_libsvm(&text)?,
        DataFormat::Csv => parse_csv(&text)?,
    };
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    Ok(ds.renamed(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_zero_one() {
        let (y, map) = normalize_labels(&[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(y, vec![-1, 1, 1, -1]);
        assert_eq!(map.negative, 0.0);
        assert_eq!(map.positive, 1.0);
    }

    #[test]
    fn normalize_identity() {
        let (y, map) = normalize_labels(&[-1.0, 1.0]).unwrap();
        assert_eq!(y, vec![-1, 1]);
        assert_eq!(map, LabelMap::IDENTITY);
    }

    #[test]
    fn normalize_rejects_three_classes_and_one_class() {
        assert!(matches!(
            normalize_labels(&[1.0, 2.0, 3.0]),
            Err(Error::LabelClasses { found: 3 })
        ));
        assert!(matches!(
            normalize_labels(&[4.0, 4.0]),
            Err(Error::LabelClasses { found: 1 })
        ));
    }

    #[test]
    fn dataset_validation() {
        let m = Matrix::from_rows(&[[0.0], [f64::NAN]]).unwrap();
        assert!(Dataset::new("x", m, vec![1, -1]).is_err());
        let m = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(Dataset::new("x", m.clone(), vec![1, 0]).is_err());
        assert!(Dataset::new("x", m.clone(), vec![1]).is_err());
        let d = Dataset::new("x", m, vec![1, -1]).unwrap();
        assert_eq!(d.class_counts(), (1, 1));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(DataFormat::from_path(Path::new("a/b.CSV")), DataFormat::Csv);
        assert_eq!(DataFormat::from_path(Path::new("a/b.libsvm")), DataFormat::Libsvm);
        assert_eq!(DataFormat::from_path(Path::new("fourclass")), DataFormat::Libsvm);
    }
}
