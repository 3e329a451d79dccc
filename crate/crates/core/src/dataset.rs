//! Tabular datasets for the abstraction experiments.
//!
//! CSV layout: first column is the class label, remaining columns are
//! numeric features (images arrive pre-flattened row-major). A header row is
//! detected by attempting to parse the first record's feature cells.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

#[derive(Debug, Clone, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("row {row} has {got} features, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {col}: cannot parse '{value}' as a number")]
    BadValue { row: usize, col: usize, value: String },
    #[error("row {row} has no feature columns")]
    NoFeatures { row: usize },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("labels and samples differ in length ({labels} vs {samples})")]
    LabelMismatch { labels: usize, samples: usize },
}

/// Feature vectors with categorical labels. Labels are stored as dense ids
/// `0..class_count`; the original label strings are kept for output.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Build from feature rows and raw label strings. Distinct labels are
    /// mapped to ids in sorted order so ingestion is deterministic.
    pub fn from_labeled(
        features: Vec<Vec<f64>>,
        raw_labels: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if features.is_empty() {
            return Err(DatasetError::Empty);
        }
        if features.len() != raw_labels.len() {
            return Err(DatasetError::LabelMismatch {
                labels: raw_labels.len(),
                samples: features.len(),
            });
        }
        let width = features[0].len();
        if width == 0 {
            return Err(DatasetError::NoFeatures { row: 0 });
        }
        for (row, f) in features.iter().enumerate() {
            if f.len() != width {
                return Err(DatasetError::RaggedRow {
                    row,
                    expected: width,
                    got: f.len(),
                });
            }
        }
        let mut ids = BTreeMap::new();
        for name in &raw_labels {
            let next = ids.len();
            ids.entry(name.clone()).or_insert(next);
        }
        // BTreeMap iteration is sorted; reassign ids in sorted label order.
        let label_names: Vec<String> = ids.keys().cloned().collect();
        let sorted_ids: BTreeMap<&String, usize> = label_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let labels = raw_labels.iter().map(|n| sorted_ids[n]).collect();
        Ok(Dataset {
            features,
            labels,
            label_names,
        })
    }

    /// Build from features and pre-assigned integer class ids.
    pub fn from_numeric_labels(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self, DatasetError> {
        let raw = labels.iter().map(|l| l.to_string()).collect();
        Dataset::from_labeled(features, raw)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, DatasetError> {
        let file = std::fs::File::open(path).map_err(|e| DatasetError::Csv(e.to_string()))?;
        Dataset::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut features = Vec::new();
        let mut raw_labels = Vec::new();
        for (row, record) in csv_reader.records().enumerate() {
            let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
            if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
                continue;
            }
            if record.len() < 2 {
                return Err(DatasetError::NoFeatures { row });
            }
            let cells: Vec<&str> = record.iter().collect();
            let parsed: Result<Vec<f64>, usize> = cells[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.parse::<f64>().map_err(|_| i + 1))
                .collect();
            match parsed {
                Ok(values) => {
                    if values.iter().any(|v| !v.is_finite()) {
                        let col = values.iter().position(|v| !v.is_finite()).unwrap() + 1;
                        return Err(DatasetError::BadValue {
                            row,
                            col,
                            value: cells[col].to_string(),
                        });
                    }
                    raw_labels.push(cells[0].to_string());
                    features.push(values);
                }
                Err(col) => {
                    // A non-numeric feature cell in the first record is a
                    // header; anywhere else it is a missing/bad value.
                    if row == 0 && features.is_empty() {
                        continue;
                    }
                    return Err(DatasetError::BadValue {
                        row,
                        col,
                        value: cells[col].to_string(),
                    });
                }
            }
        }
        Dataset::from_labeled(features, raw_labels)
    }

    pub fn sample_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }
}
