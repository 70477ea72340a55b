//! Dataset ingestion, normalisation and train/validation/test splitting.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Which CSV columns hold attributes and which holds the class label.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub attribute_columns: Vec<usize>,
    pub label_column: usize,
    /// Cell value marking a missing attribute; rows containing it are dropped.
    pub missing_marker: Option<String>,
    pub has_header: bool,
    /// Optional closed set of labels, in index order. When absent, labels are
    /// indexed in order of first appearance.
    pub labels: Option<Vec<String>>,
    /// Optional attribute names; otherwise taken from the header or numbered.
    pub attribute_names: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn new(attribute_columns: Vec<usize>, label_column: usize) -> Self {
        CsvSchema {
            attribute_columns,
            label_column,
            missing_marker: None,
            has_header: false,
            labels: None,
            attribute_names: None,
        }
    }

    /// `iris.data`: four measurements then the species name.
    pub fn iris() -> Self {
        CsvSchema {
            attribute_names: Some(
                ["sepal_length", "sepal_width", "petal_length", "petal_width"]
                    .map(String::from)
                    .to_vec(),
            ),
            ..Self::new((0..4).collect(), 4)
        }
    }

    /// `breast-cancer-wisconsin.data`: sample id, nine cytology scores, class
    /// (2 benign, 4 malignant), `?` for missing values.
    pub fn breast_cancer() -> Self {
        CsvSchema {
            missing_marker: Some("?".into()),
            attribute_names: Some(
                [
                    "clump_thickness",
                    "cell_size_uniformity",
                    "cell_shape_uniformity",
                    "marginal_adhesion",
                    "epithelial_cell_size",
                    "bare_nuclei",
                    "bland_chromatin",
                    "normal_nucleoli",
                    "mitoses",
                ]
                .map(String::from)
                .to_vec(),
            ),
            ..Self::new((1..10).collect(), 10)
        }
    }

    /// `pima-indians-diabetes.data`: eight clinical measurements then a 0/1 outcome.
    pub fn diabetes() -> Self {
        CsvSchema {
            attribute_names: Some(
                [
                    "pregnancies",
                    "plasma_glucose",
                    "diastolic_pressure",
                    "triceps_skinfold",
                    "serum_insulin",
                    "bmi",
                    "pedigree",
                    "age",
                ]
                .map(String::from)
                .to_vec(),
            ),
            ..Self::new((0..8).collect(), 8)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub attributes: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub rows: Vec<Row>,
    pub class_names: Vec<String>,
    pub attribute_names: Vec<String>,
    /// Rows skipped because of missing attribute values.
    pub dropped_rows: usize,
}

impl RawDataset {
    pub fn n_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn parse_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_reader(file, schema)
}

pub fn parse_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<RawDataset> {
    if schema.attribute_columns.is_empty() {
        return Err(Error::config("schema needs at least one attribute column"));
    }
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let mut attribute_names = schema.attribute_names.clone();
    if attribute_names.is_none() && schema.has_header {
        let header = csv.headers().map_err(|e| csv_error(e, 1))?.clone();
        let names = schema
            .attribute_columns
            .iter()
            .map(|&c| header.get(c).map(str::to_owned))
            .collect::<Option<Vec<_>>>();
        attribute_names = names;
    }
    let attribute_names = attribute_names.unwrap_or_else(|| {
        (0..schema.attribute_columns.len())
            .map(|i| format!("attr{i}"))
            .collect()
    });
    if attribute_names.len() != schema.attribute_columns.len() {
        return Err(Error::config(
            "attribute name count does not match attribute columns",
        ));
    }

    let mut class_names: Vec<String> = schema.labels.clone().unwrap_or_default();
    let mut class_index: HashMap<String, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let closed_labels = schema.labels.is_some();

    let width = schema
        .attribute_columns
        .iter()
        .copied()
        .chain([schema.label_column])
        .max()
        .unwrap()
        + 1;
    let mut rows = Vec::new();
    let mut dropped_rows = 0;
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(e, line)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < width {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected at least {width} fields, found {}", record.len()),
            });
        }
        let missing = |cell: &str| schema.missing_marker.as_deref().is_some_and(|m| cell == m);
        if schema
            .attribute_columns
            .iter()
            .any(|&c| missing(&record[c]))
        {
            dropped_rows += 1;
            continue;
        }
        let attributes = schema
            .attribute_columns
            .iter()
            .map(|&c| {
                let cell = &record[c];
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MalformedRow {
                        line,
                        message: format!("column {c}: {cell:?} is not a finite number"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let label_text = &record[schema.label_column];
        let label = match class_index.get(label_text) {
            Some(&i) => i,
            None if closed_labels => {
                return Err(Error::UnknownLabel {
                    line,
                    label: label_text.to_owned(),
                })
            }
            None => {
                class_names.push(label_text.to_owned());
                class_index.insert(label_text.to_owned(), class_names.len() - 1);
                class_names.len() - 1
            }
        };
        rows.push(Row { attributes, label });
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if class_names.len() < 2 {
        return Err(Error::config(
            "a classification dataset needs at least two classes",
        ));
    }
    Ok(RawDataset {
        rows,
        class_names,
        attribute_names,
        dropped_rows,
    })
}

fn csv_error(e: csv::Error, line: u64) -> Error {
    Error::MalformedRow {
        line,
        message: e.to_string(),
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Sample counts for the three portions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitCounts {
    pub const fn new(train: usize, validation: usize, test: usize) -> Self {
        SplitCounts {
            train,
            validation,
            test,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }

    /// Shrinks the training count so the split fits into `available` rows.
    /// Validation and test counts are never reduced.
    pub fn fit_to(self, available: usize) -> Result<Self> {
        let shortfall = self.total().saturating_sub(available);
        if shortfall > 0 && shortfall >= self.train {
            return Err(Error::SplitTooLarge {
                requested: self.total(),
                available,
            });
        }
        Ok(SplitCounts {
            train: self.train - shortfall,
            ..self
        })
    }
}

/// Normalised samples with one-hot targets, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Portion {
    n_attributes: usize,
    n_classes: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    labels: Vec<usize>,
    source_rows: Vec<usize>,
}

impl Portion {
    fn empty(n_attributes: usize, n_classes: usize) -> Self {
        Portion {
            n_attributes,
            n_classes,
            inputs: Vec::new(),
            targets: Vec::new(),
            labels: Vec::new(),
            source_rows: Vec::new(),
        }
    }

    fn push(&mut self, attributes: &[f64], label: usize, source_row: usize) {
        debug_assert_eq!(attributes.len(), self.n_attributes);
        assert!(label < self.n_classes, "label {label} out of range");
        self.inputs.extend_from_slice(attributes);
        let start = self.targets.len();
        self.targets.resize(start + self.n_classes, 0.0);
        self.targets[start + label] = 1.0;
        self.labels.push(label);
        self.source_rows.push(source_row);
    }

    /// Builds a portion from already-scaled rows.
    pub fn from_rows(rows: impl IntoIterator<Item = (Vec<f64>, usize)>, n_classes: usize) -> Self {
        let mut rows = rows.into_iter().peekable();
        let width = rows.peek().map_or(0, |(a, _)| a.len());
        let mut p = Portion::empty(width, n_classes);
        for (i, (attrs, label)) in rows.enumerate() {
            assert_eq!(attrs.len(), width, "ragged rows");
            p.push(&attrs, label, i);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.n_attributes..(i + 1) * self.n_attributes]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Indices of the originating rows in the raw dataset.
    pub fn source_rows(&self) -> &[usize] {
        &self.source_rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Portion,
    pub validation: Portion,
    pub test: Portion,
    /// Per-attribute `(min, max)` of the training portion.
    pub normalization: Vec<(f64, f64)>,
}

impl DatasetSplit {
    pub fn n_attributes(&self) -> usize {
        self.train.n_attributes()
    }

    pub fn n_classes(&self) -> usize {
        self.train.n_classes()
    }
}

/// Randomly permutes the rows with `seed` and cuts them into train,
/// validation and test portions of exactly the requested sizes. Attributes
/// are min-max scaled with training-portion statistics.
pub fn split_dataset(d: &RawDataset, counts: SplitCounts, seed: u64) -> Result<DatasetSplit> {
    if counts.total() > d.len() {
        return Err(Error::SplitTooLarge {
            requested: counts.total(),
            available: d.len(),
        });
    }
    if counts.train == 0 || counts.validation == 0 || counts.test == 0 {
        return Err(Error::config("every portion needs at least one sample"));
    }

    let mut order: Vec<usize> = (0..d.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    order.shuffle(&mut rng);

    let train_rows = &order[..counts.train];
    let val_rows = &order[counts.train..counts.train + counts.validation];
    let test_rows = &order[counts.train + counts.validation..counts.total()];

    let n = d.n_attributes();
    let mut normalization = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for &r in train_rows {
        for (stat, &v) in normalization.iter_mut().zip(&d.rows[r].attributes) {
            stat.0 = stat.0.min(v);
            stat.1 = stat.1.max(v);
        }
    }

    let build = |rows: &[usize]| {
        let mut p = Portion::empty(n, d.n_classes());
        let mut scaled = vec![0.0; n];
        for &r in rows {
            let row = &d.rows[r];
            for ((s, &v), &(lo, hi)) in scaled.iter_mut().zip(&row.attributes).zip(&normalization) {
                *s = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            }
            p.push(&scaled, row.label, r);
        }
        p
    };

    Ok(DatasetSplit {
        train: build(train_rows),
        validation: build(val_rows),
        test: build(test_rows),
        normalization,
    })
}

/// Stream of the per-trial seed reserved for sampling the split, so that it
/// never overlaps the optimizer's stream.
pub(crate) const SPLIT_STREAM: u64 = 1;
