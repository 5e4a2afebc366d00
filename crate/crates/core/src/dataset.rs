//! Tabular data ingestion and preprocessing.
//!
//! CSV files enter with one header row; numeric columns become features
//! directly, fully non-numeric columns are one-hot encoded, and an optional
//! category column is extracted for the category-balanced solver variant.
//! Missing cells and non-finite values are hard errors: silently dropping or
//! imputing rows would change the instance being solved.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),
    #[error("file has no data rows")]
    Empty,
    #[error("file has no feature columns")]
    NoFeatures,
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },
    #[error("unparseable numeric cell {value:?} at row {row}, column {column}")]
    UnparseableCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("category column {0:?} not found in header")]
    CategoryColumnAbsent(String),
    #[error("matrix dimensions are invalid: {0}")]
    BadShape(String),
    #[error("divisor must be positive, got {0}")]
    NonPositiveDivisor(f64),
}

/// Row-major `N x D` matrix of finite 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_objects: usize,
    n_features: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from a flat row-major buffer, validating shape and
    /// finiteness.
    pub fn from_vec(
        n_objects: usize,
        n_features: usize,
        values: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        if n_objects == 0 || n_features == 0 {
            return Err(DatasetError::BadShape(format!(
                "{n_objects} x {n_features}"
            )));
        }
        if values.len() != n_objects * n_features {
            return Err(DatasetError::BadShape(format!(
                "buffer of {} values for {n_objects} x {n_features}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite {
                row: pos / n_features,
                column: format!("{}", pos % n_features),
            });
        }
        Ok(Self {
            n_objects,
            n_features,
            values,
        })
    }

    /// Builds a matrix from per-object rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DatasetError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    got: row.len(),
                    expected: d,
                });
            }
        }
        Self::from_vec(n, d, rows.concat())
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_features)
    }

    /// Copies the given rows into a new matrix (row order preserved).
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let d = self.n_features;
        let mut values = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n_objects: indices.len(),
            n_features: d,
            values,
        }
    }
}

/// Category labels for the balanced-category problem variant: every object
/// carries exactly one category id in `0..n_categories`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategorySpec {
    labels: Vec<usize>,
    n_categories: usize,
    members: Vec<Vec<usize>>,
    value_names: Vec<String>,
}

impl CategorySpec {
    /// Builds a spec from raw per-object ids; `value_names[g]` is the original
    /// string for category `g` (ids are assigned in first-appearance order by
    /// [`CategorySpec::from_values`]).
    pub fn new(labels: Vec<usize>, value_names: Vec<String>) -> Result<Self, DatasetError> {
        let n_categories = value_names.len();
        if n_categories == 0 {
            return Err(DatasetError::BadShape("zero categories".into()));
        }
        let mut members = vec![Vec::new(); n_categories];
        for (i, &g) in labels.iter().enumerate() {
            if g >= n_categories {
                return Err(DatasetError::BadShape(format!(
                    "category id {g} out of range 0..{n_categories}"
                )));
            }
            members[g].push(i);
        }
        Ok(Self {
            labels,
            n_categories,
            members,
            value_names,
        })
    }

    /// Maps raw string values to ids in first-appearance order.
    pub fn from_values(values: &[String]) -> Result<Self, DatasetError> {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut labels = Vec::with_capacity(values.len());
        for v in values {
            let next = names.len();
            let id = *ids.entry(v.as_str()).or_insert_with(|| {
                names.push(v.clone());
                next
            });
            labels.push(id);
        }
        Self::new(labels, names)
    }

    pub fn n_objects(&self) -> usize {
        self.labels.len()
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn category_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Indices of objects in category `g`, ascending.
    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    pub fn value_names(&self) -> &[String] {
        &self.value_names
    }

    /// The string→id mapping as a JSON document
    /// `{"category_map": {"<value>": <id>, ...}}`, ids in ascending order.
    pub fn category_map_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (id, name) in self.value_names.iter().enumerate() {
            map.insert(name.clone(), serde_json::json!(id));
        }
        let doc = serde_json::json!({ "category_map": map });
        serde_json::to_string_pretty(&doc).expect("serializing a string map cannot fail")
    }
}

/// Result of [`load_csv`]: features, optional categories, and the expanded
/// feature column names (one-hot columns are named `column=value`).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub categories: Option<CategorySpec>,
    pub feature_names: Vec<String>,
}

enum ColumnKind {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

/// Loads a comma-separated file with one header row.
///
/// A column whose cells all parse as numbers becomes one feature; a column
/// with no numeric cells is one-hot encoded in place (first-appearance
/// order); a mixed column is an error. Empty cells are missing values and
/// refuse to load. If `category_column` is given, that column is removed from
/// the features and its raw values become the [`CategorySpec`].
pub fn load_csv(
    path: impl AsRef<Path>,
    category_column: Option<&str>,
) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DatasetError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DatasetError::Csv(e),
        })?;

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let n_cols = headers.len();
    let category_idx = match category_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::CategoryColumnAbsent(name.to_owned()))?,
        ),
        None => None,
    };

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n_cols {
            return Err(DatasetError::RaggedRow {
                row: row_idx,
                got: record.len(),
                expected: n_cols,
            });
        }
        for (col, value) in record.iter().enumerate() {
            if value.trim().is_empty() {
                return Err(DatasetError::MissingValue {
                    row: row_idx,
                    column: headers[col].clone(),
                });
            }
            cells[col].push(value.trim().to_owned());
        }
    }
    let n_rows = cells.first().map_or(0, Vec::len);
    if n_rows == 0 {
        return Err(DatasetError::Empty);
    }

    let mut categories = None;
    let mut columns: Vec<(String, ColumnKind)> = Vec::new();
    for (col, raw) in cells.into_iter().enumerate() {
        if Some(col) == category_idx {
            categories = Some(CategorySpec::from_values(&raw)?);
            continue;
        }
        columns.push((headers[col].clone(), classify_column(&headers[col], raw)?));
    }
    if columns.is_empty() {
        return Err(DatasetError::NoFeatures);
    }

    // Expand columns (one-hot blocks in place) into the row-major matrix.
    let mut feature_names = Vec::new();
    let mut expanded: Vec<Vec<f64>> = Vec::new();
    for (name, kind) in columns {
        match kind {
            ColumnKind::Numeric(vals) => {
                feature_names.push(name);
                expanded.push(vals);
            }
            ColumnKind::Categorical(raw) => {
                let (block, values) = one_hot(&raw);
                for v in values {
                    feature_names.push(format!("{name}={v}"));
                }
                for j in 0..block.n_features() {
                    expanded.push((0..n_rows).map(|i| block.row(i)[j]).collect());
                }
            }
        }
    }

    let d = expanded.len();
    let mut values = Vec::with_capacity(n_rows * d);
    for i in 0..n_rows {
        for col in &expanded {
            values.push(col[i]);
        }
    }
    Ok(Dataset {
        features: FeatureMatrix::from_vec(n_rows, d, values)?,
        categories,
        feature_names,
    })
}

fn classify_column(name: &str, raw: Vec<String>) -> Result<ColumnKind, DatasetError> {
    let parsed: Vec<Option<f64>> = raw.iter().map(|v| v.parse::<f64>().ok()).collect();
    let numeric = parsed.iter().filter(|p| p.is_some()).count();
    if numeric == raw.len() {
        for (row, p) in parsed.iter().enumerate() {
            let v = p.unwrap();
            if !v.is_finite() {
                return Err(DatasetError::NonFinite {
                    row,
                    column: name.to_owned(),
                });
            }
        }
        Ok(ColumnKind::Numeric(
            parsed.into_iter().map(Option::unwrap).collect(),
        ))
    } else if numeric == 0 {
        Ok(ColumnKind::Categorical(raw))
    } else {
        // Mixed numeric/text: almost always a data-entry defect, refuse.
        let (row, value) = raw
            .iter()
            .enumerate()
            .find(|(i, _)| parsed[*i].is_none())
            .map(|(i, v)| (i, v.clone()))
            .expect("mixed column has a non-numeric cell");
        Err(DatasetError::UnparseableCell {
            row,
            column: name.to_owned(),
            value,
        })
    }
}

/// Writes the matrix back out as CSV. Values use the shortest decimal form
/// that round-trips to the same 64-bit real, so load → write → load is
/// bit-exact.
pub fn write_csv(
    m: &FeatureMatrix,
    headers: &[String],
    path: impl AsRef<Path>,
) -> Result<(), DatasetError> {
    assert_eq!(headers.len(), m.n_features(), "header count must match D");
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Centers each column to mean 0 and scales to population standard deviation
/// 1. Constant columns become all-zeros: they carry no distance information
///    and dividing by their zero deviation would poison the matrix.
pub fn standardize(m: &FeatureMatrix) -> FeatureMatrix {
    let n = m.n_objects();
    let d = m.n_features();
    let mut means = crate::accum::column_sums(m.values(), d);
    for mean in &mut means {
        *mean /= n as f64;
    }
    let mut sq = vec![0.0; d];
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            let c = v - means[j];
            sq[j] += c * c;
        }
    }
    let sds: Vec<f64> = sq.iter().map(|s| (s / n as f64).sqrt()).collect();

    let mut values = Vec::with_capacity(n * d);
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if sds[j] > 0.0 {
                values.push((v - means[j]) / sds[j]);
            } else {
                values.push(0.0);
            }
        }
    }
    FeatureMatrix {
        n_objects: n,
        n_features: d,
        values,
    }
}

/// One-hot encodes a raw string column: one binary column per distinct value,
/// columns ordered by first appearance. Returns the `N x G` block and the
/// distinct values in column order.
pub fn one_hot(raw_column: &[String]) -> (FeatureMatrix, Vec<String>) {
    assert!(
        !raw_column.is_empty(),
        "one_hot requires at least one value"
    );
    let spec = CategorySpec::from_values(raw_column).expect("non-empty column");
    let n = raw_column.len();
    let g = spec.n_categories();
    let mut values = vec![0.0; n * g];
    for (i, &id) in spec.labels().iter().enumerate() {
        values[i * g + id] = 1.0;
    }
    (
        FeatureMatrix {
            n_objects: n,
            n_features: g,
            values,
        },
        spec.value_names().to_vec(),
    )
}

/// Divides every value by `divisor` (e.g. 255 to bring 8-bit pixel
/// intensities into `[0, 1]`).
pub fn scale_unit_interval(m: &FeatureMatrix, divisor: f64) -> Result<FeatureMatrix, DatasetError> {
    if !divisor.is_finite() || divisor <= 0.0 {
        return Err(DatasetError::NonPositiveDivisor(divisor));
    }
    Ok(FeatureMatrix {
        n_objects: m.n_objects,
        n_features: m.n_features,
        values: m.values.iter().map(|v| v / divisor).collect(),
    })
}
