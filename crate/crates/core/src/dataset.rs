//! Tabular input: loading, validation, standardization and the pairwise
//! Euclidean distance matrix consumed by every later stage.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{GfdcError, Result};

/// Selects the ground-truth column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// 0-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

impl LabelColumn {
    /// Interprets a command-line selector: a plain integer is an index,
    /// anything else a header name.
    pub fn parse(selector: &str) -> Self {
        match selector.trim().parse::<usize>() {
            Ok(idx) => LabelColumn::Index(idx),
            Err(_) => LabelColumn::Name(selector.trim().to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
}

/// `n` samples with `w` finite attributes each, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    w: usize,
    true_labels: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from row-major values. Rejects empty input, zero
    /// attributes, a length that is not a multiple of `w` and non-finite
    /// entries.
    pub fn from_flat(points: Vec<f64>, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(GfdcError::InvalidInput("attribute count must be at least 1".into()));
        }
        if points.is_empty() || !points.len().is_multiple_of(w) {
            return Err(GfdcError::InvalidInput(format!(
                "{} values cannot be split into rows of {w} attributes",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(GfdcError::Parse { row: pos / w + 1, column: pos % w + 1, message: "non-finite value".into() });
        }
        let n = points.len() / w;
        Ok(Dataset { points, n, w, true_labels: None })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let w = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * w);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != w {
                return Err(GfdcError::Parse {
                    row: i + 1,
                    column: row.len().min(w) + 1,
                    message: format!("expected {w} attributes, found {}", row.len()),
                });
            }
            points.extend_from_slice(row);
        }
        Dataset::from_flat(points, w)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(GfdcError::LengthMismatch { left: self.n, right: labels.len() });
        }
        self.true_labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.w..(i + 1) * self.w]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn true_labels(&self) -> Option<&[String]> {
        self.true_labels.as_deref()
    }

    /// Ground truth as integers. Labels that all parse as integers keep their
    /// value; otherwise classes are numbered from 1 in order of first
    /// appearance.
    pub fn label_codes(&self) -> Option<Vec<i64>> {
        let labels = self.true_labels.as_ref()?;
        let parsed: Option<Vec<i64>> = labels.iter().map(|l| l.trim().parse::<i64>().ok()).collect();
        if let Some(codes) = parsed {
            return Some(codes);
        }
        let mut seen: HashMap<&str, i64> = HashMap::new();
        Some(
            labels
                .iter()
                .map(|l| {
                    let next = seen.len() as i64 + 1;
                    *seen.entry(l.as_str()).or_insert(next)
                })
                .collect(),
        )
    }

    /// Copy of the dataset with one extra sample appended (its label, when
    /// the dataset carries labels, is `label`).
    pub fn with_appended(&self, point: &[f64], label: &str) -> Result<Self> {
        if point.len() != self.w {
            return Err(GfdcError::InvalidInput(format!(
                "appended point has {} attributes, dataset has {}",
                point.len(),
                self.w
            )));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(point);
        let mut out = Dataset::from_flat(points, self.w)?;
        if let Some(labels) = &self.true_labels {
            let mut labels = labels.clone();
            labels.push(label.to_string());
            out = out.with_labels(labels)?;
        }
        Ok(out)
    }
}

/// Reads a comma-delimited numeric table. Rows stay in file order; the
/// selected label column (if any) is removed from the attributes and kept as
/// ground truth.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GfdcError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(file);

    let mut records = reader.records();
    let mut row_no = 0usize;
    let mut header: Option<csv::StringRecord> = None;
    if opts.has_header {
        match records.next() {
            Some(rec) => {
                row_no += 1;
                header = Some(rec.map_err(|e| csv_error(e, row_no))?);
            }
            None => return Err(GfdcError::InvalidInput("file is empty".into())),
        }
    }

    let label_idx = match &opts.label_column {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Name(name)) => {
            let header = header.as_ref().ok_or_else(|| {
                GfdcError::InvalidInput(format!("label column '{name}' given by name but the file has no header"))
            })?;
            Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| GfdcError::InvalidInput(format!("no column named '{name}' in header")))?,
            )
        }
    };

    let mut width: Option<usize> = header.as_ref().map(|h| h.len());
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        row_no += 1;
        let rec = rec.map_err(|e| csv_error(e, row_no))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(wd) if wd != rec.len() => {
                return Err(GfdcError::Parse {
                    row: row_no,
                    column: rec.len().min(wd) + 1,
                    message: format!("expected {wd} fields, found {}", rec.len()),
                });
            }
            _ => {}
        }
        if let Some(li) = label_idx {
            if li >= rec.len() {
                return Err(GfdcError::InvalidInput(format!(
                    "label column {li} is out of range for {} columns",
                    rec.len()
                )));
            }
        }
        for (col, field) in rec.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(field.to_string());
                continue;
            }
            let value: f64 = field.parse().map_err(|_| GfdcError::Parse {
                row: row_no,
                column: col + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(GfdcError::Parse {
                    row: row_no,
                    column: col + 1,
                    message: format!("non-finite value '{field}'"),
                });
            }
            points.push(value);
        }
    }

    let width = width.ok_or_else(|| GfdcError::InvalidInput("file has no data rows".into()))?;
    let w = width.saturating_sub(usize::from(label_idx.is_some()));
    if w == 0 {
        return Err(GfdcError::InvalidInput("no attribute columns".into()));
    }
    let n = points.len() / w;
    if n < 2 {
        return Err(GfdcError::InvalidInput(format!("need at least 2 data rows, found {n}")));
    }
    let ds = Dataset::from_flat(points, w)?;
    if label_idx.is_some() {
        ds.with_labels(labels)
    } else {
        Ok(ds)
    }
}

fn csv_error(e: csv::Error, row: usize) -> GfdcError {
    GfdcError::Parse { row, column: 0, message: e.to_string() }
}

/// Centers every attribute and scales it to unit population variance.
/// Constant columns become all zeros.
pub fn standardize(ds: &Dataset) -> Dataset {
    let (n, w) = (ds.n, ds.w);
    let mut points = ds.points.clone();
    for col in 0..w {
        let mean = (0..n).map(|i| ds.points[i * w + col]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (ds.points[i * w + col] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for i in 0..n {
            let v = &mut points[i * w + col];
            *v = if std > 0.0 { (*v - mean) / std } else { 0.0 };
        }
    }
    Dataset { points, n, w, true_labels: ds.true_labels.clone() }
}

/// Dense symmetric `n x n` Euclidean distance matrix. Remembers the
/// attribute count of the space it was measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    dim: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps precomputed distances. Checks shape, symmetry, zero diagonal
    /// and nonnegativity.
    pub fn from_raw(n: usize, dim: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(GfdcError::InvalidInput(format!("expected {} distances, got {}", n * n, d.len())));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(GfdcError::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 || v != d[j * n + i] {
                    return Err(GfdcError::InvalidInput(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, dim, d })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distances among a subset of samples, reindexed `0..indices.len()` in
    /// the given order.
    pub fn submatrix(&self, indices: &[usize]) -> DistanceMatrix {
        let m = indices.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in indices {
            let row = self.row(i);
            d.extend(indices.iter().map(|&j| row[j]));
        }
        DistanceMatrix { n: m, dim: self.dim, d }
    }
}

/// Squared differences are summed attribute by attribute in index order, so
/// `d[i][j]` and `d[j][i]` are bit-identical and rows can be filled in any
/// order.
pub fn pairwise_distances(ds: &Dataset) -> DistanceMatrix {
    let n = ds.n;
    let mut d = vec![0.0; n * n];
    let fill = |(i, row): (usize, &mut [f64])| {
        let a = ds.point(i);
        for (j, out) in row.iter_mut().enumerate() {
            if i != j {
                *out = euclidean(a, ds.point(j));
            }
        }
    };
    #[cfg(feature = "parallel")]
    d.par_chunks_mut(n.max(1)).enumerate().for_each(fill);
    #[cfg(not(feature = "parallel"))]
    d.chunks_mut(n.max(1)).enumerate().for_each(fill);
    DistanceMatrix { n, dim: ds.w, d }
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_headerless_rows() {
        let f = write_tmp("0,0\n1,0\n0,1\n");
        let ds = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!((ds.n(), ds.w()), (3, 2));
        assert_eq!(ds.point(2), &[0.0, 1.0]);
        assert!(ds.true_labels().is_none());
    }

    #[test]
    fn strips_label_column_by_name() {
        let f = write_tmp("x,class,y\n1.5,a,2\n3,b,4\n");
        let opts = CsvOptions { has_header: true, label_column: Some(LabelColumn::Name("class".into())) };
        let ds = load_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.w(), 2);
        assert_eq!(ds.point(0), &[1.5, 2.0]);
        assert_eq!(ds.true_labels().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.label_codes().unwrap(), vec![1, 2]);
    }

    #[test]
    fn nan_cell_names_row() {
        let f = write_tmp("0,0\n1,NaN\n2,2\n");
        match load_csv(f.path(), &CsvOptions::default()) {
            Err(GfdcError::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_ragged_and_non_numeric_rows() {
        let f = write_tmp("0,0\n1,0,3\n");
        assert!(matches!(load_csv(f.path(), &CsvOptions::default()), Err(GfdcError::Parse { row: 2, .. })));
        let f = write_tmp("0,0\n1,abc\n");
        assert!(matches!(load_csv(f.path(), &CsvOptions::default()), Err(GfdcError::Parse { row: 2, column: 2, .. })));
    }

    #[test]
    fn rejects_missing_file_and_single_row() {
        let err = load_csv("/definitely/not/here.csv", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, GfdcError::Io { .. }));
        let f = write_tmp("1,2\n");
        assert!(matches!(load_csv(f.path(), &CsvOptions::default()), Err(GfdcError::InvalidInput(_))));
    }

    #[test]
    fn standardize_two_points_and_constant_column() {
        let ds = Dataset::from_rows(&[[0.0, 5.0], [2.0, 5.0]]).unwrap();
        let s = standardize(&ds);
        assert_eq!(s.point(0), &[-1.0, 0.0]);
        assert_eq!(s.point(1), &[1.0, 0.0]);

        let ds = Dataset::from_rows(&[[5.0], [5.0], [5.0]]).unwrap();
        assert_eq!(standardize(&ds).points(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_matches_two_pass_oracle() {
        // Independent: mean 2, population variance 2/3.
        let ds = Dataset::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let s = standardize(&ds);
        let sd = (2.0f64 / 3.0).sqrt();
        for (got, x) in s.points().iter().zip([1.0, 2.0, 3.0]) {
            approx::assert_abs_diff_eq!(*got, (x - 2.0) / sd, epsilon = 1e-12);
        }
    }

    #[test]
    fn distances_basic() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        let dm = pairwise_distances(&ds);
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.get(2, 3), 0.0);
        assert_eq!(dm.get(1, 0), dm.get(0, 1));
    }

    #[test]
    fn distances_match_per_pair_formula() {
        let rows = [[0.3, -1.2, 2.0], [1.1, 0.4, -0.7], [5.0, 2.5, 0.0], [-3.3, 0.1, 1.9], [0.0, 0.0, 0.0]];
        let ds = Dataset::from_rows(&rows).unwrap();
        let dm = pairwise_distances(&ds);
        for i in 0..5 {
            for j in 0..5 {
                let dx = rows[i][0] - rows[j][0];
                let dy = rows[i][1] - rows[j][1];
                let dz = rows[i][2] - rows[j][2];
                approx::assert_abs_diff_eq!(dm.get(i, j), (dx * dx + dy * dy + dz * dz).sqrt(), epsilon = 1e-12);
            }
        }
    }
}
