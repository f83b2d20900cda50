//! Feature matrices, label vectors, task assembly and persistence.
//!
//! Features are dense row-major matrices, one sample per row. Labels are
//! 1-based class ids on disk and 0-based internally. The on-disk formats
//! are plain CSV (optional single header line, auto-detected) and a
//! little-endian binary layout (`raw-f64`) for bit-exact round trips.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense n-samples-by-d-features matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
}

impl FeatureMatrix {
    /// Validates that the matrix is nonempty and every entry is finite.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidDimensions(format!(
                "feature matrix must be at least 1x1, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                if !data[(i, j)].is_finite() {
                    return Err(Error::NonFiniteValue { row: i, col: j });
                }
            }
        }
        Ok(Self { data })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Stacks `self` on top of `other`; both must share the feature
    /// dimension.
    pub fn vstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.cols() != other.cols() {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {}-col and {}-col matrices",
                self.cols(),
                other.cols()
            )));
        }
        let mut out = DMatrix::zeros(self.rows() + other.rows(), self.cols());
        out.rows_mut(0, self.rows()).copy_from(&self.data);
        out.rows_mut(self.rows(), other.rows()).copy_from(&other.data);
        FeatureMatrix::new(out)
    }
}

/// Class assignments for one domain, stored 0-based against a fixed class
/// count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    classes: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    /// Builds from 1-based on-disk ids, validating `1..=num_classes`.
    pub fn from_one_based(raw: &[i64], num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidLabels(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        let mut classes = Vec::with_capacity(raw.len());
        for &label in raw {
            if label < 1 || label > num_classes as i64 {
                return Err(Error::LabelOutOfRange { label, num_classes });
            }
            classes.push((label - 1) as usize);
        }
        Ok(Self {
            classes,
            num_classes,
        })
    }

    /// Builds from internal 0-based ids.
    pub fn from_zero_based(classes: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidLabels(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if let Some(&bad) = classes.iter().find(|&&c| c >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label: bad as i64 + 1,
                num_classes,
            });
        }
        Ok(Self {
            classes,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// 0-based class ids.
    pub fn as_slice(&self) -> &[usize] {
        &self.classes
    }

    /// 1-based ids for persistence.
    pub fn to_one_based(&self) -> Vec<i64> {
        self.classes.iter().map(|&c| c as i64 + 1).collect()
    }
}

/// A source/target task: labeled source samples plus unlabeled target
/// samples over the same feature space, with optional held-out target
/// truth for evaluation.
#[derive(Debug, Clone)]
pub struct TaskPair {
    pub source_x: FeatureMatrix,
    pub source_y: LabelVector,
    pub target_x: FeatureMatrix,
    pub target_y_truth: Option<LabelVector>,
    pub num_classes: usize,
}

impl TaskPair {
    pub fn new(
        source_x: FeatureMatrix,
        source_y: LabelVector,
        target_x: FeatureMatrix,
        target_y_truth: Option<LabelVector>,
    ) -> Result<Self> {
        let num_classes = source_y.num_classes();
        if source_x.cols() != target_x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "source has {} features, target has {}",
                source_x.cols(),
                target_x.cols()
            )));
        }
        if source_y.len() != source_x.rows() {
            return Err(Error::LengthMismatch {
                left: source_y.len(),
                right: source_x.rows(),
            });
        }
        let mut seen = vec![false; num_classes];
        for &c in source_y.as_slice() {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidLabels(format!(
                "source domain has no sample of class {}",
                missing + 1
            )));
        }
        if let Some(truth) = &target_y_truth {
            if truth.len() != target_x.rows() {
                return Err(Error::LengthMismatch {
                    left: truth.len(),
                    right: target_x.rows(),
                });
            }
            if truth.num_classes() != num_classes {
                return Err(Error::InvalidLabels(format!(
                    "target truth declares {} classes, source declares {}",
                    truth.num_classes(),
                    num_classes
                )));
            }
        }
        Ok(Self {
            source_x,
            source_y,
            target_x,
            target_y_truth,
            num_classes,
        })
    }

    pub fn n_source(&self) -> usize {
        self.source_x.rows()
    }

    pub fn n_target(&self) -> usize {
        self.target_x.rows()
    }

    pub fn n_total(&self) -> usize {
        self.n_source() + self.n_target()
    }

    pub fn feature_dim(&self) -> usize {
        self.source_x.cols()
    }

    /// Applies `scheme` to the concatenated source+target rows so both
    /// domains share one normalization, then returns the joint matrix
    /// (source rows first).
    pub fn preprocessed_features(&self, scheme: Preprocess) -> Result<FeatureMatrix> {
        let joint = self.source_x.vstack(&self.target_x)?;
        Ok(preprocess(&joint, scheme))
    }
}

/// One-hot label matrix `Y` (classes-by-samples, zero on target columns)
/// and the diagonal source indicator `A`, stored as its diagonal.
#[derive(Debug, Clone)]
pub struct LabelMatrix {
    pub y: DMatrix<f64>,
    pub a: DVector<f64>,
}

impl LabelMatrix {
    pub fn a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.a)
    }
}

/// Builds `Y` and `A` for a task: source columns one-hot, target columns
/// zero, `A` indicating source positions.
pub fn build_label_structures(task: &TaskPair) -> LabelMatrix {
    let n = task.n_total();
    let mut y = DMatrix::zeros(task.num_classes, n);
    let mut a = DVector::zeros(n);
    for (j, &c) in task.source_y.as_slice().iter().enumerate() {
        y[(c, j)] = 1.0;
        a[j] = 1.0;
    }
    LabelMatrix { y, a }
}

/// Column/row normalization applied before kernel construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    None,
    Zscore,
    UnitL2,
    #[default]
    ZscoreThenUnitL2,
}

/// Normalizes `x` per the scheme. Z-scoring uses the population standard
/// deviation; constant columns are left at zero rather than divided.
/// Row normalization leaves zero rows untouched.
pub fn preprocess(x: &FeatureMatrix, scheme: Preprocess) -> FeatureMatrix {
    let out = match scheme {
        Preprocess::None => x.as_matrix().clone(),
        Preprocess::Zscore => zscore(x.as_matrix()),
        Preprocess::UnitL2 => unit_l2(x.as_matrix()),
        Preprocess::ZscoreThenUnitL2 => unit_l2(&zscore(x.as_matrix())),
    };
    FeatureMatrix { data: out }
}

fn zscore(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    for j in 0..x.ncols() {
        let mean = x.column(j).sum() / n;
        let var = x.column(j).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 0.0 {
            for i in 0..x.nrows() {
                out[(i, j)] = (x[(i, j)] - mean) / std;
            }
        } else {
            for i in 0..x.nrows() {
                out[(i, j)] = 0.0;
            }
        }
    }
    out
}

fn unit_l2(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for i in 0..x.nrows() {
        let norm = x.row(i).norm();
        if norm > 0.0 {
            for j in 0..x.ncols() {
                out[(i, j)] /= norm;
            }
        }
    }
    out
}

/// On-disk matrix layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    #[default]
    Csv,
    RawF64,
}

/// Loads a feature matrix, rejecting non-finite entries. CSV may carry a
/// single header line, detected by any cell that fails to parse as f64.
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<FeatureMatrix> {
    match format {
        MatrixFormat::Csv => load_csv_matrix(path),
        MatrixFormat::RawF64 => load_raw_matrix(path),
    }
}

/// Writes a matrix in the requested format. Floats are printed with the
/// shortest representation that round-trips, so save-then-load is
/// bit-exact in both formats.
pub fn save_matrix(x: &FeatureMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => save_csv_matrix(x, path),
        MatrixFormat::RawF64 => save_raw_matrix(x, path),
    }
}

fn open(path: &Path) -> Result<File> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses raw CSV rows of f64 cells. Returns the parsed rows; the first
/// line is dropped as a header when any of its cells fails to parse.
fn parse_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let reader = BufReader::new(open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    let mut saw_header = false;
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let row = line_idx - usize::from(saw_header);
        if line_idx == 0 && cells.iter().any(|c| c.parse::<f64>().is_err()) {
            saw_header = true;
            continue;
        }
        let mut parsed = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::ParseError {
                row,
                col,
                detail: format!("cannot parse {cell:?} as a number"),
            })?;
            parsed.push(value);
        }
        if rows.is_empty() {
            width = parsed.len();
        } else if parsed.len() != width {
            return Err(Error::ParseError {
                row,
                col: parsed.len().min(width),
                detail: format!("expected {width} columns, found {}", parsed.len()),
            });
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            row: 0,
            col: 0,
            detail: "no data rows".into(),
        });
    }
    Ok(rows)
}

fn load_csv_matrix(path: &Path) -> Result<FeatureMatrix> {
    let rows = parse_csv_rows(path)?;
    let data = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    FeatureMatrix::new(data)
}

fn save_csv_matrix(x: &FeatureMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let m = x.as_matrix();
    for i in 0..m.nrows() {
        let line = (0..m.ncols())
            .map(|j| m[(i, j)].to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

// raw-f64 layout: two little-endian u64 (rows, cols) followed by
// rows*cols little-endian f64 in row-major order.
fn load_raw_matrix(path: &Path) -> Result<FeatureMatrix> {
    let mut reader = BufReader::new(open(path)?);
    let mut header = [0u8; 16];
    reader.read_exact(&mut header).map_err(|_| Error::ParseError {
        row: 0,
        col: 0,
        detail: "raw-f64 header truncated".into(),
    })?;
    let rows = u64::from_le_bytes(header[0..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimensions(format!(
            "raw-f64 header declares {rows}x{cols}"
        )));
    }
    let mut data = DMatrix::zeros(rows, cols);
    let mut buf = [0u8; 8];
    for i in 0..rows {
        for j in 0..cols {
            reader.read_exact(&mut buf).map_err(|_| Error::ParseError {
                row: i,
                col: j,
                detail: "raw-f64 payload truncated".into(),
            })?;
            let value = f64::from_le_bytes(buf);
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { row: i, col: j });
            }
            data[(i, j)] = value;
        }
    }
    FeatureMatrix::new(data)
}

fn save_raw_matrix(x: &FeatureMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let m = x.as_matrix();
    w.write_all(&(m.nrows() as u64).to_le_bytes())
        .map_err(io_err(path))?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())
        .map_err(io_err(path))?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes()).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Loads a single-column CSV of integer class ids (1-based on disk), with
/// the same optional-header rule as feature CSVs.
pub fn load_labels(path: &Path) -> Result<Vec<i64>> {
    let reader = BufReader::new(open(path)?);
    let mut labels = Vec::new();
    let mut saw_header = false;
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = line_idx - usize::from(saw_header);
        if line_idx == 0 && trimmed.parse::<i64>().is_err() {
            saw_header = true;
            continue;
        }
        let value: i64 = trimmed.parse().map_err(|_| Error::ParseError {
            row,
            col: 0,
            detail: format!("cannot parse {trimmed:?} as an integer label"),
        })?;
        labels.push(value);
    }
    if labels.is_empty() {
        return Err(Error::ParseError {
            row: 0,
            col: 0,
            detail: "no label rows".into(),
        });
    }
    Ok(labels)
}

pub fn save_labels(labels: &LabelVector, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for id in labels.to_one_based() {
        writeln!(w, "{id}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write as _;

    fn mat(rows: usize, cols: usize, values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(DMatrix::from_row_slice(rows, cols, values)).unwrap()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_parses_plain_matrix() {
        let f = write_temp("1.0,2.0\n3.0,4.0\n");
        let m = load_matrix(f.path(), MatrixFormat::Csv).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.as_matrix()[(0, 1)], 2.0);
        assert_eq!(m.as_matrix()[(1, 0)], 3.0);
    }

    #[test]
    fn csv_detects_header() {
        let f = write_temp("f1,f2\n1.0,2.0\n");
        let m = load_matrix(f.path(), MatrixFormat::Csv).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 2));
    }

    #[test]
    fn csv_rejects_nan_cell() {
        let f = write_temp("1.0,nan\n");
        match load_matrix(f.path(), MatrixFormat::Csv) {
            Err(Error::NonFiniteValue { row: 0, col: 1 }) => {}
            other => panic!("expected NonFiniteValue, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_empty_file() {
        let f = write_temp("");
        assert!(matches!(
            load_matrix(f.path(), MatrixFormat::Csv),
            Err(Error::ParseError { .. })
        ));
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let f = write_temp("1.0,2.0\n3.0\n");
        assert!(matches!(
            load_matrix(f.path(), MatrixFormat::Csv),
            Err(Error::ParseError { row: 1, .. })
        ));
    }

    #[test]
    fn csv_reports_bad_cell_position() {
        let f = write_temp("1.0,2.0\n3.0,abc\n");
        match load_matrix(f.path(), MatrixFormat::Csv) {
            Err(Error::ParseError { row: 1, col: 1, .. }) => {}
            other => panic!("expected ParseError at (1,1), got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_reported() {
        assert!(matches!(
            load_matrix(Path::new("/nonexistent/x.csv"), MatrixFormat::Csv),
            Err(Error::MissingFile { .. })
        ));
    }

    #[test]
    fn round_trip_is_bit_exact_in_both_formats() {
        let m = mat(2, 3, &[1.5, -2.25, 1.0 / 3.0, 0.1, 1e-300, 12345.6789]);
        for format in [MatrixFormat::Csv, MatrixFormat::RawF64] {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.dat");
            save_matrix(&m, &path, format).unwrap();
            let back = load_matrix(&path, format).unwrap();
            assert_eq!(back.as_matrix(), m.as_matrix(), "{format:?}");
        }
    }

    #[test]
    fn raw_f64_rejects_truncation() {
        let m = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.raw");
        save_matrix(&m, &path, MatrixFormat::RawF64).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(
            load_matrix(&path, MatrixFormat::RawF64),
            Err(Error::ParseError { .. })
        ));
    }

    #[test]
    fn zscore_two_point_column() {
        let m = mat(2, 1, &[1.0, 3.0]);
        let z = preprocess(&m, Preprocess::Zscore);
        assert_relative_eq!(z.as_matrix()[(0, 0)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(z.as_matrix()[(1, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zscore_leaves_constant_column_at_zero() {
        let m = mat(3, 2, &[5.0, 1.0, 5.0, 2.0, 5.0, 3.0]);
        let z = preprocess(&m, Preprocess::Zscore);
        for i in 0..3 {
            assert_eq!(z.as_matrix()[(i, 0)], 0.0);
        }
        let col1_mean = z.as_matrix().column(1).sum() / 3.0;
        assert!(col1_mean.abs() < 1e-10);
    }

    #[test]
    fn unit_l2_three_four_five() {
        let m = mat(1, 2, &[3.0, 4.0]);
        let u = preprocess(&m, Preprocess::UnitL2);
        assert_relative_eq!(u.as_matrix()[(0, 0)], 0.6, epsilon = 1e-12);
        assert_relative_eq!(u.as_matrix()[(0, 1)], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn unit_l2_leaves_zero_row() {
        let m = mat(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let u = preprocess(&m, Preprocess::UnitL2);
        assert_eq!(u.as_matrix()[(0, 0)], 0.0);
        assert_eq!(u.as_matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn preprocess_none_is_identity() {
        let m = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(preprocess(&m, Preprocess::None).as_matrix(), m.as_matrix());
    }

    fn small_task() -> TaskPair {
        let sx = mat(2, 1, &[0.0, 1.0]);
        let sy = LabelVector::from_one_based(&[1, 2], 2).unwrap();
        let tx = mat(1, 1, &[0.5]);
        TaskPair::new(sx, sy, tx, None).unwrap()
    }

    #[test]
    fn label_structures_match_hand_construction() {
        let lm = build_label_structures(&small_task());
        assert_eq!(
            lm.y,
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert_eq!(lm.a, DVector::from_vec(vec![1.0, 1.0, 0.0]));
    }

    #[test]
    fn label_structures_column_sums_equal_a_diagonal() {
        let lm = build_label_structures(&small_task());
        for j in 0..3 {
            assert_eq!(lm.y.column(j).sum(), lm.a[j]);
        }
    }

    #[test]
    fn label_structures_no_target_gives_identity_a() {
        let sx = mat(2, 1, &[0.0, 1.0]);
        let sy = LabelVector::from_one_based(&[1, 2], 2).unwrap();
        // zero-target tasks are not constructible through TaskPair; exercise
        // the builder contract with a single-target task instead and check
        // only source columns of A
        let tx = mat(1, 1, &[3.0]);
        let task = TaskPair::new(sx, sy, tx, None).unwrap();
        let lm = build_label_structures(&task);
        assert_eq!(lm.a.iter().sum::<f64>() as usize, task.n_source());
    }

    #[test]
    fn task_pair_rejects_missing_class() {
        let sx = mat(2, 1, &[0.0, 1.0]);
        let sy = LabelVector::from_one_based(&[1, 1], 2).unwrap();
        let tx = mat(1, 1, &[0.5]);
        assert!(matches!(
            TaskPair::new(sx, sy, tx, None),
            Err(Error::InvalidLabels(_))
        ));
    }

    #[test]
    fn task_pair_rejects_feature_dim_mismatch() {
        let sx = mat(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let sy = LabelVector::from_one_based(&[1, 2], 2).unwrap();
        let tx = mat(1, 1, &[0.5]);
        assert!(matches!(
            TaskPair::new(sx, sy, tx, None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn labels_round_trip_one_based() {
        let labels = LabelVector::from_one_based(&[2, 1, 3], 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        save_labels(&labels, &path).unwrap();
        let raw = load_labels(&path).unwrap();
        assert_eq!(raw, vec![2, 1, 3]);
        let back = LabelVector::from_one_based(&raw, 3).unwrap();
        assert_eq!(back, labels);
    }

    #[test]
    fn labels_reject_out_of_range() {
        assert!(matches!(
            LabelVector::from_one_based(&[1, 4], 3),
            Err(Error::LabelOutOfRange { label: 4, .. })
        ));
        assert!(matches!(
            LabelVector::from_one_based(&[0, 1], 3),
            Err(Error::LabelOutOfRange { label: 0, .. })
        ));
    }
}
