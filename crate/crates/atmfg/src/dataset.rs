//! Tabular data ingestion and row normalization.
//!
//! Rows are z-normalized with the population standard deviation, so the
//! Pearson correlation of two rows reduces to `dot(row_i, row_j) / D`.
//! Constant rows cannot be normalized; they are zeroed out and recorded as
//! degenerate, which makes their correlation to everything 0.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic prefix of the binary matrix file format.
pub const BINARY_MAGIC: &[u8; 4] = b"ATMF";
/// Version tag of the binary matrix file format.
pub const BINARY_VERSION: u32 = 1;

/// On-disk matrix formats accepted by [`load_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

/// Dense row-major feature matrix: one node per row, one feature per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    normalized: bool,
    degenerate: Vec<u32>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values. `values.len()` must equal
    /// `n_rows * n_cols`, with at least one row and two columns.
    pub fn from_values(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 {
            return Err(Error::EmptyInput("matrix has no rows".into()));
        }
        if n_cols < 2 {
            return Err(Error::Dimension(format!(
                "matrix needs at least 2 columns, got {n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "expected {} values for a {}x{} matrix, got {}",
                n_rows * n_cols,
                n_rows,
                n_cols,
                values.len()
            )));
        }
        Ok(DataMatrix {
            n_rows,
            n_cols,
            values,
            normalized: false,
            degenerate: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Row ids that were constant before normalization (stored as all-zero).
    pub fn degenerate_rows(&self) -> &[u32] {
        &self.degenerate
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate.binary_search(&(i as u32)).is_ok()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pearson correlation of rows `i` and `j`, evaluated as a scaled inner
    /// product. Requires a normalized matrix; degenerate rows correlate 0
    /// with everything (their stored row is all-zero).
    pub fn correlation(&self, i: usize, j: usize) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Parameter(
                "correlation requires a normalized matrix".into(),
            ));
        }
        let n = self.n_rows;
        if i >= n {
            return Err(Error::Bounds { index: i, len: n });
        }
        if j >= n {
            return Err(Error::Bounds { index: j, len: n });
        }
        Ok(dot(self.row(i), self.row(j)) / self.n_cols as f64)
    }

    /// Inner product of an arbitrary vector with row `j`, divided by D.
    /// On normalized rows this is the correlation of the vector's source
    /// rows summed, which is how face centroids are scored.
    pub fn scaled_dot(&self, vector: &[f64], j: usize) -> Result<f64> {
        if vector.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "query vector has length {}, matrix has {} columns",
                vector.len(),
                self.n_cols
            )));
        }
        if j >= self.n_rows {
            return Err(Error::Bounds {
                index: j,
                len: self.n_rows,
            });
        }
        Ok(dot(vector, self.row(j)) / self.n_cols as f64)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Z-normalizes every row in place: `(x - mean) / std` with the population
/// standard deviation. Constant rows become all-zero and are recorded as
/// degenerate. Idempotent: a normalized matrix is returned unchanged.
pub fn znormalize(mut m: DataMatrix) -> DataMatrix {
    if m.normalized {
        return m;
    }
    let d = m.n_cols;
    let mut degenerate = Vec::new();
    for i in 0..m.n_rows {
        let row = &mut m.values[i * d..(i + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d as f64;
        if var == 0.0 || !var.is_finite() {
            row.fill(0.0);
            degenerate.push(i as u32);
            continue;
        }
        let inv_std = 1.0 / var.sqrt();
        for x in row.iter_mut() {
            *x = (*x - mean) * inv_std;
        }
    }
    m.degenerate = degenerate;
    m.normalized = true;
    m
}

/// Loads a matrix from `path` in the given format. The result is
/// unnormalized; run [`znormalize`] before computing correlations.
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    match format {
        MatrixFormat::Csv => load_csv(path),
        MatrixFormat::Binary => load_binary(path),
    }
}

/// Picks a format from the file extension: `.csv` is CSV, everything else
/// is the binary format.
pub fn detect_format(path: &Path) -> MatrixFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
        _ => MatrixFormat::Binary,
    }
}

fn load_csv(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut values: Vec<f64> = Vec::new();
    let mut n_cols: Option<usize> = None;
    let mut n_rows = 0usize;
    let mut first_data_line = true;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        let mut parsed = Vec::with_capacity(fields.len());
        let mut bad_field: Option<usize> = None;
        for (col, f) in fields.iter().enumerate() {
            match f.trim().parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad_field = Some(col);
                    break;
                }
            }
        }
        if let Some(col) = bad_field {
            // A non-numeric first line is treated as a header.
            if first_data_line {
                first_data_line = false;
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "field {} ({:?}) is not a number",
                    col + 1,
                    fields[col].trim()
                ),
            });
        }
        first_data_line = false;
        match n_cols {
            None => n_cols = Some(parsed.len()),
            Some(c) if c != parsed.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, got {}", c, parsed.len()),
                });
            }
            _ => {}
        }
        values.extend_from_slice(&parsed);
        n_rows += 1;
    }

    let n_cols = n_cols.ok_or_else(|| Error::EmptyInput("csv file has no data rows".into()))?;
    if n_cols < 2 {
        return Err(Error::Dimension(format!(
            "matrix needs at least 2 columns, got {n_cols}"
        )));
    }
    DataMatrix::from_values(n_rows, n_cols, values)
}

fn load_binary(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);

    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(|_| Error::Parse {
        line: 0,
        message: "file too short for magic bytes".into(),
    })?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Parse {
            line: 0,
            message: format!("bad magic bytes {magic:?}, expected {BINARY_MAGIC:?}"),
        });
    }
    let version = read_u32(&mut reader)?;
    if version != BINARY_VERSION {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported format version {version}"),
        });
    }
    let n_rows = read_u64(&mut reader)? as usize;
    let n_cols = read_u64(&mut reader)? as usize;
    if n_cols < 2 {
        return Err(Error::Dimension(format!(
            "matrix needs at least 2 columns, got {n_cols}"
        )));
    }
    let count = n_rows
        .checked_mul(n_cols)
        .ok_or_else(|| Error::Parse {
            line: 0,
            message: "matrix dimensions overflow".into(),
        })?;
    let mut buf = vec![0u8; count * 4];
    reader.read_exact(&mut buf).map_err(|_| Error::Parse {
        line: 0,
        message: format!("expected {count} float32 values, file truncated"),
    })?;
    let values = buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    DataMatrix::from_values(n_rows, n_cols, values)
}

/// Writes the binary matrix format: magic, version, N, D, then N*D
/// float32 little-endian values row-major. Values are stored as f32, so
/// writing a matrix holding values outside f32 precision is lossy.
pub fn save_binary(m: &DataMatrix, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&BINARY_VERSION.to_le_bytes())?;
    w.write_all(&(m.n_rows as u64).to_le_bytes())?;
    w.write_all(&(m.n_cols as u64).to_le_bytes())?;
    for v in &m.values {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the matrix as plain numeric CSV without a header.
pub fn save_csv(m: &DataMatrix, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for i in 0..m.n_rows {
        let row = m.row(i);
        let mut line = String::new();
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Parse {
        line: 0,
        message: "file truncated in header".into(),
    })?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Parse {
        line: 0,
        message: "file truncated in header".into(),
    })?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &[u8], ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content).unwrap();
        f.flush().unwrap();
        f
    }

    /// Textbook Pearson correlation on raw rows, the independent oracle for
    /// the normalized inner-product route.
    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for (x, y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            da += (x - ma) * (x - ma);
            db += (y - mb) * (y - mb);
        }
        num / (da.sqrt() * db.sqrt())
    }

    #[test]
    fn csv_load_shape() {
        let f = write_temp(b"1,2\n3,4\n5,6\n", ".csv");
        let m = load_matrix(f.path(), MatrixFormat::Csv).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (3, 2));
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_header_autodetected() {
        let f = write_temp(b"a,b\n1,2\n3,4\n", ".csv");
        let m = load_matrix(f.path(), MatrixFormat::Csv).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, 2));
    }

    #[test]
    fn csv_ragged_row_is_parse_error() {
        let f = write_temp(b"1,2,3\n4,5\n", ".csv");
        let err = load_matrix(f.path(), MatrixFormat::Csv).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_single_column_rejected() {
        let f = write_temp(b"1\n2\n", ".csv");
        assert!(matches!(
            load_matrix(f.path(), MatrixFormat::Csv),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn binary_roundtrip_is_bitwise() {
        let m = DataMatrix::from_values(4, 8, (0..32).map(|i| i as f64 * 0.37 - 3.0).collect())
            .unwrap();
        let f = tempfile::Builder::new().suffix(".atmf").tempfile().unwrap();
        save_binary(&m, f.path()).unwrap();
        let loaded = load_matrix(f.path(), MatrixFormat::Binary).unwrap();
        assert_eq!((loaded.n_rows(), loaded.n_cols()), (4, 8));
        // Values pass through f32 on disk; a second round trip must be exact.
        let f2 = tempfile::Builder::new().suffix(".atmf").tempfile().unwrap();
        save_binary(&loaded, f2.path()).unwrap();
        let again = load_matrix(f2.path(), MatrixFormat::Binary).unwrap();
        assert_eq!(loaded.values(), again.values());
    }

    #[test]
    fn binary_bad_magic() {
        let f = write_temp(b"NOPE\x01\x00\x00\x00", ".atmf");
        assert!(matches!(
            load_matrix(f.path(), MatrixFormat::Binary),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn binary_truncated_payload() {
        let mut content = Vec::new();
        content.extend_from_slice(BINARY_MAGIC);
        content.extend_from_slice(&1u32.to_le_bytes());
        content.extend_from_slice(&4u64.to_le_bytes());
        content.extend_from_slice(&8u64.to_le_bytes());
        content.extend_from_slice(&[0u8; 12]); // far fewer than 32 f32s
        let f = write_temp(&content, ".atmf");
        assert!(matches!(
            load_matrix(f.path(), MatrixFormat::Binary),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn znormalize_two_point_row() {
        let m = DataMatrix::from_values(1, 2, vec![1.0, 3.0]).unwrap();
        let m = znormalize(m);
        assert_eq!(m.row(0), &[-1.0, 1.0]);
    }

    #[test]
    fn znormalize_constant_row_degenerate() {
        let m = DataMatrix::from_values(1, 3, vec![5.0, 5.0, 5.0]).unwrap();
        let m = znormalize(m);
        assert_eq!(m.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(m.degenerate_rows(), &[0]);
        assert!(m.is_degenerate(0));
    }

    #[test]
    fn znormalize_output_moments() {
        let m = DataMatrix::from_values(1, 4, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let m = znormalize(m);
        let row = m.row(0);
        let mean = row.iter().sum::<f64>() / 4.0;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-9, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-9, "std {}", var.sqrt());
    }

    #[test]
    fn znormalize_idempotent() {
        let vals: Vec<f64> = (0..40).map(|i| ((i * 7919 + 13) % 97) as f64 * 0.11).collect();
        let m = znormalize(DataMatrix::from_values(4, 10, vals).unwrap());
        let twice = znormalize(m.clone());
        for (a, b) in m.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn correlation_matches_pearson_oracle() {
        // Deterministic pseudo-random 10x50 matrix.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let vals: Vec<f64> = (0..500).map(|_| next() * 4.0).collect();
        let raw = DataMatrix::from_values(10, 50, vals).unwrap();
        let expected = pearson(raw.row(2), raw.row(7));
        let m = znormalize(raw);
        let got = m.correlation(2, 7).unwrap();
        assert!((got - expected).abs() < 1e-9, "got {got}, expected {expected}");
    }

    #[test]
    fn correlation_self_and_antisymmetric() {
        let m = znormalize(DataMatrix::from_values(2, 2, vec![-1.0, 1.0, 1.0, -1.0]).unwrap());
        assert!((m.correlation(0, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.correlation(0, 1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_degenerate_is_zero() {
        let m = znormalize(DataMatrix::from_values(2, 3, vec![7.0, 7.0, 7.0, 1.0, 2.0, 3.0]).unwrap());
        assert_eq!(m.correlation(0, 1).unwrap(), 0.0);
        assert_eq!(m.correlation(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn correlation_bounds_checked() {
        let m = znormalize(DataMatrix::from_values(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap());
        assert!(matches!(m.correlation(0, 5), Err(Error::Bounds { .. })));
    }
}
