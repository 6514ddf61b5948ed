//! Dataset files: samples CSV (one sample per row, optional header), labels
//! CSV (one 1-based cluster index per row) and a JSON metadata sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kss_core::matrix::norm;
use kss_core::uos::UoSDataset;
use kss_core::{Matrix, MembershipMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::report::format_f64;

pub const SAMPLES_FILE: &str = "samples.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const METADATA_FILE: &str = "metadata.json";

/// Generation parameters recorded next to a synthetic dataset. `seed` is the
/// seed of the single `ChaCha8Rng` stream that drew the ensemble and then the
/// samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "K")]
    pub clusters: usize,
    pub d_lo: usize,
    pub d_hi: usize,
    pub s: usize,
    pub dims: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(file))
}

fn records(path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

/// Reads the raw samples as the columns of an `n x N` matrix. The first row
/// is treated as a header when none of its cells parses as a number.
pub fn read_samples(path: &Path) -> Result<Matrix> {
    Ok(read_samples_with_lines(path)?.0)
}

fn read_samples_with_lines(path: &Path) -> Result<(Matrix, Vec<u64>)> {
    let mut rows = records(path)?;
    if let Some((_, first)) = rows.first() {
        if first.iter().all(|c| c.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    if rows.is_empty() {
        return Err(HarnessError::File { path: path.to_path_buf(), message: "no samples".into() });
    }
    let width = rows[0].1.len();
    let mut columns = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        if rec.len() != width {
            return Err(parse_error(path, *line, format!("expected {width} values, found {}", rec.len())));
        }
        let values = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_error(path, *line, format!("column {}: '{cell}' is not a finite number", j + 1))),
            })
            .collect::<Result<Vec<f64>>>()?;
        columns.push(values);
    }
    let z = Matrix::from_columns(width, &columns).map_err(|e| HarnessError::core(path.display().to_string(), e))?;
    Ok((z, rows.iter().map(|(l, _)| *l).collect()))
}

/// Reads one-based labels; returns zero-based labels.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let rows = records(path)?;
    let mut labels = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        if rec.len() != 1 {
            return Err(parse_error(path, line, format!("expected one label, found {} values", rec.len())));
        }
        match rec[0].parse::<usize>() {
            Ok(l) if l >= 1 => labels.push(l - 1),
            _ => {
                if labels.is_empty() && line == 1 && rec[0].parse::<f64>().is_err() {
                    continue; // header
                }
                return Err(parse_error(path, line, format!("'{}' is not a positive integer label", &rec[0])));
            }
        }
    }
    Ok(labels)
}

/// Builds a membership from one-based labels, checking the row count.
/// `clusters` defaults to the largest label.
pub fn load_labels(path: &Path, n_points: usize, clusters: Option<usize>) -> Result<MembershipMatrix> {
    let labels = read_labels(path)?;
    if labels.len() != n_points {
        return Err(HarnessError::File {
            path: path.to_path_buf(),
            message: format!("{} labels for {n_points} samples", labels.len()),
        });
    }
    let max = labels.iter().copied().max().map_or(0, |m| m + 1);
    let k = clusters.unwrap_or(max);
    if max > k {
        return Err(HarnessError::File {
            path: path.to_path_buf(),
            message: format!("label {max} exceeds the cluster count {k}"),
        });
    }
    MembershipMatrix::new(labels, k).map_err(|e| HarnessError::core(path.display().to_string(), e))
}

/// Samples as unit-norm columns, plus the ground truth when a labels file is
/// given.
pub fn load_csv_dataset(
    samples_path: &Path,
    labels_path: Option<&Path>,
    clusters: Option<usize>,
) -> Result<(Matrix, Option<MembershipMatrix>)> {
    let (mut z, lines) = read_samples_with_lines(samples_path)?;
    for j in 0..z.cols() {
        let col = z.column_mut(j);
        let nrm = norm(col);
        if nrm == 0.0 {
            return Err(parse_error(samples_path, lines[j], "zero sample cannot be normalized"));
        }
        col.iter_mut().for_each(|x| *x /= nrm);
    }
    let truth = labels_path.map(|p| load_labels(p, z.cols(), clusters)).transpose()?;
    Ok((z, truth))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| HarnessError::io(path, e))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// One sample per row, no header, 17 significant digits.
pub fn write_samples(path: &Path, z: &Matrix) -> Result<()> {
    let mut w = create(path)?;
    for col in z.columns() {
        let line: Vec<String> = col.iter().map(|&x| format_f64(x)).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| HarnessError::io(path, e))?;
    }
    finish(w, path)
}

/// One-based labels, one per line.
pub fn write_labels(path: &Path, h: &MembershipMatrix) -> Result<()> {
    let mut w = create(path)?;
    for &l in h.labels() {
        writeln!(w, "{}", l + 1).map_err(|e| HarnessError::io(path, e))?;
    }
    finish(w, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(&crate::report::to_json_bytes(value)).map_err(|e| HarnessError::io(path, e))?;
    finish(w, path)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

pub struct DatasetPaths {
    pub samples: PathBuf,
    pub labels: PathBuf,
    pub metadata: PathBuf,
}

/// Writes `samples.csv`, `labels.csv` and `metadata.json` into `dir`.
pub fn write_dataset(dir: &Path, ds: &UoSDataset, meta: &DatasetMetadata) -> Result<DatasetPaths> {
    let paths = DatasetPaths {
        samples: dir.join(SAMPLES_FILE),
        labels: dir.join(LABELS_FILE),
        metadata: dir.join(METADATA_FILE),
    };
    write_samples(&paths.samples, &ds.samples)?;
    write_labels(&paths.labels, &ds.truth)?;
    write_json(&paths.metadata, meta)?;
    Ok(paths)
}
