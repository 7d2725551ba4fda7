//! Dataset ingestion, standardization, and split protocols.
//!
//! CSV contract: header row, one column named `label` (any position,
//! values 0/1), every other column numeric. Standardization is per-column
//! (x - mean)/std with population std; the evaluation protocol chooses
//! whether statistics come from the full table or the train rows only.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{streams, RandomSource};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Columns whose population std falls below this (relative to the mean
/// scale) are treated as constant: mapped to zeros with divisor 1.
const ZERO_VAR_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub x: Matrix,
    /// 1 = anomaly.
    pub y: Vec<u8>,
    /// Per-column statistics captured by the most recent standardization;
    /// empty on raw data. `stds` holds the divisor actually used (1 for
    /// constant columns).
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_anomalies(&self) -> usize {
        self.y.iter().filter(|&&y| y == 1).count()
    }
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| Error::Parse(format!("{}: no `label` column", path.display())))?;
    let n_features = headers.len() - 1;

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut n_rows = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            Error::Parse(format!("{}: row {}: {e}", path.display(), row_idx + 1))
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse(format!(
                "{}: row {}: {} fields, expected {}",
                path.display(),
                row_idx + 1,
                record.len(),
                headers.len()
            )));
        }
        for (col_idx, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!(
                    "{}: row {}, column `{}`: non-numeric cell `{}`",
                    path.display(),
                    row_idx + 1,
                    &headers[col_idx],
                    cell
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Parse(format!(
                    "{}: row {}, column `{}`: non-finite value `{}`",
                    path.display(),
                    row_idx + 1,
                    &headers[col_idx],
                    cell
                )));
            }
            if col_idx == label_col {
                if value == 0.0 {
                    y.push(0u8);
                } else if value == 1.0 {
                    y.push(1u8);
                } else {
                    return Err(Error::Parse(format!(
                        "{}: row {}: label `{}` must be 0 or 1",
                        path.display(),
                        row_idx + 1,
                        cell
                    )));
                }
            } else {
                data.push(value);
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }

    Ok(Dataset {
        name,
        x: Matrix::from_vec(n_rows, n_features, data)?,
        y,
        means: Vec::new(),
        stds: Vec::new(),
    })
}

/// Standardizes every column to zero mean and unit variance using
/// statistics computed over `stat_rows` (all rows for the full-dataset
/// protocol). Constant columns become all-zeros.
pub fn standardize_with(ds: &Dataset, stat_rows: &[usize]) -> Dataset {
    assert!(stat_rows.len() >= 2, "standardize needs at least 2 rows");
    let d = ds.x.cols();
    let n = stat_rows.len() as f64;
    let mut means = vec![0.0; d];
    for &r in stat_rows {
        for (m, &v) in means.iter_mut().zip(ds.x.row(r)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; d];
    for &r in stat_rows {
        for (c, &v) in ds.x.row(r).iter().enumerate() {
            let dv = v - means[c];
            vars[c] += dv * dv;
        }
    }
    let mut constant = vec![false; d];
    let stds: Vec<f64> = vars
        .iter()
        .zip(&means)
        .enumerate()
        .map(|(c, (&var, &mean))| {
            let sigma = (var / n).sqrt();
            if sigma <= ZERO_VAR_EPS * mean.abs().max(1.0) {
                constant[c] = true;
                1.0
            } else {
                sigma
            }
        })
        .collect();
    let mut x = Matrix::zeros(ds.x.rows(), d);
    for r in 0..ds.x.rows() {
        let row = x.row_mut(r);
        for (c, &v) in ds.x.row(r).iter().enumerate() {
            // Constant columns map exactly to zero rather than to rounding
            // noise from the subtraction.
            row[c] = if constant[c] { 0.0 } else { (v - means[c]) / stds[c] };
        }
    }
    Dataset { name: ds.name.clone(), x, y: ds.y.clone(), means, stds }
}

/// Full-dataset standardization.
pub fn standardize(ds: &Dataset) -> Dataset {
    let rows: Vec<usize> = (0..ds.n_rows()).collect();
    standardize_with(ds, &rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Unsupervised,
    Semi,
}

impl SplitMode {
    pub fn name(&self) -> &'static str {
        match self {
            SplitMode::Unsupervised => "unsupervised",
            SplitMode::Semi => "semi",
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unsupervised" => Ok(SplitMode::Unsupervised),
            "semi" => Ok(SplitMode::Semi),
            other => Err(Error::Config(format!(
                "mode: unknown split mode `{other}` (expected unsupervised|semi)"
            ))),
        }
    }
}

/// Row-index split. Unsupervised: train = eval = all rows. Semi: train is
/// a seed-shuffled half of the normal rows (floor), eval is the remaining
/// normals plus every anomaly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub mode: SplitMode,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
    pub seed: u64,
}

pub fn make_split(ds: &Dataset, mode: SplitMode, seed: u64) -> Result<SplitPlan> {
    match mode {
        SplitMode::Unsupervised => {
            let all: Vec<usize> = (0..ds.n_rows()).collect();
            Ok(SplitPlan { mode, train: all.clone(), eval: all, seed })
        }
        SplitMode::Semi => {
            let mut normals: Vec<usize> =
                (0..ds.n_rows()).filter(|&i| ds.y[i] == 0).collect();
            let anomalies: Vec<usize> =
                (0..ds.n_rows()).filter(|&i| ds.y[i] == 1).collect();
            if normals.len() < 2 || anomalies.is_empty() {
                return Err(Error::Split(format!(
                    "semi split needs at least 2 normals and 1 anomaly, got {} and {}",
                    normals.len(),
                    anomalies.len()
                )));
            }
            let mut rng = RandomSource::substream(seed, streams::SPLIT);
            rng.shuffle(&mut normals);
            let n_train = normals.len() / 2;
            let train = normals[..n_train].to_vec();
            let mut eval = normals[n_train..].to_vec();
            eval.extend_from_slice(&anomalies);
            Ok(SplitPlan { mode, train, eval, seed })
        }
    }
}
