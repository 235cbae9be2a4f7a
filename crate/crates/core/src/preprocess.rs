//! Z-score standardization and Pearson correlation.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SCHEMA, TARGET_INDEX};
use crate::error::{Error, Result};

/// Per-column mean and population standard deviation learned from training
/// rows. Columns not listed pass through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub column_ids: Vec<usize>,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    pub fitted_on: usize,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>], columns: &[usize]) -> Result<Scaler> {
        if columns.is_empty() {
            return Err(Error::domain("scaler needs at least one column"));
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let width = rows[0].len();
        if let Some(&c) = columns.iter().find(|&&c| c >= width) {
            return Err(Error::domain(format!("column {c} out of range for width {width}")));
        }
        let n = rows.len() as f64;
        let mut means = Vec::with_capacity(columns.len());
        let mut stddevs = Vec::with_capacity(columns.len());
        for &c in columns {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
            means.push(mean);
            stddevs.push(var.sqrt());
        }
        Ok(Scaler {
            column_ids: columns.to_vec(),
            means,
            stddevs,
            fitted_on: rows.len(),
        })
    }

    /// Columns whose training variance was zero; they are only centered.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.column_ids
            .iter()
            .zip(&self.stddevs)
            .filter(|(_, &s)| s == 0.0)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for ((&c, &mean), &sd) in self.column_ids.iter().zip(&self.means).zip(&self.stddevs) {
            let scale = if sd > 0.0 { sd } else { 1.0 };
            row[c] = (row[c] - mean) / scale;
        }
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                self.transform_row(&mut r);
                r
            })
            .collect()
    }
}

pub fn fit_scaler(train: &Dataset, columns: &[usize]) -> Result<Scaler> {
    Scaler::fit(train.rows(), columns)
}

pub fn apply_scaler(scaler: &Scaler, d: &Dataset) -> Dataset {
    d.with_rows(scaler.transform(d.rows()))
}

/// Where the scaler statistics come from during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalePolicy {
    /// Fit on each fold's training rows only.
    #[default]
    PerFold,
    /// Fit once on the whole dataset.
    Global,
    /// No standardization.
    None,
}

impl FromStr for ScalePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-fold" => Ok(ScalePolicy::PerFold),
            "global" => Ok(ScalePolicy::Global),
            "none" => Ok(ScalePolicy::None),
            other => Err(Error::domain(format!(
                "unknown scale policy `{other}` (expected per-fold, global or none)"
            ))),
        }
    }
}

impl std::fmt::Display for ScalePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalePolicy::PerFold => "per-fold",
            ScalePolicy::Global => "global",
            ScalePolicy::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// `degenerate[i][j]` is set when column i or j is constant.
    pub degenerate: Vec<Vec<bool>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// CSV with a header row and a label column; values in 6-decimal fixed
    /// point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson correlation between columns. Constant columns correlate 0 with
/// everything (including themselves) and are flagged.
pub fn correlation_of_columns(columns: &[Vec<f64>], labels: Vec<String>) -> Result<CorrelationMatrix> {
    let n = columns.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::domain("correlation needs at least 2 rows"));
    }
    let m = columns.len();
    let centered: Vec<(Vec<f64>, f64)> = columns
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / n as f64;
            let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let ss = dev.iter().map(|d| d * d).sum::<f64>();
            (dev, ss)
        })
        .collect();

    let mut values = vec![vec![0.0; m]; m];
    let mut degenerate = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i..m {
            let (di, si) = &centered[i];
            let (dj, sj) = &centered[j];
            let (r, flag) = if *si == 0.0 || *sj == 0.0 {
                (0.0, true)
            } else if i == j {
                (1.0, false)
            } else {
                let cov: f64 = di.iter().zip(dj).map(|(a, b)| a * b).sum();
                ((cov / (si.sqrt() * sj.sqrt())).clamp(-1.0, 1.0), false)
            };
            values[i][j] = r;
            values[j][i] = r;
            degenerate[i][j] = flag;
            degenerate[j][i] = flag;
        }
    }
    Ok(CorrelationMatrix {
        labels,
        values,
        degenerate,
    })
}

pub fn pearson_correlation(d: &Dataset, include_target: bool) -> Result<CorrelationMatrix> {
    if d.len() < 2 {
        return Err(Error::domain("correlation needs at least 2 rows"));
    }
    let width = d.width();
    let mut columns: Vec<Vec<f64>> = (0..width)
        .map(|j| d.rows().iter().map(|r| r[j]).collect())
        .collect();
    let mut labels: Vec<String> = SCHEMA[..width].iter().map(|a| a.name.to_string()).collect();
    if include_target {
        columns.push(d.targets().iter().map(|&t| f64::from(t)).collect());
        labels.push(SCHEMA[TARGET_INDEX].name.to_string());
    }
    correlation_of_columns(&columns, labels)
}
