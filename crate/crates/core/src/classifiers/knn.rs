//! k-nearest-neighbour probability estimates under Euclidean distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// The stored training matrix. `k` is clamped to the number of stored rows,
/// so an oversized `k` degenerates to the majority-fraction predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` closest rows, nearest first; equal distances keep the
/// lower row index first.
pub fn neighbors(train: &[Vec<f64>], query: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > train.len() {
        return Err(Error::domain(format!(
            "k = {k} outside 1..={} training rows",
            train.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(order.into_iter().take(k).map(|(_, i)| i).collect())
}

pub fn fit(params: &KnnParams, x: &[Vec<f64>], y: &[u8]) -> KnnModel {
    if params.k > x.len() {
        log::debug!("knn: k = {} clamped to {} training rows", params.k, x.len());
    }
    KnnModel {
        k: params.k.min(x.len()),
        rows: x.to_vec(),
        labels: y.to_vec(),
    }
}

impl KnnModel {
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let idx = neighbors(&self.rows, row, self.k).expect("k validated at fit");
        let positives = idx.iter().filter(|&&i| self.labels[i] == 1).count();
        positives as f64 / self.k as f64
    }
}
