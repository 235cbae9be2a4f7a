//! Gaussian naive Bayes with per-class, per-feature normal likelihoods.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Added variance, as a fraction of the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams {
            var_smoothing: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub class_counts: [usize; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    /// Absolute smoothing added to every variance.
    pub epsilon: f64,
}

pub fn fit(params: &GnbParams, x: &[Vec<f64>], y: &[u8]) -> GnbModel {
    let width = x[0].len();
    let n = x.len() as f64;
    let mut largest_var: f64 = 0.0;
    for j in 0..width {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        largest_var = largest_var.max(var);
    }
    let epsilon = if largest_var > 0.0 {
        params.var_smoothing * largest_var
    } else {
        params.var_smoothing
    };

    let mut class_counts = [0usize; 2];
    let mut means = [vec![0.0; width], vec![0.0; width]];
    let mut variances = [vec![0.0; width], vec![0.0; width]];
    for (row, &label) in x.iter().zip(y) {
        let c = usize::from(label);
        class_counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for c in 0..2 {
        let count = class_counts[c] as f64;
        for m in &mut means[c] {
            *m /= count;
        }
    }
    for (row, &label) in x.iter().zip(y) {
        let c = usize::from(label);
        for j in 0..width {
            variances[c][j] += (row[j] - means[c][j]).powi(2);
        }
    }
    for c in 0..2 {
        let count = class_counts[c] as f64;
        for v in &mut variances[c] {
            *v /= count;
        }
    }
    GnbModel {
        class_counts,
        means,
        variances,
        epsilon,
    }
}

impl GnbModel {
    /// `ln P(c) + Σ_j ln N(x_j; μ_cj, σ²_cj + ε)` for both classes.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> [f64; 2] {
        let total = (self.class_counts[0] + self.class_counts[1]) as f64;
        let mut out = [0.0; 2];
        for (c, score) in out.iter_mut().enumerate() {
            let mut s = (self.class_counts[c] as f64 / total).ln();
            for ((&v, &mean), &var) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                let var = var + self.epsilon;
                s -= 0.5 * (2.0 * PI * var).ln() + (v - mean).powi(2) / (2.0 * var);
            }
            *score = s;
        }
        out
    }

    /// Posterior of class 1 (softmax over the two joint log-likelihoods).
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let [s0, s1] = self.joint_log_likelihood(row);
        super::sigmoid(s1 - s0)
    }
}
