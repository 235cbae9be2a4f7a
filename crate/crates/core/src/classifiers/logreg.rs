//! Logistic regression trained by full-batch gradient descent on mean
//! binary cross-entropy with an optional L2 penalty on the weights.

use serde::{Deserialize, Serialize};

use super::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregParams {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the loss changes by less than this between iterations.
    pub tolerance: f64,
    pub l2_lambda: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            learning_rate: 0.1,
            max_iters: 1000,
            tolerance: 1e-6,
            l2_lambda: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad_w: Vec<f64>,
    pub grad_b: f64,
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean cross-entropy plus `(λ/2)‖w‖²` and its exact gradient.
pub fn loss_grad(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[u8], l2_lambda: f64) -> LossGrad {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = dot(weights, row) + bias;
        let t = f64::from(label);
        // -[t ln σ(z) + (1-t) ln(1-σ(z))] = softplus(z) - t z
        loss += softplus(z) - t * z;
        let residual = sigmoid(z) - t;
        for (g, &v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    loss /= n;
    grad_b /= n;
    let mut penalty = 0.0;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2_lambda * w;
        penalty += w * w;
    }
    loss += 0.5 * l2_lambda * penalty;
    LossGrad {
        loss,
        grad_w,
        grad_b,
    }
}

pub fn fit(params: &LogregParams, x: &[Vec<f64>], y: &[u8]) -> LogregModel {
    let width = x[0].len();
    let mut weights = vec![0.0; width];
    let mut bias = 0.0;
    let mut previous = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        let step = loss_grad(&weights, bias, x, y, params.l2_lambda);
        if (previous - step.loss).abs() < params.tolerance {
            converged = true;
            break;
        }
        previous = step.loss;
        for (w, g) in weights.iter_mut().zip(&step.grad_w) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * step.grad_b;
        iterations += 1;
    }
    LogregModel {
        weights,
        bias,
        iterations,
        converged,
    }
}

impl LogregModel {
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, row) + self.bias)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
