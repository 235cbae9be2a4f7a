//! One-hidden-layer perceptron with a sigmoid output unit, trained by
//! full-batch gradient descent on mean binary cross-entropy.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logreg::{dot, softplus};
use super::{sigmoid, RngStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Logistic,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Logistic => sigmoid(z),
        }
    }

    /// Derivative expressed through the pre-activation and activation.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Logistic => "logistic",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "logistic" => Ok(Activation::Logistic),
            other => Err(Error::domain(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_units: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Half-width of the uniform weight initialization. `None` uses
    /// `sqrt(6 / (fan_in + fan_out))` per layer.
    pub init_scale: Option<f64>,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_units: 16,
            activation: Activation::Relu,
            learning_rate: 0.01,
            epochs: 300,
            init_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub activation: Activation,
    /// `hidden_units x n_features`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub hidden_pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub output_logit: f64,
    pub output: f64,
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpGradients {
    pub fn norm(&self) -> f64 {
        let s: f64 = self.w1.iter().flatten().map(|g| g * g).sum::<f64>()
            + self.b1.iter().map(|g| g * g).sum::<f64>()
            + self.w2.iter().map(|g| g * g).sum::<f64>()
            + self.b2 * self.b2;
        s.sqrt()
    }
}

impl MlpModel {
    pub fn zeros(n_features: usize, hidden_units: usize, activation: Activation) -> Self {
        MlpModel {
            activation,
            w1: vec![vec![0.0; n_features]; hidden_units],
            b1: vec![0.0; hidden_units],
            w2: vec![0.0; hidden_units],
            b2: 0.0,
        }
    }

    pub fn forward(&self, row: &[f64]) -> ForwardPass {
        let hidden_pre: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| dot(w, row) + b)
            .collect();
        let hidden: Vec<f64> = hidden_pre.iter().map(|&z| self.activation.apply(z)).collect();
        let output_logit = dot(&self.w2, &hidden) + self.b2;
        ForwardPass {
            hidden_pre,
            hidden,
            output_logit,
            output: sigmoid(output_logit),
        }
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        self.forward(row).output
    }

    /// Mean cross-entropy over the batch and its exact gradient.
    pub fn loss_and_grad(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, MlpGradients) {
        let n = x.len() as f64;
        let mut grads = MlpGradients {
            w1: vec![vec![0.0; self.w1.first().map_or(0, Vec::len)]; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: 0.0,
        };
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let pass = self.forward(row);
            let t = f64::from(label);
            loss += softplus(pass.output_logit) - t * pass.output_logit;
            let delta_out = pass.output - t;
            grads.b2 += delta_out;
            for h in 0..self.w2.len() {
                grads.w2[h] += delta_out * pass.hidden[h];
                let delta_h = delta_out
                    * self.w2[h]
                    * self.activation.derivative(pass.hidden_pre[h], pass.hidden[h]);
                grads.b1[h] += delta_h;
                for (g, &v) in grads.w1[h].iter_mut().zip(row) {
                    *g += delta_h * v;
                }
            }
        }
        grads.b2 /= n;
        grads.w2.iter_mut().for_each(|g| *g /= n);
        grads.b1.iter_mut().for_each(|g| *g /= n);
        grads.w1.iter_mut().flatten().for_each(|g| *g /= n);
        (loss / n, grads)
    }

    fn step(&mut self, grads: &MlpGradients, learning_rate: f64) {
        for (w, g) in self.w1.iter_mut().flatten().zip(grads.w1.iter().flatten()) {
            *w -= learning_rate * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grads.b1) {
            *b -= learning_rate * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grads.w2) {
            *w -= learning_rate * g;
        }
        self.b2 -= learning_rate * grads.b2;
    }
}

pub fn fit(params: &MlpParams, x: &[Vec<f64>], y: &[u8], rng: &RngStream) -> MlpModel {
    let n_features = x[0].len();
    let hidden = params.hidden_units;
    let mut rand = rng.child("init").rng();
    let scale1 = params
        .init_scale
        .unwrap_or_else(|| (6.0 / (n_features + hidden) as f64).sqrt());
    let scale2 = params
        .init_scale
        .unwrap_or_else(|| (6.0 / (hidden + 1) as f64).sqrt());
    let mut model = MlpModel::zeros(n_features, hidden, params.activation);
    for w in model.w1.iter_mut().flatten() {
        *w = rand.gen_range(-scale1..=scale1);
    }
    for w in &mut model.w2 {
        *w = rand.gen_range(-scale2..=scale2);
    }
    for _ in 0..params.epochs {
        let (_, grads) = model.loss_and_grad(x, y);
        model.step(&grads, params.learning_rate);
    }
    model
}
