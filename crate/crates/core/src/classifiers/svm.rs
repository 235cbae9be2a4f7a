//! Soft-margin SVM trained with simplified SMO, with Platt-scaled
//! probabilities.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logreg::softplus;
use super::RngStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Linear => "linear",
            Kernel::Rbf => "rbf",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Kernel::Linear),
            "rbf" => Ok(Kernel::Rbf),
            other => Err(Error::domain(format!("unknown kernel `{other}`"))),
        }
    }
}

/// RBF width. `Auto` resolves to `1 / n_features`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    Auto,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, n_features: usize) -> f64 {
        match self {
            Gamma::Auto => 1.0 / n_features as f64,
            Gamma::Value(g) => g,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Auto => f.write_str("auto"),
            Gamma::Value(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub gamma: Gamma,
    /// KKT violation tolerance.
    pub tolerance: f64,
    /// Consecutive sweeps without an update before the solver stops.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            kernel: Kernel::Linear,
            c: 1.0,
            gamma: Gamma::Auto,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

/// Hard cap on total sweeps; hitting it marks the model as unconverged.
const MAX_SWEEPS: usize = 20_000;
/// Minimum change in an alpha for a pair update to count.
const ALPHA_EPS: f64 = 1e-5;

pub fn kernel_value(kernel: Kernel, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Kernel::Rbf => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * d2).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub sweeps: usize,
}

/// Simplified SMO over labels in {-1, +1}. The second multiplier of each
/// pair is drawn uniformly from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn train_smo(
    x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    kernel: Kernel,
    gamma: f64,
    tolerance: f64,
    max_passes: usize,
    rng: &RngStream,
) -> Result<SmoSolution> {
    let n = x.len();
    if !(c > 0.0) {
        return Err(Error::domain(format!("C = {c} must be positive")));
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::DegenerateTraining { kind: "svm" });
    }
    let gram: Vec<Vec<f64>> = x
        .iter()
        .map(|a| x.iter().map(|b| kernel_value(kernel, gamma, a, b)).collect())
        .collect();

    let mut alphas = vec![0.0; n];
    let mut bias = 0.0;
    let mut rand = rng.rng();
    let output = |alphas: &[f64], bias: f64, i: usize| -> f64 {
        let mut f = bias;
        for k in 0..n {
            if alphas[k] != 0.0 {
                f += alphas[k] * y[k] * gram[k][i];
            }
        }
        f
    };

    let mut passes = 0;
    let mut sweeps = 0;
    while passes < max_passes && sweeps < MAX_SWEEPS {
        let mut changed = 0;
        for i in 0..n {
            let e_i = output(&alphas, bias, i) - y[i];
            let violates = (y[i] * e_i < -tolerance && alphas[i] < c)
                || (y[i] * e_i > tolerance && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            let mut j = rand.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e_j = output(&alphas, bias, j) - y[j];
            let (old_i, old_j) = (alphas[i], alphas[j]);
            let (low, high) = if y[i] != y[j] {
                ((old_j - old_i).max(0.0), c.min(c + old_j - old_i))
            } else {
                ((old_i + old_j - c).max(0.0), c.min(old_i + old_j))
            };
            if low >= high {
                continue;
            }
            let eta = 2.0 * gram[i][j] - gram[i][i] - gram[j][j];
            if eta >= 0.0 {
                continue;
            }
            let new_j = (old_j - y[j] * (e_i - e_j) / eta).clamp(low, high);
            if (new_j - old_j).abs() < ALPHA_EPS {
                continue;
            }
            let new_i = (old_i + y[i] * y[j] * (old_j - new_j)).clamp(0.0, c);
            alphas[i] = new_i;
            alphas[j] = new_j;

            let di = y[i] * (new_i - old_i);
            let dj = y[j] * (new_j - old_j);
            let b1 = bias - e_i - di * gram[i][i] - dj * gram[i][j];
            let b2 = bias - e_j - di * gram[i][j] - dj * gram[j][j];
            bias = if new_i > 0.0 && new_i < c {
                b1
            } else if new_j > 0.0 && new_j < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            changed += 1;
        }
        passes = if changed == 0 { passes + 1 } else { 0 };
        sweeps += 1;
    }

    Ok(SmoSolution {
        alphas,
        bias,
        converged: passes >= max_passes,
        sweeps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattFit {
    pub a: f64,
    pub b: f64,
    /// Set when the fit fell back to `a = -1, b = 0`.
    pub fallback: bool,
}

impl PlattFit {
    /// `1 / (1 + exp(a f + b))`.
    pub fn probability(&self, decision: f64) -> f64 {
        super::sigmoid(-(self.a * decision + self.b))
    }
}

const PLATT_MAX_ITERS: usize = 500;
const PLATT_TOLERANCE: f64 = 1e-8;

/// Fits Platt's sigmoid by Newton's method with backtracking on the
/// regularized-target cross-entropy.
pub fn platt_calibrate(decision_values: &[f64], y: &[u8]) -> PlattFit {
    let fallback = PlattFit {
        a: -1.0,
        b: 0.0,
        fallback: true,
    };
    let positives = y.iter().filter(|&&t| t == 1).count() as f64;
    let negatives = y.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 || decision_values.iter().any(|f| !f.is_finite()) {
        return fallback;
    }
    let hi = (positives + 1.0) / (positives + 2.0);
    let lo = 1.0 / (negatives + 2.0);
    let targets: Vec<f64> = y.iter().map(|&t| if t == 1 { hi } else { lo }).collect();

    // Objective in terms of z = a f + b, with p = σ(-z):
    //   Σ t z + softplus(-z)
    let objective = |a: f64, b: f64| -> f64 {
        decision_values
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let z = a * f + b;
                t * z + softplus(-z)
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((negatives + 1.0) / (positives + 1.0)).ln();
    let mut value = objective(a, b);
    for _ in 0..PLATT_MAX_ITERS {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (&f, &t) in decision_values.iter().zip(&targets) {
            let p = super::sigmoid(-(a * f + b));
            let q = 1.0 - p;
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < PLATT_TOLERANCE && g2.abs() < PLATT_TOLERANCE {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let slope = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut improved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let candidate = objective(na, nb);
            if candidate < value + 1e-4 * step * slope {
                a = na;
                b = nb;
                value = candidate;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    if !(a.is_finite() && b.is_finite()) {
        return fallback;
    }
    PlattFit {
        a,
        b,
        fallback: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub platt: PlattFit,
    pub converged: bool,
}

impl SvmModel {
    pub fn decision_value(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &coef)| coef * kernel_value(self.kernel, self.gamma, sv, row))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        self.platt.probability(self.decision_value(row))
    }
}

pub fn fit(params: &SvmParams, x: &[Vec<f64>], y: &[u8], rng: &RngStream) -> Result<SvmModel> {
    let signed: Vec<f64> = y.iter().map(|&t| if t == 1 { 1.0 } else { -1.0 }).collect();
    let gamma = params.gamma.resolve(x[0].len());
    let solution = train_smo(
        x,
        &signed,
        params.c,
        params.kernel,
        gamma,
        params.tolerance,
        params.max_passes,
        &rng.child("smo"),
    )?;
    if !solution.converged {
        log::warn!("svm: SMO stopped after {} sweeps without converging", solution.sweeps);
    }
    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for (i, &alpha) in solution.alphas.iter().enumerate() {
        if alpha > 0.0 {
            support_vectors.push(x[i].clone());
            dual_coef.push(alpha * signed[i]);
        }
    }
    let mut model = SvmModel {
        kernel: params.kernel,
        gamma,
        support_vectors,
        dual_coef,
        bias: solution.bias,
        platt: PlattFit {
            a: -1.0,
            b: 0.0,
            fallback: true,
        },
        converged: solution.converged,
    };
    let decisions: Vec<f64> = x.iter().map(|r| model.decision_value(r)).collect();
    model.platt = platt_calibrate(&decisions, y);
    Ok(model)
}
