//! Hard and soft voting over fitted classifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{check_width, predict_label, FittedModel, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VotingMode {
    Hard,
    Soft,
}

impl VotingMode {
    pub fn display_name(self) -> &'static str {
        match self {
            VotingMode::Hard => "Hard Voting",
            VotingMode::Soft => "Soft Voting",
        }
    }
}

impl fmt::Display for VotingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VotingMode::Hard => "hard",
            VotingMode::Soft => "soft",
        })
    }
}

impl FromStr for VotingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(VotingMode::Hard),
            "soft" => Ok(VotingMode::Soft),
            other => Err(Error::domain(format!("unknown voting mode `{other}`"))),
        }
    }
}

fn check_weights(n: usize, weights: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("voting needs at least one member"));
    }
    if weights.len() != n {
        return Err(Error::domain(format!(
            "{n} members but {} weights",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::domain("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::domain("all voting weights are zero"));
    }
    Ok(total)
}

/// Weighted mean of member probabilities and its thresholded label.
pub fn soft_vote(member_probs: &[f64], weights: &[f64]) -> Result<(f64, u8)> {
    let total = check_weights(member_probs.len(), weights)?;
    let p = member_probs
        .iter()
        .zip(weights)
        .map(|(p, w)| p * w)
        .sum::<f64>()
        / total;
    // Keep the convex-combination bound exact under rounding.
    let (lo, hi) = member_probs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let p = p.clamp(lo, hi);
    Ok((p, predict_label(p, DEFAULT_THRESHOLD)?))
}

/// Weighted fraction of members voting for class 1.
pub fn vote_fraction(member_labels: &[u8], weights: &[f64]) -> Result<f64> {
    let total = check_weights(member_labels.len(), weights)?;
    let ones: f64 = member_labels
        .iter()
        .zip(weights)
        .filter(|(&l, _)| l == 1)
        .map(|(_, w)| w)
        .sum();
    Ok(ones / total)
}

/// Label with the larger total weight; an exact tie goes to class 1.
pub fn hard_vote(member_labels: &[u8], weights: &[f64]) -> Result<u8> {
    check_weights(member_labels.len(), weights)?;
    let (mut zero, mut one) = (0.0, 0.0);
    for (&l, &w) in member_labels.iter().zip(weights) {
        if l == 1 {
            one += w;
        } else {
            zero += w;
        }
    }
    Ok(u8::from(one >= zero))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub mode: VotingMode,
    pub weights: Vec<f64>,
    pub members: Vec<FittedModel>,
}

impl EnsembleModel {
    pub fn new(members: Vec<FittedModel>, mode: VotingMode, weights: Option<Vec<f64>>) -> Result<Self> {
        let weights = weights.unwrap_or_else(|| vec![1.0; members.len()]);
        check_weights(members.len(), &weights)?;
        let width = members[0].n_features;
        if members.iter().any(|m| m.n_features != width) {
            return Err(Error::domain("ensemble members were trained on different widths"));
        }
        Ok(EnsembleModel {
            mode,
            weights,
            members,
        })
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features
    }

    /// Combines per-member probabilities for one row.
    pub fn combine(&self, member_probs: &[f64]) -> f64 {
        match self.mode {
            VotingMode::Soft => soft_vote(member_probs, &self.weights).expect("weights validated").0,
            VotingMode::Hard => {
                let labels: Vec<u8> = member_probs
                    .iter()
                    .map(|&p| u8::from(p >= DEFAULT_THRESHOLD))
                    .collect();
                vote_fraction(&labels, &self.weights).expect("weights validated")
            }
        }
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let probs: Vec<f64> = self.members.iter().map(|m| m.predict_proba_row(row)).collect();
        self.combine(&probs)
    }

    /// Soft mode: weighted mean probability. Hard mode: weighted vote
    /// fraction, which thresholds at 0.5 to the hard-vote label.
    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_width(x, self.n_features())?;
        Ok(x.iter().map(|r| self.predict_proba_row(r)).collect())
    }
}
