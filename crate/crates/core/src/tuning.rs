//! Exhaustive grid search scored by cross-validation.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ModelKind, ModelSpec, ParamValue};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, CvConfig, CvTarget, MetricSet};

/// Hyperparameter value lists for one model kind, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub kind: ModelKind,
    pub params: Vec<(String, Vec<ParamValue>)>,
}

impl ParamGrid {
    pub fn new(kind: ModelKind) -> Self {
        ParamGrid {
            kind,
            params: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, values: Vec<ParamValue>) -> Self {
        self.params.push((name.to_string(), values));
        self
    }

    /// Number of candidates, counting an empty list as one (the default).
    pub fn size(&self) -> usize {
        self.params.iter().map(|(_, v)| v.len().max(1)).product()
    }

    /// The shipped grid for a model kind.
    pub fn default_for(kind: ModelKind) -> ParamGrid {
        let num = |vs: &[f64]| vs.iter().map(|&v| ParamValue::Num(v)).collect::<Vec<_>>();
        let text = |vs: &[&str]| vs.iter().map(|v| ParamValue::Text(v.to_string())).collect::<Vec<_>>();
        let g = ParamGrid::new(kind);
        match kind {
            ModelKind::Logreg => g
                .with("learning_rate", num(&[0.05, 0.1, 0.5]))
                .with("l2_lambda", num(&[0.0, 0.01, 0.1])),
            ModelKind::Knn => g.with("k", num(&[3.0, 5.0, 7.0, 9.0, 11.0, 15.0])),
            ModelKind::Svm => g
                .with("kernel", text(&["linear", "rbf"]))
                .with("C", num(&[0.5, 1.0, 2.0]))
                .with("gamma", text(&["auto"])),
            ModelKind::Tree => g
                .with("max_depth", {
                    let mut v = num(&[2.0, 3.0, 4.0, 5.0, 6.0]);
                    v.push(ParamValue::Text("none".into()));
                    v
                })
                .with("min_samples_leaf", num(&[1.0, 5.0])),
            ModelKind::Gnb => g.with("var_smoothing", num(&[1e-9, 1e-6, 1e-3])),
            ModelKind::Mlp => g
                .with("hidden_units", num(&[8.0, 16.0, 32.0]))
                .with("learning_rate", num(&[0.01, 0.05])),
            ModelKind::Forest => g
                .with("n_trees", num(&[50.0, 100.0]))
                .with("max_depth", {
                    let mut v = num(&[4.0, 8.0]);
                    v.push(ParamValue::Text("none".into()));
                    v
                }),
        }
    }
}

/// Cartesian product of the grid; the first parameter varies slowest.
pub fn grid_expand(g: &ParamGrid) -> Result<Vec<ModelSpec>> {
    let mut specs = vec![g.kind.default_spec()];
    for (name, values) in &g.params {
        if values.is_empty() {
            continue;
        }
        let mut next = Vec::with_capacity(specs.len() * values.len());
        for base in &specs {
            for value in values {
                let mut spec = base.clone();
                spec.set_param(name, value)?;
                spec.validate()
                    .map_err(|e| Error::domain(format!("parameter `{name}`: {e}")))?;
                next.push(spec);
            }
        }
        specs = next;
    }
    Ok(specs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Accuracy,
    F1,
    RocAuc,
}

impl Objective {
    pub fn score(self, m: &MetricSet) -> f64 {
        match self {
            Objective::Accuracy => m.accuracy,
            Objective::F1 => m.f1,
            Objective::RocAuc => m.roc_auc.unwrap_or(0.0),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Accuracy => "accuracy",
            Objective::F1 => "f1",
            Objective::RocAuc => "roc_auc",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Objective::Accuracy),
            "f1" => Ok(Objective::F1),
            "roc_auc" => Ok(Objective::RocAuc),
            other => Err(Error::domain(format!(
                "unknown objective `{other}` (expected accuracy, f1 or roc_auc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderboardEntry {
    /// Position in grid order.
    pub candidate: usize,
    pub spec: ModelSpec,
    pub score: f64,
    /// Set when cross-validation failed; the score is then 0.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub objective: Objective,
    pub best_spec: ModelSpec,
    pub best_score: f64,
    /// Sorted by descending score; equal scores keep grid order.
    pub leaderboard: Vec<LeaderboardEntry>,
}

impl SearchResult {
    /// CSV with columns `rank,spec,objective,score`.
    pub fn leaderboard_csv(&self) -> String {
        let mut out = String::from("rank,spec,objective,score\n");
        for (rank, e) in self.leaderboard.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},\"{}\",{},{:.6}",
                rank + 1,
                e.spec.canonical(),
                self.objective,
                e.score
            );
        }
        out
    }
}

/// Scores every candidate with identical cross-validation settings.
pub fn grid_search(g: &ParamGrid, d: &Dataset, config: &CvConfig, objective: Objective) -> Result<SearchResult> {
    let specs = grid_expand(g)?;
    let mut leaderboard: Vec<LeaderboardEntry> = specs
        .into_par_iter()
        .enumerate()
        .map(|(candidate, spec)| {
            match cross_validate(&CvTarget::Model(spec.clone()), d, config) {
                Ok(report) => LeaderboardEntry {
                    candidate,
                    score: objective.score(&report.mean),
                    spec,
                    failure: None,
                },
                Err(e) => {
                    log::warn!("candidate {} failed: {e}", spec.canonical());
                    LeaderboardEntry {
                        candidate,
                        spec,
                        score: 0.0,
                        failure: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    leaderboard.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.candidate.cmp(&b.candidate)));
    let best = &leaderboard[0];
    Ok(SearchResult {
        objective,
        best_spec: best.spec.clone(),
        best_score: best.score,
        leaderboard,
    })
}
