//! Random forest: bagged CART trees with per-split feature subsampling.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{self, TreeModel, TreeParams};
use super::RngStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturesPerSplit {
    /// `ceil(sqrt(n_features))`
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Count(m) => m.min(n_features),
        }
        .max(1)
    }
}

impl fmt::Display for FeaturesPerSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeaturesPerSplit::Sqrt => f.write_str("sqrt"),
            FeaturesPerSplit::All => f.write_str("all"),
            FeaturesPerSplit::Count(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for FeaturesPerSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(FeaturesPerSplit::Sqrt),
            "all" => Ok(FeaturesPerSplit::All),
            other => match other.parse::<usize>() {
                Ok(m) if m >= 1 => Ok(FeaturesPerSplit::Count(m)),
                _ => Err(Error::domain(format!(
                    "features_per_split `{other}` (expected sqrt, all or a positive count)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub features_per_split: FeaturesPerSplit,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            features_per_split: FeaturesPerSplit::Sqrt,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub stream_labels: Vec<String>,
}

impl ForestModel {
    /// Unweighted mean of the member trees' probabilities.
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        mean_probability(self.trees.iter().map(|t| t.predict_proba_row(row)))
    }
}

pub fn mean_probability(probs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = probs.fold((0.0, 0usize), |(s, n), p| (s + p, n + 1));
    sum / n as f64
}

pub fn fit(params: &ForestParams, x: &[Vec<f64>], y: &[u8], rng: &RngStream) -> ForestModel {
    let n = x.len();
    let width = x[0].len();
    let per_split = params.features_per_split.resolve(width);

    let trained: Vec<(TreeModel, String)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let stream = rng.child(&format!("tree-{t}"));
            let mut rand = stream.rng();
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rand.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let tree = if per_split >= width {
                let all: Vec<usize> = (0..width).collect();
                tree::grow(x, y, indices, &params.tree, &mut || all.clone())
            } else {
                tree::grow(x, y, indices, &params.tree, &mut || {
                    sample(&mut rand, width, per_split).into_vec()
                })
            };
            (tree, stream.label)
        })
        .collect();

    let (trees, stream_labels) = trained.into_iter().unzip();
    ForestModel {
        trees,
        stream_labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tree::Node;

    #[test]
    fn sqrt_of_thirteen_is_four() {
        assert_eq!(FeaturesPerSplit::Sqrt.resolve(13), 4);
        assert_eq!(FeaturesPerSplit::Count(20).resolve(13), 13);
        assert_eq!(FeaturesPerSplit::All.resolve(13), 13);
    }

    #[test]
    fn forest_probability_is_tree_mean() {
        let leaf = |n0, n1| TreeModel {
            nodes: vec![Node::Leaf {
                class_counts: [n0, n1],
            }],
        };
        let f = ForestModel {
            trees: vec![leaf(0, 3), leaf(2, 0), leaf(0, 1)],
            stream_labels: vec!["a".into(), "b".into(), "c".into()],
        };
        assert!((f.predict_proba_row(&[0.0]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn same_stream_same_trees() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i * 7 % 11) as f64, (i * 3 % 5) as f64, i as f64])
            .collect();
        let y: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let params = ForestParams {
            n_trees: 8,
            features_per_split: FeaturesPerSplit::Count(2),
            ..ForestParams::default()
        };
        let rng = RngStream::new(9, "fold-0/forest");
        let a = fit(&params, &x, &y, &rng);
        let b = fit(&params, &x, &y, &rng);
        assert_eq!(a, b);
        assert_eq!(a.stream_labels[3], "fold-0/forest/tree-3");
        let c = fit(&params, &x, &y, &RngStream::new(10, "fold-0/forest"));
        assert_ne!(a.trees, c.trees);
    }
}
