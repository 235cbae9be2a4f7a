//! CART classification tree with Gini impurity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: [usize; 2],
    },
}

/// Node arena; the root is at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub fn leaf_for(&self, row: &[f64]) -> [usize; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class_counts } => return *class_counts,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let [n0, n1] = self.leaf_for(row);
        n1 as f64 / (n0 + n1) as f64
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn gini_impurity(n0: usize, n1: usize) -> Result<f64> {
    let n = n0 + n1;
    if n == 0 {
        return Err(Error::domain("gini impurity of an empty node"));
    }
    Ok(gini(n0, n1))
}

fn gini(n0: usize, n1: usize) -> f64 {
    let n = (n0 + n1) as f64;
    let p0 = n0 as f64 / n;
    let p1 = n1 as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Gains at or below this are treated as zero.
const MIN_GAIN: f64 = 1e-12;

/// Best impurity-decreasing split of a node. Candidate thresholds are
/// midpoints between consecutive distinct values; ties go to the lower
/// feature index, then the lower threshold.
pub fn best_split(
    x: &[Vec<f64>],
    y: &[u8],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<Split> {
    let indices: Vec<usize> = (0..x.len()).collect();
    best_split_of(x, y, &indices, candidate_features, min_samples_leaf)
}

pub(crate) fn best_split_of(
    x: &[Vec<f64>],
    y: &[u8],
    indices: &[usize],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<Split> {
    let n = indices.len();
    if n < 2 {
        return None;
    }
    let total1 = indices.iter().filter(|&&i| y[i] == 1).count();
    let total0 = n - total1;
    let parent = gini(total0, total1);
    let min_leaf = min_samples_leaf.max(1);

    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut order = indices.to_vec();
    for &feature in &features {
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
        let mut left1 = 0;
        for pos in 0..n - 1 {
            left1 += usize::from(y[order[pos]] == 1);
            let here = x[order[pos]][feature];
            let next = x[order[pos + 1]][feature];
            if here == next {
                continue;
            }
            let left_n = pos + 1;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let left0 = left_n - left1;
            let right1 = total1 - left1;
            let right0 = right_n - right1;
            let weighted = (left_n as f64 * gini(left0, left1)
                + right_n as f64 * gini(right0, right1))
                / n as f64;
            let gain = parent - weighted;
            if best.is_none_or(|b| gain > b.gain) {
                let mut threshold = here + (next - here) / 2.0;
                if threshold >= next {
                    threshold = here;
                }
                best = Some(Split {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best.filter(|s| s.gain > MIN_GAIN)
}

/// Grows a tree over `indices` (a bootstrap sample may repeat rows).
/// `features_for_split` supplies the candidate features at each node.
pub(crate) fn grow(
    x: &[Vec<f64>],
    y: &[u8],
    indices: Vec<usize>,
    params: &TreeParams,
    features_for_split: &mut dyn FnMut() -> Vec<usize>,
) -> TreeModel {
    let mut nodes = Vec::new();
    grow_node(x, y, indices, 0, params, features_for_split, &mut nodes);
    TreeModel { nodes }
}

fn grow_node(
    x: &[Vec<f64>],
    y: &[u8],
    indices: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    features_for_split: &mut dyn FnMut() -> Vec<usize>,
    nodes: &mut Vec<Node>,
) -> usize {
    let n1 = indices.iter().filter(|&&i| y[i] == 1).count();
    let counts = [indices.len() - n1, n1];
    let at = nodes.len();
    nodes.push(Node::Leaf {
        class_counts: counts,
    });

    let can_split = counts[0] > 0
        && counts[1] > 0
        && indices.len() >= params.min_samples_split.max(2)
        && params.max_depth.is_none_or(|d| depth < d);
    if !can_split {
        return at;
    }
    let features = features_for_split();
    let Some(split) = best_split_of(x, y, &indices, &features, params.min_samples_leaf) else {
        return at;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| x[i][split.feature] <= split.threshold);
    let left = grow_node(x, y, left_rows, depth + 1, params, features_for_split, nodes);
    let right = grow_node(x, y, right_rows, depth + 1, params, features_for_split, nodes);
    nodes[at] = Node::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    at
}

pub fn fit(params: &TreeParams, x: &[Vec<f64>], y: &[u8]) -> TreeModel {
    let width = x[0].len();
    let all: Vec<usize> = (0..width).collect();
    grow(x, y, (0..x.len()).collect(), params, &mut || all.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(10, 0).unwrap(), 0.0);
        assert_eq!(gini_impurity(5, 5).unwrap(), 0.5);
        assert!((gini_impurity(1, 3).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini_impurity(0, 0).is_err());
    }

    #[test]
    fn one_dimensional_split() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let s = best_split(&x, &[0, 0, 1, 1], &[0], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.gain - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_node_has_no_split() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(best_split(&x, &[1, 1, 1], &[0], 1), None);
    }

    #[test]
    fn xor_has_no_single_split() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(best_split(&x, &[0, 0, 1, 1], &[0, 1], 1), None);
    }

    #[test]
    fn tie_goes_to_lower_feature() {
        // Features 0 and 1 are identical, so every gain ties.
        let x = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let s = best_split(&x, &[0, 1, 1], &[1, 0], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 1.5);
    }

    #[test]
    fn min_samples_leaf_limits_thresholds() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let s = best_split(&x, &[0, 1, 1, 1], &[0], 2).unwrap();
        assert_eq!(s.threshold, 2.5);
    }

    #[test]
    fn training_points_land_in_pure_leaves() {
        let x = vec![vec![0.0, 5.0], vec![1.0, 3.0], vec![2.0, 4.0], vec![3.0, 1.0], vec![4.0, 0.0]];
        let y = [0, 1, 0, 1, 1];
        let t = fit(&TreeParams::default(), &x, &y);
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(t.predict_proba_row(row), f64::from(label));
        }
    }

    #[test]
    fn max_depth_is_respected() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let params = TreeParams {
            max_depth: Some(2),
            ..TreeParams::default()
        };
        assert!(fit(&params, &x, &y).depth() <= 2);
        assert!(fit(&TreeParams::default(), &x, &y).depth() > 2);
    }
}
