//! The seven classifiers behind a single fit / predict-probability contract.
//!
//! A [`ModelSpec`] carries hyperparameters only; [`fit_model`] turns it into
//! an immutable [`FittedModel`] given training rows, binary labels and a
//! labelled [`RngStream`]. All probability outputs are for the positive
//! (defect) class.

pub mod forest;
pub mod gnb;
pub mod knn;
pub mod logreg;
pub mod mlp;
mod rng;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{FeaturesPerSplit, ForestParams};
pub use gnb::GnbParams;
pub use knn::KnnParams;
pub use logreg::LogregParams;
pub use mlp::{Activation, MlpParams};
pub use rng::RngStream;
pub use svm::{Gamma, Kernel, SvmParams};
pub use tree::TreeParams;

use crate::error::{Error, Result};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// 1 iff `p >= threshold`; a tie at the threshold predicts the positive class.
pub fn predict_label(p: f64, threshold: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::domain(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(u8::from(p >= threshold))
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    Knn,
    Svm,
    Tree,
    Gnb,
    Mlp,
    Forest,
}

impl ModelKind {
    /// Report order.
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Logreg,
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::Tree,
        ModelKind::Gnb,
        ModelKind::Mlp,
        ModelKind::Forest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::Tree => "tree",
            ModelKind::Gnb => "gnb",
            ModelKind::Mlp => "mlp",
            ModelKind::Forest => "forest",
        }
    }

    /// Row label used in the metrics table.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "Logit",
            ModelKind::Knn => "KNN",
            ModelKind::Svm => "SVM",
            ModelKind::Tree => "Decision Tree",
            ModelKind::Gnb => "Gaussian NB",
            ModelKind::Mlp => "MLP",
            ModelKind::Forest => "Random Forest",
        }
    }

    pub fn default_spec(self) -> ModelSpec {
        match self {
            ModelKind::Logreg => ModelSpec::Logreg(LogregParams::default()),
            ModelKind::Knn => ModelSpec::Knn(KnnParams::default()),
            ModelKind::Svm => ModelSpec::Svm(SvmParams::default()),
            ModelKind::Tree => ModelSpec::Tree(TreeParams::default()),
            ModelKind::Gnb => ModelSpec::Gnb(GnbParams::default()),
            ModelKind::Mlp => ModelSpec::Mlp(MlpParams::default()),
            ModelKind::Forest => ModelSpec::Forest(ForestParams::default()),
        }
    }

    fn requires_both_classes(self) -> bool {
        matches!(
            self,
            ModelKind::Logreg | ModelKind::Svm | ModelKind::Gnb | ModelKind::Mlp
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown model kind `{s}`")))
    }
}

/// A hyperparameter value as written in grids and config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Num(f64),
    Text(String),
}

impl ParamValue {
    /// Numbers parse as numbers, `true`/`false` as booleans, anything else
    /// stays text.
    pub fn parse(s: &str) -> ParamValue {
        match s {
            "true" => ParamValue::Bool(true),
            "false" => ParamValue::Bool(false),
            _ => s
                .parse::<f64>()
                .map(ParamValue::Num)
                .unwrap_or_else(|_| ParamValue::Text(s.to_string())),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

fn bad_value(name: &str, value: &ParamValue) -> Error {
    Error::domain(format!("invalid value `{value}` for parameter `{name}`"))
}

fn as_f64(name: &str, value: &ParamValue) -> Result<f64> {
    match value {
        ParamValue::Num(v) if v.is_finite() => Ok(*v),
        _ => Err(bad_value(name, value)),
    }
}

fn as_count(name: &str, value: &ParamValue) -> Result<usize> {
    match value {
        ParamValue::Num(v) if *v >= 1.0 && v.fract() == 0.0 => Ok(*v as usize),
        _ => Err(bad_value(name, value)),
    }
}

fn as_text<T: FromStr>(name: &str, value: &ParamValue) -> Result<T> {
    value
        .to_string()
        .parse::<T>()
        .map_err(|_| bad_value(name, value))
}

fn positive(name: &str, value: &ParamValue) -> Result<f64> {
    let v = as_f64(name, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad_value(name, value))
    }
}

fn non_negative(name: &str, value: &ParamValue) -> Result<f64> {
    let v = as_f64(name, value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(bad_value(name, value))
    }
}

fn max_depth_text(d: Option<usize>) -> String {
    d.map_or_else(|| "none".to_string(), |d| d.to_string())
}

fn parse_max_depth(name: &str, value: &ParamValue) -> Result<Option<usize>> {
    match value {
        ParamValue::Text(s) if s == "none" => Ok(None),
        other => as_count(name, other).map(Some),
    }
}

fn set_tree_param(tree: &mut TreeParams, name: &str, value: &ParamValue) -> Result<bool> {
    match name {
        "max_depth" => tree.max_depth = parse_max_depth(name, value)?,
        "min_samples_split" => tree.min_samples_split = as_count(name, value)?,
        "min_samples_leaf" => tree.min_samples_leaf = as_count(name, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn tree_params_text(tree: &TreeParams) -> Vec<(&'static str, String)> {
    vec![
        ("max_depth", max_depth_text(tree.max_depth)),
        ("min_samples_split", tree.min_samples_split.to_string()),
        ("min_samples_leaf", tree.min_samples_leaf.to_string()),
    ]
}

/// Hyperparameters for one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelSpec {
    Logreg(LogregParams),
    Knn(KnnParams),
    Svm(SvmParams),
    Tree(TreeParams),
    Gnb(GnbParams),
    Forest(ForestParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Logreg(_) => ModelKind::Logreg,
            ModelSpec::Knn(_) => ModelKind::Knn,
            ModelSpec::Svm(_) => ModelKind::Svm,
            ModelSpec::Tree(_) => ModelKind::Tree,
            ModelSpec::Gnb(_) => ModelKind::Gnb,
            ModelSpec::Forest(_) => ModelKind::Forest,
            ModelSpec::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::domain(format!("{}: {msg}", self.kind())));
        let tree_ok = |t: &TreeParams| {
            t.min_samples_split >= 1 && t.min_samples_leaf >= 1 && t.max_depth != Some(0)
        };
        match self {
            ModelSpec::Logreg(p) => {
                if !(p.learning_rate > 0.0) || p.max_iters == 0 || !(p.tolerance >= 0.0) || !(p.l2_lambda >= 0.0) {
                    return fail(format!("invalid parameters {p:?}"));
                }
            }
            ModelSpec::Knn(p) => {
                if p.k == 0 {
                    return fail("k must be at least 1".into());
                }
            }
            ModelSpec::Svm(p) => {
                let gamma_ok = match p.gamma {
                    Gamma::Auto => true,
                    Gamma::Value(g) => g > 0.0,
                };
                if !(p.c > 0.0) || !gamma_ok || !(p.tolerance > 0.0) || p.max_passes == 0 {
                    return fail(format!("invalid parameters {p:?}"));
                }
            }
            ModelSpec::Tree(p) => {
                if !tree_ok(p) {
                    return fail(format!("invalid parameters {p:?}"));
                }
            }
            ModelSpec::Gnb(p) => {
                if !(p.var_smoothing > 0.0) {
                    return fail("var_smoothing must be positive".into());
                }
            }
            ModelSpec::Forest(p) => {
                if p.n_trees == 0 || !tree_ok(&p.tree) || p.features_per_split == FeaturesPerSplit::Count(0) {
                    return fail(format!("invalid parameters {p:?}"));
                }
            }
            ModelSpec::Mlp(p) => {
                if p.hidden_units == 0 || p.epochs == 0 || !(p.learning_rate > 0.0) || p.init_scale.is_some_and(|s| !(s > 0.0)) {
                    return fail(format!("invalid parameters {p:?}"));
                }
            }
        }
        Ok(())
    }

    /// Sets one hyperparameter by name. Names are matched case-insensitively.
    pub fn set_param(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        let key = name.to_ascii_lowercase();
        let name = key.as_str();
        let known = match self {
            ModelSpec::Logreg(p) => {
                match name {
                    "learning_rate" => p.learning_rate = positive(name, value)?,
                    "max_iters" => p.max_iters = as_count(name, value)?,
                    "tolerance" => p.tolerance = non_negative(name, value)?,
                    "l2_lambda" => p.l2_lambda = non_negative(name, value)?,
                    _ => return Err(unknown_param(ModelKind::Logreg, name)),
                }
                true
            }
            ModelSpec::Knn(p) => {
                match name {
                    "k" => p.k = as_count(name, value)?,
                    _ => return Err(unknown_param(ModelKind::Knn, name)),
                }
                true
            }
            ModelSpec::Svm(p) => {
                match name {
                    "kernel" => p.kernel = as_text(name, value)?,
                    "c" => p.c = positive(name, value)?,
                    "gamma" => {
                        p.gamma = match value {
                            ParamValue::Text(s) if s == "auto" => Gamma::Auto,
                            other => Gamma::Value(positive(name, other)?),
                        }
                    }
                    "tolerance" => p.tolerance = positive(name, value)?,
                    "max_passes" => p.max_passes = as_count(name, value)?,
                    _ => return Err(unknown_param(ModelKind::Svm, name)),
                }
                true
            }
            ModelSpec::Tree(p) => set_tree_param(p, name, value)?,
            ModelSpec::Gnb(p) => {
                match name {
                    "var_smoothing" => p.var_smoothing = positive(name, value)?,
                    _ => return Err(unknown_param(ModelKind::Gnb, name)),
                }
                true
            }
            ModelSpec::Forest(p) => {
                match name {
                    "n_trees" => p.n_trees = as_count(name, value)?,
                    "bootstrap" => {
                        p.bootstrap = match value {
                            ParamValue::Bool(b) => *b,
                            other => return Err(bad_value(name, other)),
                        }
                    }
                    "features_per_split" => p.features_per_split = as_text(name, value)?,
                    other => {
                        if !set_tree_param(&mut p.tree, other, value)? {
                            return Err(unknown_param(ModelKind::Forest, other));
                        }
                    }
                }
                true
            }
            ModelSpec::Mlp(p) => {
                match name {
                    "hidden_units" => p.hidden_units = as_count(name, value)?,
                    "activation" => p.activation = as_text(name, value)?,
                    "learning_rate" => p.learning_rate = positive(name, value)?,
                    "epochs" => p.epochs = as_count(name, value)?,
                    "init_scale" => {
                        p.init_scale = match value {
                            ParamValue::Text(s) if s == "glorot" => None,
                            other => Some(positive(name, other)?),
                        }
                    }
                    _ => return Err(unknown_param(ModelKind::Mlp, name)),
                }
                true
            }
        };
        if !known {
            return Err(unknown_param(self.kind(), name));
        }
        Ok(())
    }

    /// Hyperparameters as `(name, value)` text pairs, in declaration order.
    pub fn params_text(&self) -> Vec<(&'static str, String)> {
        match self {
            ModelSpec::Logreg(p) => vec![
                ("learning_rate", p.learning_rate.to_string()),
                ("max_iters", p.max_iters.to_string()),
                ("tolerance", p.tolerance.to_string()),
                ("l2_lambda", p.l2_lambda.to_string()),
            ],
            ModelSpec::Knn(p) => vec![("k", p.k.to_string())],
            ModelSpec::Svm(p) => vec![
                ("kernel", p.kernel.to_string()),
                ("C", p.c.to_string()),
                ("gamma", p.gamma.to_string()),
                ("tolerance", p.tolerance.to_string()),
                ("max_passes", p.max_passes.to_string()),
            ],
            ModelSpec::Tree(p) => tree_params_text(p),
            ModelSpec::Gnb(p) => vec![("var_smoothing", p.var_smoothing.to_string())],
            ModelSpec::Forest(p) => {
                let mut v = vec![
                    ("n_trees", p.n_trees.to_string()),
                    ("bootstrap", p.bootstrap.to_string()),
                    ("features_per_split", p.features_per_split.to_string()),
                ];
                v.extend(tree_params_text(&p.tree));
                v
            }
            ModelSpec::Mlp(p) => vec![
                ("hidden_units", p.hidden_units.to_string()),
                ("activation", p.activation.to_string()),
                ("learning_rate", p.learning_rate.to_string()),
                ("epochs", p.epochs.to_string()),
                (
                    "init_scale",
                    p.init_scale.map_or_else(|| "glorot".to_string(), |s| s.to_string()),
                ),
            ],
        }
    }

    /// Canonical text form, e.g. `svm(kernel=linear,C=2,gamma=auto,...)`.
    pub fn canonical(&self) -> String {
        let params: Vec<String> = self
            .params_text()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}({})", self.kind(), params.join(","))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn unknown_param(kind: ModelKind, name: &str) -> Error {
    Error::domain(format!("{kind} has no parameter `{name}`"))
}

/// Learned parameters, one variant per classifier kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Learned {
    Logreg(logreg::LogregModel),
    Knn(knn::KnnModel),
    Svm(svm::SvmModel),
    Tree(tree::TreeModel),
    Gnb(gnb::GnbModel),
    Forest(forest::ForestModel),
    Mlp(mlp::MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub learned: Learned,
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// Positive-class probability of one row; the width is not checked.
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let p = match &self.learned {
            Learned::Logreg(m) => m.predict_proba_row(row),
            Learned::Knn(m) => m.predict_proba_row(row),
            Learned::Svm(m) => m.predict_proba_row(row),
            Learned::Tree(m) => m.predict_proba_row(row),
            Learned::Gnb(m) => m.predict_proba_row(row),
            Learned::Forest(m) => m.predict_proba_row(row),
            Learned::Mlp(m) => m.predict_proba_row(row),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_width(x, self.n_features)?;
        Ok(x.iter().map(|r| self.predict_proba_row(r)).collect())
    }
}

pub(crate) fn check_width(x: &[Vec<f64>], width: usize) -> Result<()> {
    match x.iter().position(|r| r.len() != width) {
        None => Ok(()),
        Some(i) => Err(Error::domain(format!(
            "row {i} has {} features, model expects {width}",
            x[i].len()
        ))),
    }
}

pub fn predict_proba(model: &FittedModel, x: &[Vec<f64>]) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

/// Trains `spec` on `(x, y)`. The result depends only on the arguments.
pub fn fit_model(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8], rng: &RngStream) -> Result<FittedModel> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(Error::domain(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let width = x[0].len();
    if width == 0 {
        return Err(Error::domain("rows have no features"));
    }
    check_width(x, width)?;
    if let Some(bad) = y.iter().find(|&&t| t > 1) {
        return Err(Error::domain(format!("label {bad} is not binary")));
    }
    let kind = spec.kind();
    let positives = y.iter().filter(|&&t| t == 1).count();
    if kind.requires_both_classes() && (positives == 0 || positives == y.len()) {
        return Err(Error::DegenerateTraining { kind: kind.name() });
    }

    let learned = match spec {
        ModelSpec::Logreg(p) => Learned::Logreg(logreg::fit(p, x, y)),
        ModelSpec::Knn(p) => Learned::Knn(knn::fit(p, x, y)),
        ModelSpec::Svm(p) => Learned::Svm(svm::fit(p, x, y, rng)?),
        ModelSpec::Tree(p) => Learned::Tree(tree::fit(p, x, y)),
        ModelSpec::Gnb(p) => Learned::Gnb(gnb::fit(p, x, y)),
        ModelSpec::Forest(p) => Learned::Forest(forest::fit(p, x, y, rng)),
        ModelSpec::Mlp(p) => Learned::Mlp(mlp::fit(p, x, y, rng)),
    };
    Ok(FittedModel {
        spec: spec.clone(),
        n_features: width,
        learned,
    })
}
