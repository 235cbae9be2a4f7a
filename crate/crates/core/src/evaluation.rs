//! Confusion-matrix metrics, ROC/AUC, k-fold partitioning and
//! cross-validation.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit_model, predict_label, FittedModel, ModelSpec, RngStream, DEFAULT_THRESHOLD};
use crate::dataset::{continuous_features, Dataset};
use crate::ensemble::{EnsembleModel, VotingMode};
use crate::error::{Error, Result};
use crate::preprocess::{ScalePolicy, Scaler};

/// Counts with class 1 (defect) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::domain(format!(
            "{} labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::domain("confusion matrix of zero rows"));
    }
    let mut c = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => return Err(Error::domain(format!("labels ({t}, {p}) are not binary"))),
        }
    }
    Ok(c)
}

/// Which metrics hit a 0/0 (reported as 0) or were undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricFlags {
    pub precision_zero_division: bool,
    pub recall_zero_division: bool,
    pub f1_zero_division: bool,
    pub roc_auc_undefined: bool,
}

impl MetricFlags {
    fn merge(self, other: MetricFlags) -> MetricFlags {
        MetricFlags {
            precision_zero_division: self.precision_zero_division || other.precision_zero_division,
            recall_zero_division: self.recall_zero_division || other.recall_zero_division,
            f1_zero_division: self.f1_zero_division || other.f1_zero_division,
            roc_auc_undefined: self.roc_auc_undefined || other.roc_auc_undefined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: Option<f64>,
    pub flags: MetricFlags,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Accuracy, precision, recall and F1; `roc_auc` is left empty.
pub fn metrics_from_confusion(c: &ConfusionMatrix) -> MetricSet {
    let (accuracy, _) = ratio(c.tp + c.tn, c.total());
    let (precision, p_flag) = ratio(c.tp, c.tp + c.fp);
    let (recall, r_flag) = ratio(c.tp, c.tp + c.fn_);
    let (f1, f_flag) = if precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    MetricSet {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc: None,
        flags: MetricFlags {
            precision_zero_division: p_flag,
            recall_zero_division: r_flag,
            f1_zero_division: f_flag,
            roc_auc_undefined: false,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are predicted positive. The first point uses
    /// `+inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve with one point per distinct score (descending), anchored at
/// `(0, 0)`; the area uses the trapezoid rule, so tied scores are credited
/// half.
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::domain(format!(
            "{} labels but {} scores",
            y_true.len(),
            scores.len()
        )));
    }
    let positives = y_true.iter().filter(|&&t| t == 1).count();
    let negatives = y_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::domain("NaN score"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let point = RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        };
        let prev = points.last().expect("anchor present");
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve {
        points,
        auc: auc.clamp(0.0, 1.0),
    })
}

pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    roc_curve(y_true, scores).map(|c| c.auc)
}

/// Accuracy/precision/recall/F1 at the 0.5 threshold plus ROC-AUC from the
/// raw scores.
pub fn score_predictions(y_true: &[u8], scores: &[f64]) -> Result<MetricSet> {
    let labels = scores
        .iter()
        .map(|&p| predict_label(p, DEFAULT_THRESHOLD))
        .collect::<Result<Vec<u8>>>()?;
    let mut m = metrics_from_confusion(&confusion(y_true, &labels)?);
    match roc_auc(y_true, scores) {
        Ok(auc) => m.roc_auc = Some(auc),
        Err(Error::UndefinedAuc) => m.flags.roc_auc_undefined = true,
        Err(e) => return Err(e),
    }
    Ok(m)
}

/// Disjoint test folds covering every row index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub folds: Vec<Vec<usize>>,
    /// False when stratification was impossible and plain k-fold was used.
    pub stratified: bool,
}

impl FoldAssignment {
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        train
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::domain(format!("k = {k}, need at least 2 folds")));
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds {n} rows")));
    }
    Ok(())
}

pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(n, k)?;
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(&mut RngStream::new(seed, "folds/all").rng());
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in all.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldAssignment {
        folds,
        stratified: false,
    })
}

/// Shuffles each class with the seed and deals it round-robin across the
/// folds; the second class continues where the first stopped so fold sizes
/// also stay within one of each other. Falls back to plain k-fold when a
/// class has fewer than `k` members.
pub fn stratified_kfold_indices(y: &[u8], k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(y.len(), k)?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &t) in y.iter().enumerate() {
        if t > 1 {
            return Err(Error::domain(format!("label {t} is not binary")));
        }
        by_class[usize::from(t)].push(i);
    }
    if by_class.iter().any(|c| c.len() < k) {
        log::warn!("a class has fewer than {k} members; using plain k-fold");
        return kfold_indices(y.len(), k, seed);
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for (class, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut RngStream::new(seed, format!("folds/class-{class}")).rng());
        for (pos, &i) in members.iter().enumerate() {
            folds[(offset + pos) % k].push(i);
        }
        offset = (offset + members.len()) % k;
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldAssignment {
        folds,
        stratified: true,
    })
}

/// How fold results are reduced to the headline metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Unweighted mean of per-fold metrics.
    #[default]
    FoldMean,
    /// Metrics of the concatenated out-of-fold predictions.
    Pooled,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fold-mean" => Ok(Aggregation::FoldMean),
            "pooled" => Ok(Aggregation::Pooled),
            other => Err(Error::domain(format!(
                "unknown aggregation `{other}` (expected fold-mean or pooled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub scale_policy: ScalePolicy,
    /// Columns standardized by the scaler.
    pub scale_columns: Vec<usize>,
    pub stratified: bool,
    pub aggregation: Aggregation,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            seed: 42,
            scale_policy: ScalePolicy::PerFold,
            scale_columns: continuous_features(),
            stratified: true,
            aggregation: Aggregation::FoldMean,
        }
    }
}

/// What to cross-validate.
#[derive(Debug, Clone, PartialEq)]
pub enum CvTarget {
    Model(ModelSpec),
    Ensemble {
        members: Vec<ModelSpec>,
        mode: VotingMode,
        weights: Option<Vec<f64>>,
    },
}

impl CvTarget {
    /// The default seven-member ensemble.
    pub fn default_ensemble(mode: VotingMode) -> CvTarget {
        CvTarget::Ensemble {
            members: crate::classifiers::ModelKind::ALL
                .iter()
                .map(|k| k.default_spec())
                .collect(),
            mode,
            weights: None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            CvTarget::Model(spec) => spec.kind().display_name().to_string(),
            CvTarget::Ensemble { mode, .. } => mode.display_name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub model_name: String,
    pub seed: u64,
    pub k: usize,
    pub scale_policy: ScalePolicy,
    pub aggregation: Aggregation,
    pub stratified: bool,
    pub per_fold: Vec<FoldResult>,
    pub mean: MetricSet,
    /// Out-of-fold probability for every row of the input dataset.
    pub oof_scores: Vec<f64>,
}

impl CvReport {
    /// ROC curve of the pooled out-of-fold scores.
    pub fn pooled_roc(&self, y: &[u8]) -> Result<RocCurve> {
        roc_curve(y, &self.oof_scores)
    }
}

fn mean_metrics(sets: &[MetricSet]) -> MetricSet {
    let n = sets.len() as f64;
    let avg = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
    let aucs: Vec<f64> = sets.iter().filter_map(|m| m.roc_auc).collect();
    MetricSet {
        accuracy: avg(|m| m.accuracy),
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f1: avg(|m| m.f1),
        roc_auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        flags: sets.iter().fold(MetricFlags::default(), |acc, m| acc.merge(m.flags)),
    }
}

/// Scaled copies of the fold's train and test rows.
fn scaled_rows(
    d: &Dataset,
    train: &[usize],
    test: &[usize],
    config: &CvConfig,
    global: Option<&Scaler>,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let pick = |idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| d.rows()[i].clone()).collect() };
    let (train_rows, test_rows) = (pick(train), pick(test));
    let scaler = match config.scale_policy {
        ScalePolicy::None => return Ok((train_rows, test_rows)),
        ScalePolicy::Global => global.expect("global scaler fitted").clone(),
        ScalePolicy::PerFold => Scaler::fit(&train_rows, &config.scale_columns)?,
    };
    Ok((scaler.transform(&train_rows), scaler.transform(&test_rows)))
}

/// Fold-level stream for a model kind: `fold-<i>/<kind>`.
pub fn fold_stream(seed: u64, fold: usize, spec: &ModelSpec) -> RngStream {
    RngStream::new(seed, format!("fold-{fold}")).child(spec.kind().name())
}

struct FoldOutput {
    test: Vec<usize>,
    train_size: usize,
    /// One score vector per member (a single entry for a plain model).
    member_scores: Vec<Vec<f64>>,
    combined: Option<Vec<f64>>,
}

fn run_folds(target: &CvTarget, d: &Dataset, config: &CvConfig) -> Result<(FoldAssignment, Vec<FoldOutput>)> {
    let assignment = if config.stratified {
        stratified_kfold_indices(d.targets(), config.k, config.seed)?
    } else {
        kfold_indices(d.len(), config.k, config.seed)?
    };
    let global = match config.scale_policy {
        ScalePolicy::Global => Some(Scaler::fit(d.rows(), &config.scale_columns)?),
        _ => None,
    };

    let outputs = (0..config.k)
        .into_par_iter()
        .map(|fold| -> Result<FoldOutput> {
            let test = assignment.folds[fold].clone();
            let train = assignment.train_indices(fold);
            let (train_x, test_x) = scaled_rows(d, &train, &test, config, global.as_ref())?;
            let train_y: Vec<u8> = train.iter().map(|&i| d.targets()[i]).collect();

            let specs: Vec<&ModelSpec> = match target {
                CvTarget::Model(spec) => vec![spec],
                CvTarget::Ensemble { members, .. } => members.iter().collect(),
            };
            let fitted = specs
                .iter()
                .map(|spec| fit_model(spec, &train_x, &train_y, &fold_stream(config.seed, fold, spec)))
                .collect::<Result<Vec<FittedModel>>>()?;
            let member_scores = fitted
                .iter()
                .map(|m| m.predict_proba(&test_x))
                .collect::<Result<Vec<_>>>()?;
            let combined = match target {
                CvTarget::Model(_) => None,
                CvTarget::Ensemble { mode, weights, .. } => {
                    let ensemble = EnsembleModel::new(fitted, *mode, weights.clone())?;
                    Some(
                        (0..test.len())
                            .map(|r| {
                                let probs: Vec<f64> = member_scores.iter().map(|s| s[r]).collect();
                                ensemble.combine(&probs)
                            })
                            .collect(),
                    )
                }
            };
            Ok(FoldOutput {
                test,
                train_size: train.len(),
                member_scores,
                combined,
            })
        })
        .collect::<Vec<Result<FoldOutput>>>()
        .into_iter()
        .enumerate()
        .map(|(fold, r)| r.map_err(|e| Error::Fold { fold, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok((assignment, outputs))
}

fn assemble(
    name: String,
    d: &Dataset,
    config: &CvConfig,
    stratified: bool,
    folds: &[FoldOutput],
    scores_of: impl Fn(&FoldOutput) -> &[f64],
) -> Result<CvReport> {
    let mut per_fold = Vec::with_capacity(folds.len());
    let mut oof_scores = vec![f64::NAN; d.len()];
    for (fold, out) in folds.iter().enumerate() {
        let scores = scores_of(out);
        let y: Vec<u8> = out.test.iter().map(|&i| d.targets()[i]).collect();
        let metrics = score_predictions(&y, scores).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?;
        for (&i, &s) in out.test.iter().zip(scores) {
            oof_scores[i] = s;
        }
        per_fold.push(FoldResult {
            fold,
            train_size: out.train_size,
            test_size: out.test.len(),
            metrics,
        });
    }
    let mean = match config.aggregation {
        Aggregation::FoldMean => {
            mean_metrics(&per_fold.iter().map(|f| f.metrics).collect::<Vec<_>>())
        }
        Aggregation::Pooled => score_predictions(d.targets(), &oof_scores)?,
    };
    Ok(CvReport {
        model_name: name,
        seed: config.seed,
        k: config.k,
        scale_policy: config.scale_policy,
        aggregation: config.aggregation,
        stratified,
        per_fold,
        mean,
        oof_scores,
    })
}

/// k-fold cross-validation of a single model or an ensemble.
pub fn cross_validate(target: &CvTarget, d: &Dataset, config: &CvConfig) -> Result<CvReport> {
    let (assignment, folds) = run_folds(target, d, config)?;
    let name = target.name();
    match target {
        CvTarget::Model(_) => assemble(name, d, config, assignment.stratified, &folds, |f| &f.member_scores[0]),
        CvTarget::Ensemble { .. } => assemble(name, d, config, assignment.stratified, &folds, |f| {
            f.combined.as_deref().expect("ensemble scores")
        }),
    }
}

/// Cross-validates an ensemble and reports each member alongside it. The
/// member rows are identical to cross-validating each member on its own.
pub fn cross_validate_with_members(
    target: &CvTarget,
    d: &Dataset,
    config: &CvConfig,
) -> Result<(Vec<CvReport>, CvReport)> {
    let CvTarget::Ensemble { members, .. } = target else {
        return Ok((Vec::new(), cross_validate(target, d, config)?));
    };
    let (assignment, folds) = run_folds(target, d, config)?;
    let member_reports = members
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            assemble(
                spec.kind().display_name().to_string(),
                d,
                config,
                assignment.stratified,
                &folds,
                |f| &f.member_scores[j],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = assemble(target.name(), d, config, assignment.stratified, &folds, |f| {
        f.combined.as_deref().expect("ensemble scores")
    })?;
    Ok((member_reports, ensemble))
}

/// CSV with columns `model,accuracy,precision,recall,f1,roc_auc`.
pub fn metrics_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a MetricSet)>, decimals: usize) -> String {
    let mut out = String::from("model,accuracy,precision,recall,f1,roc_auc\n");
    for (name, m) in rows {
        let auc = m
            .roc_auc
            .map_or_else(String::new, |v| format!("{v:.decimals$}"));
        let _ = writeln!(
            out,
            "{name},{:.d$},{:.d$},{:.d$},{:.d$},{auc}",
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            d = decimals
        );
    }
    out
}
