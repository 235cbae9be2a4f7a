//! Tabular binary classification toolkit for the 14-attribute UCI
//! heart-disease table.
//!
//! The crate covers the full pipeline: ingesting the table in its raw UCI
//! or headered CSV form, z-score standardization, seven from-scratch
//! classifiers behind one fit / predict-probability contract, hard and soft
//! voting ensembles, stratified k-fold cross-validation with the usual
//! confusion-matrix metrics and ROC-AUC, grid search, and the report/plot
//! emission used by the `heartvote` command-line tool.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod preprocess;
pub mod tuning;

pub use classifiers::{FittedModel, ModelKind, ModelSpec, RngStream};
pub use dataset::{Dataset, DatasetSummary, MissingPolicy, WireFormat};
pub use ensemble::{EnsembleModel, VotingMode};
pub use error::{Error, Result};
pub use evaluation::{ConfusionMatrix, CvReport, MetricSet, RocCurve};
pub use preprocess::{CorrelationMatrix, Scaler};
