//! Model files: canonical JSON with a leading schema version.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};
use sha2::{Digest, Sha256};

use crate::classifiers::FittedModel;
use crate::ensemble::EnsembleModel;
use crate::error::{Error, Result};
use crate::preprocess::Scaler;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PersistedModel {
    Single(FittedModel),
    Ensemble(EnsembleModel),
}

impl PersistedModel {
    pub fn n_features(&self) -> usize {
        match self {
            PersistedModel::Single(m) => m.n_features,
            PersistedModel::Ensemble(e) => e.n_features(),
        }
    }

    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            PersistedModel::Single(m) => m.predict_proba(x),
            PersistedModel::Ensemble(e) => e.predict_proba(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingProvenance {
    pub source: String,
    pub data_sha256: String,
    pub rows: usize,
    pub seed: u64,
}

/// Everything needed to score new rows. Field order is the on-disk key
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u64,
    pub created: String,
    pub model: PersistedModel,
    pub scaler: Option<Scaler>,
    pub provenance: TrainingProvenance,
}

impl ModelFile {
    pub fn new(model: PersistedModel, scaler: Option<Scaler>, provenance: TrainingProvenance) -> Self {
        ModelFile {
            schema_version: SCHEMA_VERSION,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            model,
            scaler,
            provenance,
        }
    }

    /// Scales raw feature rows with the stored scaler and scores them.
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        match &self.scaler {
            Some(s) => {
                crate::classifiers::check_width(rows, self.model.n_features())?;
                self.model.predict_proba(&s.transform(rows))
            }
            None => self.model.predict_proba(rows),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Pretty JSON whose floats carry 17 significant digits, enough to round
/// trip every `f64`.
struct CanonicalFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let formatter = CanonicalFormatter {
        inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = Serializer::with_formatter(&mut out, formatter);
    value
        .serialize(&mut ser)
        .expect("model structures serialize to JSON");
    out.push(b'\n');
    out
}

pub fn serialize_model(file: &ModelFile) -> Vec<u8> {
    to_canonical_json(file)
}

pub fn deserialize_model(bytes: &[u8]) -> Result<ModelFile> {
    let format_err = |version, message: String| Error::ModelFormat { version, message };
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| format_err(None, format!("not JSON: {e}")))?;
    let version = value.get("schema_version").and_then(serde_json::Value::as_u64);
    match version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(format_err(Some(v), format!("unsupported schema version {v}"))),
        None => return Err(format_err(None, "missing schema_version".to_string())),
    }
    serde_json::from_value(value).map_err(|e| format_err(version, e.to_string()))
}
