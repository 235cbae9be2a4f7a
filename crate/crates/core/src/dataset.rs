//! Heart-disease table ingestion, validation, summaries and holdout splits.
//!
//! Two wire formats are accepted:
//!
//! * `raw-uci`: the processed Cleveland file as distributed by UCI. One
//!   record per line, 14 comma-separated decimal fields, `?` marks a missing
//!   value, and the last field is the 0–4 diagnosis which is collapsed to
//!   healthy (0) / defect (1).
//! * `headered-csv`: a header line naming the 14 columns (any order)
//!   followed by decimal rows whose target is already 0/1.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifiers::RngStream;
use crate::error::{Error, Result};

pub const N_FEATURES: usize = 13;
pub const MISSING_MARKER: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeKind {
    Continuous,
    Categorical,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllowedValues {
    /// Any finite real.
    Real,
    /// One of a fixed set of numeric codes.
    Codes(&'static [f64]),
}

impl AllowedValues {
    pub fn contains(&self, value: f64) -> bool {
        match self {
            AllowedValues::Real => value.is_finite(),
            AllowedValues::Codes(codes) => codes.contains(&value),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttributeSchema {
    pub id: u8,
    pub name: &'static str,
    pub kind: AttributeKind,
    pub allowed: AllowedValues,
}

const fn attr(
    id: u8,
    name: &'static str,
    kind: AttributeKind,
    allowed: AllowedValues,
) -> AttributeSchema {
    AttributeSchema {
        id,
        name,
        kind,
        allowed,
    }
}

use AllowedValues::{Codes, Real};
use AttributeKind::{Binary, Categorical, Continuous};

/// The 14 attributes in their canonical (raw file) order; the last one is
/// the target.
pub const SCHEMA: [AttributeSchema; 14] = [
    attr(1, "age", Continuous, Real),
    attr(2, "sex", Binary, Codes(&[0.0, 1.0])),
    attr(3, "cp", Categorical, Codes(&[1.0, 2.0, 3.0, 4.0])),
    attr(4, "trestbps", Continuous, Real),
    attr(5, "chol", Continuous, Real),
    attr(6, "fbs", Binary, Codes(&[0.0, 1.0])),
    attr(7, "restecg", Categorical, Codes(&[0.0, 1.0, 2.0])),
    attr(8, "thalach", Continuous, Real),
    attr(9, "exang", Binary, Codes(&[0.0, 1.0])),
    attr(10, "oldpeak", Continuous, Real),
    attr(11, "slope", Categorical, Codes(&[1.0, 2.0, 3.0])),
    attr(12, "ca", Categorical, Codes(&[0.0, 1.0, 2.0, 3.0])),
    attr(13, "thal", Categorical, Codes(&[3.0, 6.0, 7.0])),
    attr(14, "target", Binary, Codes(&[0.0, 1.0])),
];

pub const TARGET_INDEX: usize = 13;
const SEX_INDEX: usize = 1;

/// Feature indices of the continuous attributes (age, trestbps, chol,
/// thalach, oldpeak).
pub fn continuous_features() -> Vec<usize> {
    SCHEMA[..N_FEATURES]
        .iter()
        .enumerate()
        .filter(|(_, a)| a.kind == AttributeKind::Continuous)
        .map(|(i, _)| i)
        .collect()
}

pub fn feature_names() -> impl Iterator<Item = &'static str> {
    SCHEMA[..N_FEATURES].iter().map(|a| a.name)
}

pub fn attribute_index(name: &str) -> Option<usize> {
    SCHEMA.iter().position(|a| a.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WireFormat {
    RawUci,
    HeaderedCsv,
}

impl fmt::Display for WireFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WireFormat::RawUci => "raw-uci",
            WireFormat::HeaderedCsv => "headered-csv",
        })
    }
}

impl FromStr for WireFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw-uci" => Ok(WireFormat::RawUci),
            "headered-csv" => Ok(WireFormat::HeaderedCsv),
            other => Err(Error::domain(format!(
                "unknown format `{other}` (expected raw-uci or headered-csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
    Error,
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::DropRow => "drop-row",
            MissingPolicy::Error => "error",
        })
    }
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop-row" => Ok(MissingPolicy::DropRow),
            "error" => Ok(MissingPolicy::Error),
            other => Err(Error::domain(format!(
                "unknown missing policy `{other}` (expected drop-row or error)"
            ))),
        }
    }
}

/// What to do with a categorical code outside its schema set.
///
/// `Flag` keeps the value but counts it in the provenance, which allows
/// loading re-encoded variants of the table. Non-binary `sex` values are
/// rejected under either policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangePolicy {
    #[default]
    Reject,
    Flag,
}

impl FromStr for RangePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(RangePolicy::Reject),
            "flag" => Ok(RangePolicy::Flag),
            other => Err(Error::domain(format!(
                "unknown range policy `{other}` (expected reject or flag)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub format: WireFormat,
    pub missing: MissingPolicy,
    pub out_of_range: RangePolicy,
}

impl ParseOptions {
    pub fn new(format: WireFormat) -> Self {
        ParseOptions {
            format,
            missing: MissingPolicy::default(),
            out_of_range: RangePolicy::default(),
        }
    }

    pub fn missing(mut self, policy: MissingPolicy) -> Self {
        self.missing = policy;
        self
    }

    pub fn out_of_range(mut self, policy: RangePolicy) -> Self {
        self.out_of_range = policy;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub format: WireFormat,
    pub missing_policy: MissingPolicy,
    pub dropped_rows: usize,
    pub flagged_values: usize,
}

impl Provenance {
    fn derived(source: impl Into<String>) -> Self {
        Provenance {
            source: source.into(),
            format: WireFormat::HeaderedCsv,
            missing_policy: MissingPolicy::DropRow,
            dropped_rows: 0,
            flagged_values: 0,
        }
    }
}

/// Rows of 13 features plus a binary target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    targets: Vec<u8>,
    provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset from in-memory rows, enforcing the schema.
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<u8>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::domain(format!(
                "{} rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != N_FEATURES {
                return Err(Error::Schema(format!(
                    "row {i} has {} features, expected {N_FEATURES}",
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if !SCHEMA[j].allowed.contains(value) {
                    return Err(Error::Schema(format!(
                        "row {i}: {} = {value} is outside its allowed values",
                        SCHEMA[j].name
                    )));
                }
            }
        }
        if let Some(t) = targets.iter().find(|&&t| t > 1) {
            return Err(Error::domain(format!("target {t} is not binary")));
        }
        Ok(Dataset {
            rows,
            targets,
            provenance: Provenance::derived("memory"),
        })
    }

    /// Builds a dataset from already-transformed rows (scaled, subset)
    /// without re-checking categorical codes.
    pub(crate) fn derived(rows: Vec<Vec<f64>>, targets: Vec<u8>, provenance: Provenance) -> Self {
        debug_assert_eq!(rows.len(), targets.len());
        Dataset {
            rows,
            targets,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(N_FEATURES, Vec::len)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::derived(
            indices.iter().map(|&i| self.rows[i].clone()).collect(),
            indices.iter().map(|&i| self.targets[i]).collect(),
            self.provenance.clone(),
        )
    }

    pub(crate) fn with_rows(&self, rows: Vec<Vec<f64>>) -> Dataset {
        Dataset::derived(rows, self.targets.clone(), self.provenance.clone())
    }

    /// Serializes as headered CSV in schema column order. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_headered_csv(&self) -> String {
        let mut out = SCHEMA.iter().map(|a| a.name).collect::<Vec<_>>().join(",");
        out.push('\n');
        for (row, &t) in self.rows.iter().zip(&self.targets) {
            for v in row {
                out.push_str(&v.to_string());
                out.push(',');
            }
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

/// Collapses the 0–4 diagnosis code to healthy (0) / defect (1).
pub fn binarize_target(raw: i64) -> Result<u8> {
    match raw {
        0 => Ok(0),
        1..=4 => Ok(1),
        other => Err(Error::domain(format!("raw target {other} outside 0..=4"))),
    }
}

/// Reads a file from disk and parses it.
pub fn load_path(path: &Path, options: ParseOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut d = parse_records(file, options)?;
    d.provenance.source = path.display().to_string();
    Ok(d)
}

enum Field {
    Missing,
    Value(f64),
}

fn parse_field(token: &str, line: u64, column: &str) -> Result<Field> {
    let token = token.trim();
    if token == MISSING_MARKER {
        return Ok(Field::Missing);
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Field::Value(v)),
        _ => Err(Error::Parse {
            line,
            message: format!("column {column}: `{token}` is not a number"),
        }),
    }
}

pub fn parse_records<R: Read>(source: R, options: ParseOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    // Column position of each schema attribute in the file.
    let layout: Vec<usize> = match options.format {
        WireFormat::RawUci => (0..SCHEMA.len()).collect(),
        WireFormat::HeaderedCsv => {
            let header = match records.next() {
                None => return Err(Error::EmptyDataset),
                Some(r) => r.map_err(|e| csv_error(e, 1))?,
            };
            header_layout(&header, true)?
        }
    };

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut dropped = 0usize;
    let mut flagged = 0usize;
    let mut seen_any = false;

    for record in records {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        seen_any = true;
        if record.len() != layout.len() {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    layout.len(),
                    record.len()
                ),
            });
        }

        let mut values = [0.0f64; 14];
        let mut missing = false;
        for (attr, &col) in layout.iter().enumerate() {
            match parse_field(&record[col], line, SCHEMA[attr].name)? {
                Field::Missing => missing = true,
                Field::Value(v) => values[attr] = v,
            }
        }
        if missing {
            match options.missing {
                MissingPolicy::DropRow => {
                    dropped += 1;
                    continue;
                }
                MissingPolicy::Error => {
                    return Err(Error::Parse {
                        line,
                        message: "missing value `?` with missing policy `error`".into(),
                    })
                }
            }
        }

        let raw_target = values[TARGET_INDEX];
        let target = match options.format {
            WireFormat::RawUci => {
                if raw_target.fract() != 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("target `{raw_target}` is not an integer"),
                    });
                }
                binarize_target(raw_target as i64).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?
            }
            WireFormat::HeaderedCsv => match raw_target {
                t if t == 0.0 => 0,
                t if t == 1.0 => 1,
                t => {
                    return Err(Error::Parse {
                        line,
                        message: format!("target `{t}` is not 0 or 1"),
                    })
                }
            },
        };

        flagged += check_ranges(&values[..N_FEATURES], line, options.out_of_range)?;
        rows.push(values[..N_FEATURES].to_vec());
        targets.push(target);
    }

    if !seen_any {
        return Err(Error::EmptyDataset);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows containing missing values");
    }
    if flagged > 0 {
        log::warn!("{flagged} categorical values fall outside the schema codes");
    }

    Ok(Dataset {
        rows,
        targets,
        provenance: Provenance {
            source: "stream".into(),
            format: options.format,
            missing_policy: options.missing,
            dropped_rows: dropped,
            flagged_values: flagged,
        },
    })
}

/// Parses feature-only rows (headered CSV; a target column, if present, is
/// ignored). Used for scoring new records.
pub fn parse_feature_rows<R: Read>(source: R) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyDataset),
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    let layout = header_layout(&header, false)?;
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(N_FEATURES);
        for (attr, &col) in layout.iter().take(N_FEATURES).enumerate() {
            match parse_field(&record[col], line, SCHEMA[attr].name)? {
                Field::Value(v) => row.push(v),
                Field::Missing => {
                    return Err(Error::Parse {
                        line,
                        message: format!("missing value for {}", SCHEMA[attr].name),
                    })
                }
            }
        }
        check_ranges(&row, line, RangePolicy::Reject)?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}

fn header_layout(header: &csv::StringRecord, require_target: bool) -> Result<Vec<usize>> {
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (col, name) in header.iter().enumerate() {
        if attribute_index(name).is_none() {
            return Err(Error::Schema(format!("unknown column `{name}`")));
        }
        if positions.insert(name, col).is_some() {
            return Err(Error::Schema(format!("duplicate column `{name}`")));
        }
    }
    let needed = if require_target { SCHEMA.len() } else { N_FEATURES };
    SCHEMA[..needed]
        .iter()
        .map(|a| {
            positions
                .get(a.name)
                .copied()
                .ok_or_else(|| Error::Schema(format!("missing column `{}`", a.name)))
        })
        .collect()
}

fn check_ranges(features: &[f64], line: u64, policy: RangePolicy) -> Result<usize> {
    let mut flagged = 0;
    for (j, &v) in features.iter().enumerate() {
        if SCHEMA[j].allowed.contains(v) {
            continue;
        }
        if j == SEX_INDEX || policy == RangePolicy::Reject {
            return Err(Error::Schema(format!(
                "line {line}: {} = {v} is outside its allowed values",
                SCHEMA[j].name
            )));
        }
        flagged += 1;
    }
    Ok(flagged)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureStats {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n_rows: usize,
    /// (healthy, defect)
    pub class_counts: (usize, usize),
    pub class_fractions: (f64, f64),
    /// (female, male)
    pub sex_counts: (usize, usize),
    pub features: Vec<FeatureStats>,
}

pub fn summarize(d: &Dataset) -> Result<DatasetSummary> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = d.len();
    let defect = d.targets.iter().filter(|&&t| t == 1).count();
    let healthy = n - defect;
    let male = d.rows.iter().filter(|r| r[SEX_INDEX] == 1.0).count();
    let female = d.rows.iter().filter(|r| r[SEX_INDEX] == 0.0).count();

    let features = SCHEMA[..d.width().min(N_FEATURES)]
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let col = d.rows.iter().map(|r| r[j]);
            let (min, max, sum) = col.fold(
                (f64::INFINITY, f64::NEG_INFINITY, 0.0),
                |(lo, hi, s), v| (lo.min(v), hi.max(v), s + v),
            );
            let mean = sum / n as f64;
            let var = d.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
            FeatureStats {
                name: a.name,
                min,
                max,
                mean,
                stddev: var.sqrt(),
            }
        })
        .collect();

    Ok(DatasetSummary {
        n_rows: n,
        class_counts: (healthy, defect),
        class_fractions: (healthy as f64 / n as f64, defect as f64 / n as f64),
        sex_counts: (female, male),
        features,
    })
}

/// Train/test row indices for a holdout split. Both lists are sorted.
pub fn holdout_indices(
    targets: &[u8],
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::domain(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n = targets.len();
    let total_test = (n as f64 * test_fraction).round() as usize;
    if total_test == 0 || total_test >= n {
        return Err(Error::domain(format!(
            "split of {n} rows at fraction {test_fraction} leaves an empty side"
        )));
    }

    let mut test = Vec::with_capacity(total_test);
    if stratified {
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &t) in targets.iter().enumerate() {
            by_class[usize::from(t)].push(i);
        }
        // The smaller class is rounded on its own; the larger class absorbs
        // the remainder so the total matches round(n * fraction).
        let larger = usize::from(by_class[1].len() > by_class[0].len());
        let smaller = 1 - larger;
        let smaller_quota = ((by_class[smaller].len() as f64 * test_fraction).round() as usize)
            .min(by_class[smaller].len());
        let larger_quota = (total_test - smaller_quota).min(by_class[larger].len());
        for (class, quota) in [(smaller, smaller_quota), (larger, larger_quota)] {
            let mut members = std::mem::take(&mut by_class[class]);
            let mut rng = RngStream::new(seed, format!("holdout/class-{class}")).rng();
            members.shuffle(&mut rng);
            test.extend_from_slice(&members[..quota]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        let mut rng = RngStream::new(seed, "holdout/all").rng();
        all.shuffle(&mut rng);
        test.extend_from_slice(&all[..total_test]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}

pub fn holdout_split(
    d: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = holdout_indices(&d.targets, test_fraction, seed, stratified)?;
    Ok((d.subset(&train), d.subset(&test)))
}
