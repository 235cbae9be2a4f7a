//! The `heartvote` command-line tool: argument and config handling,
//! command dispatch and output files.

pub mod persist;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::classifiers::{fit_model, FittedModel, ModelKind, ModelSpec, ParamValue, RngStream};
use crate::dataset::{
    holdout_split, load_path, parse_feature_rows, summarize, Dataset, MissingPolicy, ParseOptions,
    RangePolicy, WireFormat,
};
use crate::ensemble::{EnsembleModel, VotingMode};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate_with_members, score_predictions, Aggregation, CvConfig, CvTarget, MetricSet, RocCurve,
};
use crate::preprocess::{pearson_correlation, ScalePolicy, Scaler};
use crate::tuning::{grid_search, Objective, ParamGrid};

use persist::{deserialize_model, serialize_model, sha256_hex, ModelFile, PersistedModel, TrainingProvenance};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HEARTVOTE_OUT";
/// Output directory used when neither `--out`, the environment nor the
/// config file names one.
pub const DEFAULT_OUT_DIR: &str = "heartvote-out";

#[derive(Parser, Debug)]
#[command(name = "heartvote", version, about = "Heart-disease classifiers, voting ensembles and cross-validated reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print class and sex counts and per-feature statistics.
    Summarize(CommonArgs),
    /// Write the Pearson correlation matrix (corr.csv, corr.svg).
    Corr(CommonArgs),
    /// Cross-validate a model or ensemble (report.csv, roc.csv, roc.svg).
    Cv(CommonArgs),
    /// Grid-search one model kind (leaderboard.csv).
    Tune(TuneArgs),
    /// Fit on the whole dataset and save model.json.
    Train(CommonArgs),
    /// Score rows with a saved model; prints `probability,label` per row.
    Predict(PredictArgs),
    /// Train on a stratified split and evaluate on the held-out rows.
    HoldoutEval(HoldoutArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Dataset path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// raw-uci or headered-csv (default: raw-uci for `.data` files,
    /// otherwise headered-csv).
    #[arg(long)]
    format: Option<String>,
    /// drop-row or error.
    #[arg(long)]
    missing: Option<String>,
    /// reject or flag.
    #[arg(long)]
    out_of_range: Option<String>,
    /// Master seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of folds [default: 5].
    #[arg(long)]
    k: Option<usize>,
    /// logreg, knn, svm, tree, gnb, forest, mlp, soft-vote or hard-vote
    /// [default: soft-vote].
    #[arg(long)]
    model: Option<String>,
    /// per-fold, global or none [default: per-fold].
    #[arg(long)]
    scale_policy: Option<String>,
    /// fold-mean or pooled [default: fold-mean].
    #[arg(long)]
    aggregation: Option<String>,
    /// Use plain instead of stratified folds and splits.
    #[arg(long)]
    plain: bool,
    /// Hyperparameter override, `name=value` or `kind.name=value`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// TOML file with defaults for any of these options.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// accuracy, f1 or roc_auc [default: accuracy].
    #[arg(long)]
    objective: Option<String>,
    /// Grid axis, `name=v1,v2,...`; repeat in slowest-first order.
    #[arg(long = "grid", value_name = "NAME=VALUES")]
    grid: Vec<String>,
}

#[derive(Args, Debug)]
struct HoldoutArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fraction of rows held out [default: 0.2].
    #[arg(long)]
    test_fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Saved model.json.
    #[arg(long)]
    model_file: PathBuf,
    /// Headered CSV of feature rows; a target column is ignored.
    #[arg(long)]
    input: PathBuf,
}

/// Optional TOML defaults; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data: Option<PathBuf>,
    format: Option<String>,
    missing: Option<String>,
    out_of_range: Option<String>,
    seed: Option<u64>,
    k: Option<usize>,
    model: Option<String>,
    scale_policy: Option<String>,
    aggregation: Option<String>,
    stratified: Option<bool>,
    out: Option<PathBuf>,
    objective: Option<String>,
    test_fraction: Option<f64>,
    #[serde(default)]
    params: toml::Table,
    #[serde(default)]
    grid: toml::Table,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::domain(format!("{}: {}", path.display(), e.message())))
}

fn toml_param(name: &str, value: &toml::Value) -> Result<ParamValue> {
    match value {
        toml::Value::Integer(i) => Ok(ParamValue::Num(*i as f64)),
        toml::Value::Float(f) => Ok(ParamValue::Num(*f)),
        toml::Value::Boolean(b) => Ok(ParamValue::Bool(*b)),
        toml::Value::String(s) => Ok(ParamValue::parse(s)),
        _ => Err(Error::domain(format!("parameter `{name}` must be a scalar"))),
    }
}

fn split_assignment(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Error::domain(format!("expected NAME=VALUE, got `{text}`")))
}

/// Which model the command works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Single(ModelKind),
    Vote(VotingMode),
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft-vote" => Ok(Selector::Vote(VotingMode::Soft)),
            "hard-vote" => Ok(Selector::Vote(VotingMode::Hard)),
            other => other.parse::<ModelKind>().map(Selector::Single).map_err(|_| {
                Error::domain(format!(
                    "unknown model `{other}` (expected logreg, knn, svm, tree, gnb, forest, mlp, soft-vote or hard-vote)"
                ))
            }),
        }
    }
}

/// Fully resolved options shared by the data-driven commands.
struct Settings {
    data: PathBuf,
    parse: ParseOptions,
    cv: CvConfig,
    selector: Selector,
    params: Vec<(String, ParamValue)>,
    out: PathBuf,
    config: ConfigFile,
}

fn parse_opt<T: FromStr<Err = Error>>(flag: Option<String>, config: Option<&String>) -> Result<Option<T>> {
    flag.or_else(|| config.cloned()).map(|s| s.parse()).transpose()
}

impl Settings {
    fn resolve(args: CommonArgs) -> Result<Settings> {
        let config = load_config(args.config.as_deref())?;
        let data = args
            .data
            .or_else(|| config.data.clone())
            .ok_or_else(|| Error::domain("--data is required"))?;
        let format = match parse_opt::<WireFormat>(args.format, config.format.as_ref())? {
            Some(f) => f,
            None if data.extension().is_some_and(|e| e == "data") => WireFormat::RawUci,
            None => WireFormat::HeaderedCsv,
        };
        let parse = ParseOptions::new(format)
            .missing(parse_opt::<MissingPolicy>(args.missing, config.missing.as_ref())?.unwrap_or_default())
            .out_of_range(
                parse_opt::<RangePolicy>(args.out_of_range, config.out_of_range.as_ref())?.unwrap_or_default(),
            );
        let cv = CvConfig {
            k: args.k.or(config.k).unwrap_or(5),
            seed: args.seed.or(config.seed).unwrap_or(42),
            scale_policy: parse_opt::<ScalePolicy>(args.scale_policy, config.scale_policy.as_ref())?
                .unwrap_or_default(),
            stratified: !args.plain && config.stratified.unwrap_or(true),
            aggregation: parse_opt::<Aggregation>(args.aggregation, config.aggregation.as_ref())?
                .unwrap_or_default(),
            ..CvConfig::default()
        };
        let selector = parse_opt::<Selector>(args.model, config.model.as_ref())?
            .unwrap_or(Selector::Vote(VotingMode::Soft));
        let mut params = config
            .params
            .iter()
            .map(|(k, v)| toml_param(k, v).map(|p| (k.clone(), p)))
            .collect::<Result<Vec<_>>>()?;
        for text in &args.params {
            let (name, value) = split_assignment(text)?;
            params.push((name.to_string(), ParamValue::parse(value)));
        }
        let out = args
            .out
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok(Settings {
            data,
            parse,
            cv,
            selector,
            params,
            out,
            config,
        })
    }

    fn load(&self) -> Result<Dataset> {
        load_path(&self.data, self.parse)
    }

    /// Specs for the selection with parameter overrides applied.
    fn target(&self) -> Result<CvTarget> {
        let mut specs = match self.selector {
            Selector::Single(kind) => vec![kind.default_spec()],
            Selector::Vote(_) => ModelKind::ALL.iter().map(|k| k.default_spec()).collect(),
        };
        for (name, value) in &self.params {
            match name.split_once('.') {
                Some((kind, param)) => {
                    let kind: ModelKind = kind.parse()?;
                    let mut matched = false;
                    for spec in specs.iter_mut().filter(|s| s.kind() == kind) {
                        spec.set_param(param, value)?;
                        matched = true;
                    }
                    if !matched {
                        return Err(Error::domain(format!("parameter `{name}` names a model that is not selected")));
                    }
                }
                None if specs.len() == 1 => specs[0].set_param(name, value)?,
                None => {
                    return Err(Error::domain(format!(
                        "parameter `{name}` must be qualified as kind.{name} for an ensemble"
                    )))
                }
            }
        }
        for spec in &specs {
            spec.validate()?;
        }
        Ok(match self.selector {
            Selector::Single(_) => CvTarget::Model(specs.remove(0)),
            Selector::Vote(mode) => CvTarget::Ensemble {
                members: specs,
                mode,
                weights: None,
            },
        })
    }
}

/// A failed command: exit code plus a one-line message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::EmptyDataset
            | Error::Domain(_)
            | Error::ModelFormat { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Errors reading user-supplied inputs are usage errors.
fn input<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })
}

/// Files produced by a command, written only once everything succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: &'static str, contents: impl Into<Vec<u8>>) {
        self.files.push((name, contents.into()));
    }

    fn write(self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn cmd_summarize(args: CommonArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args))?;
    let d = input(s.load())?;
    let summary = summarize(&d)?;
    let p = d.provenance();
    let mut text = String::new();
    let _ = writeln!(text, "source: {} ({})", p.source, p.format);
    let _ = writeln!(text, "rows: {} (dropped {})", summary.n_rows, p.dropped_rows);
    let (healthy, defect) = summary.class_counts;
    let (fh, fd) = summary.class_fractions;
    let _ = writeln!(
        text,
        "target: healthy {healthy} ({:.1}%), defect {defect} ({:.1}%)",
        100.0 * fh,
        100.0 * fd
    );
    let (female, male) = summary.sex_counts;
    let _ = writeln!(text, "sex: male {male}, female {female}");
    let _ = writeln!(text, "feature,min,max,mean,stddev");
    for f in &summary.features {
        let _ = writeln!(text, "{},{},{},{:.4},{:.4}", f.name, f.min, f.max, f.mean, f.stddev);
    }
    print!("{text}");
    Ok(())
}

fn cmd_corr(args: CommonArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args))?;
    let d = input(s.load())?;
    let m = pearson_correlation(&d, true)?;
    let mut out = Outputs::default();
    out.add("corr.csv", m.to_csv());
    out.add("corr.svg", report::corr_svg(&m));
    out.write(&s.out)?;
    Ok(())
}

fn cmd_cv(args: CommonArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args))?;
    let target = input(s.target())?;
    let d = input(s.load())?;
    let (members, headline) = cross_validate_with_members(&target, &d, &s.cv)?;
    let mut reports = members;
    reports.push(headline);
    let table = report::emit_table3(&reports)?;
    let curves = reports
        .iter()
        .map(|r| r.pooled_roc(d.targets()).map(|c| (r.model_name.clone(), c)))
        .collect::<Result<Vec<_>>>()?;
    let headline_curve = &curves.last().expect("headline report").1;

    let mut out = Outputs::default();
    out.add("report.csv", table.clone());
    out.add("roc.csv", report::roc_csv(headline_curve));
    out.add("roc.svg", report::roc_svg(&curves));
    print!("{table}");
    out.write(&s.out)?;
    Ok(())
}

fn cmd_tune(args: TuneArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args.common))?;
    let Selector::Single(kind) = s.selector else {
        return Err(Failure::usage("tune needs a single model kind, not an ensemble"));
    };
    if !s.params.is_empty() {
        return Err(Failure::usage("tune takes grid axes (--grid), not --param"));
    }
    let objective = input(parse_opt::<Objective>(args.objective, s.config.objective.as_ref()))?.unwrap_or_default();
    let mut grid = ParamGrid::new(kind);
    if !args.grid.is_empty() {
        for axis in &args.grid {
            let (name, values) = input(split_assignment(axis))?;
            grid = grid.with(name, values.split(',').map(|v| ParamValue::parse(v.trim())).collect());
        }
    } else if !s.config.grid.is_empty() {
        for (name, values) in &s.config.grid {
            let values = match values {
                toml::Value::Array(vs) => vs.iter().map(|v| toml_param(name, v)).collect::<Result<Vec<_>>>(),
                other => toml_param(name, other).map(|v| vec![v]),
            };
            grid = grid.with(name, input(values)?);
        }
    } else {
        grid = ParamGrid::default_for(kind);
    }
    let d = input(s.load())?;
    let result = grid_search(&grid, &d, &s.cv, objective)?;
    let mut out = Outputs::default();
    out.add("leaderboard.csv", result.leaderboard_csv());
    println!("best {} = {:.4}: {}", objective, result.best_score, result.best_spec);
    out.write(&s.out)?;
    Ok(())
}

/// Fitted members plus the ensemble built from them, if any.
struct Fitted {
    members: Vec<FittedModel>,
    ensemble: Option<EnsembleModel>,
}

impl Fitted {
    fn into_persisted(self) -> PersistedModel {
        match self.ensemble {
            Some(e) => PersistedModel::Ensemble(e),
            None => PersistedModel::Single(self.members.into_iter().next().expect("one model")),
        }
    }
}

fn fit_target(target: &CvTarget, x: &[Vec<f64>], y: &[u8], stream: &RngStream) -> Result<Fitted> {
    let fit = |spec: &ModelSpec| fit_model(spec, x, y, &stream.child(spec.kind().name()));
    match target {
        CvTarget::Model(spec) => Ok(Fitted {
            members: vec![fit(spec)?],
            ensemble: None,
        }),
        CvTarget::Ensemble { members, mode, weights } => {
            let members = members.iter().map(fit).collect::<Result<Vec<_>>>()?;
            let ensemble = EnsembleModel::new(members.clone(), *mode, weights.clone())?;
            Ok(Fitted {
                members,
                ensemble: Some(ensemble),
            })
        }
    }
}

fn scaler_for(policy: ScalePolicy, rows: &[Vec<f64>], columns: &[usize]) -> Result<Option<Scaler>> {
    match policy {
        ScalePolicy::None => Ok(None),
        _ => Scaler::fit(rows, columns).map(Some),
    }
}

fn cmd_train(args: CommonArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args))?;
    let target = input(s.target())?;
    let bytes = input(std::fs::read(&s.data).map_err(|e| Error::io(&s.data, e)))?;
    let d = input(s.load())?;
    let scaler = scaler_for(s.cv.scale_policy, d.rows(), &s.cv.scale_columns)?;
    let x = match &scaler {
        Some(sc) => sc.transform(d.rows()),
        None => d.rows().to_vec(),
    };
    let fitted = fit_target(&target, &x, d.targets(), &RngStream::new(s.cv.seed, "train"))?;
    let file = ModelFile::new(
        fitted.into_persisted(),
        scaler,
        TrainingProvenance {
            source: d.provenance().source.clone(),
            data_sha256: sha256_hex(&bytes),
            rows: d.len(),
            seed: s.cv.seed,
        },
    );
    let mut out = Outputs::default();
    out.add("model.json", serialize_model(&file));
    out.write(&s.out)?;
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), Failure> {
    let bytes = input(std::fs::read(&args.model_file).map_err(|e| Error::io(&args.model_file, e)))?;
    let model = input(deserialize_model(&bytes))?;
    let file = input(std::fs::File::open(&args.input).map_err(|e| Error::io(&args.input, e)))?;
    let rows = input(parse_feature_rows(file))?;
    let probs = input(model.predict_proba(&rows))?;
    let mut text = String::new();
    for p in probs {
        let label = crate::classifiers::predict_label(p, crate::classifiers::DEFAULT_THRESHOLD)?;
        let _ = writeln!(text, "{p:.6},{label}");
    }
    print!("{text}");
    Ok(())
}

fn cmd_holdout(args: HoldoutArgs) -> Result<(), Failure> {
    let s = input(Settings::resolve(args.common))?;
    let target = input(s.target())?;
    let fraction = args.test_fraction.or(s.config.test_fraction).unwrap_or(0.2);
    let d = input(s.load())?;
    let (train, test) = input(holdout_split(&d, fraction, s.cv.seed, s.cv.stratified))?;
    let scaler = match s.cv.scale_policy {
        ScalePolicy::Global => scaler_for(ScalePolicy::Global, d.rows(), &s.cv.scale_columns)?,
        policy => scaler_for(policy, train.rows(), &s.cv.scale_columns)?,
    };
    let (train_x, test_x) = match &scaler {
        Some(sc) => (sc.transform(train.rows()), sc.transform(test.rows())),
        None => (train.rows().to_vec(), test.rows().to_vec()),
    };
    let fitted = fit_target(&target, &train_x, train.targets(), &RngStream::new(s.cv.seed, "holdout"))?;

    let mut scored: Vec<(String, Vec<f64>)> = fitted
        .members
        .iter()
        .map(|m| m.predict_proba(&test_x).map(|p| (m.kind().display_name().to_string(), p)))
        .collect::<Result<_>>()?;
    if let Some(e) = &fitted.ensemble {
        scored.push((e.mode.display_name().to_string(), e.predict_proba(&test_x)?));
    }
    let rows: Vec<(String, MetricSet)> = scored
        .iter()
        .map(|(name, p)| score_predictions(test.targets(), p).map(|m| (name.clone(), m)))
        .collect::<Result<_>>()?;
    let curves: Vec<(String, RocCurve)> = scored
        .iter()
        .map(|(name, p)| crate::evaluation::roc_curve(test.targets(), p).map(|c| (name.clone(), c)))
        .collect::<Result<_>>()?;
    let table = report::table_rows(&rows)?;

    let mut out = Outputs::default();
    out.add("report.csv", table.clone());
    out.add("roc.csv", report::roc_csv(&curves.last().expect("headline curve").1));
    out.add("roc.svg", report::roc_svg(&curves));
    println!("train rows {}, test rows {}", train.len(), test.len());
    print!("{table}");
    out.write(&s.out)?;
    Ok(())
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs one command and returns the process exit code: 0 on success, 2 for
/// usage, parse and domain errors, 1 for runtime failures. Errors print a
/// single line on stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("heartvote: usage: {}", one_line(first.trim_start_matches("error: ")));
            return 2;
        }
    };
    let result = match cli.command {
        Command::Summarize(a) => cmd_summarize(a),
        Command::Corr(a) => cmd_corr(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::HoldoutEval(a) => cmd_holdout(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let kind = if f.code == 2 { "usage" } else { "error" };
            eprintln!("heartvote: {kind}: {}", one_line(&f.message));
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!("soft-vote".parse::<Selector>().unwrap(), Selector::Vote(VotingMode::Soft));
        assert_eq!("svm".parse::<Selector>().unwrap(), Selector::Single(ModelKind::Svm));
        assert!("vote".parse::<Selector>().is_err());
    }

    #[test]
    fn qualified_params_reach_members() {
        let s = Settings {
            data: PathBuf::from("x.csv"),
            parse: ParseOptions::new(WireFormat::HeaderedCsv),
            cv: CvConfig::default(),
            selector: Selector::Vote(VotingMode::Soft),
            params: vec![("svm.C".into(), ParamValue::Num(2.0))],
            out: PathBuf::from("o"),
            config: ConfigFile::default(),
        };
        let CvTarget::Ensemble { members, .. } = s.target().unwrap() else {
            panic!("ensemble expected");
        };
        assert!(members[2].canonical().contains("C=2"));
        let bare = Settings {
            params: vec![("C".into(), ParamValue::Num(2.0))],
            ..s
        };
        assert!(bare.target().is_err());
    }

    #[test]
    fn config_file_keys() {
        let c: ConfigFile = toml::from_str(
            "seed = 7\nmodel = \"svm\"\n[params]\nC = 2\nkernel = \"linear\"\n[grid]\nkernel = [\"linear\", \"rbf\"]\nC = [1, 2]\n",
        )
        .unwrap();
        assert_eq!(c.seed, Some(7));
        let names: Vec<&String> = c.grid.keys().collect();
        assert_eq!(names, ["kernel", "C"]);
        assert!(toml::from_str::<ConfigFile>("bogus = 1").is_err());
    }
}
