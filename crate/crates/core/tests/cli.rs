mod common;

use std::path::Path;
use std::process::{Command, Output};

use heartvote::cli::persist::{deserialize_model, sha256_hex};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(common::bin())
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HEARTVOTE_OUT")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn run_plain(args: &[&str]) -> Output {
    Command::new(common::bin())
        .args(args)
        .env_remove("HEARTVOTE_OUT")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn heart_arg() -> String {
    common::data_dir().join("heart.csv").display().to_string()
}

fn stderr_lines(o: &Output) -> usize {
    String::from_utf8_lossy(&o.stderr).lines().count()
}

#[test]
fn soft_vote_cv_writes_eight_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = heart_arg();
    let o = run(&["cv", "--data", &data, "--format", "headered-csv", "--model", "soft-vote", "--k", "5", "--seed", "42"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "model,accuracy,precision,recall,f1,roc_auc");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        names,
        ["Logit", "KNN", "SVM", "Decision Tree", "Gaussian NB", "MLP", "Random Forest", "Soft Voting"]
    );
    for line in &lines[1..] {
        for v in line.split(',').skip(1) {
            let x: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&x));
            assert_eq!(v.split('.').nth(1).unwrap().len(), 4);
        }
    }
    let roc = std::fs::read_to_string(dir.path().join("roc.csv")).unwrap();
    assert!(roc.starts_with("threshold,fpr,tpr\ninf,0.000000,0.000000\n"));
    assert!(roc.trim_end().ends_with(",1.000000,1.000000"));
    let svg = std::fs::read_to_string(dir.path().join("roc.svg")).unwrap();
    assert!(svg.contains("<polyline") && svg.contains("Soft Voting AUC = "));
}

#[test]
fn single_model_cv_matches_its_ensemble_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = heart_arg();
    assert_eq!(run(&["cv", "--data", &data, "--model", "gnb"], dir.path()).status.code(), Some(0));
    let single = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(single.lines().count(), 2);
    let dir2 = tempfile::tempdir().unwrap();
    run(&["cv", "--data", &data, "--model", "hard-vote"], dir2.path());
    let all = std::fs::read_to_string(dir2.path().join("report.csv")).unwrap();
    assert!(all.contains(single.lines().nth(1).unwrap()));
    assert!(all.lines().last().unwrap().starts_with("Hard Voting,"));
}

#[test]
fn missing_data_path_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = run(&["cv", "--data", "/nonexistent/heart.csv"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o), 1);
    assert!(!out.exists());
}

#[test]
fn usage_and_domain_errors_exit_2_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = heart_arg();
    for args in [
        vec!["cv", "--data", data.as_str(), "--model", "boosting"],
        vec!["cv", "--data", data.as_str(), "--k", "1"],
        vec!["cv", "--data", data.as_str(), "--scale-policy", "sometimes"],
        vec!["cv", "--data", data.as_str(), "--bogus-flag"],
        vec!["cv", "--data", data.as_str(), "--model", "svm", "--param", "C=-1"],
        vec!["tune", "--data", data.as_str(), "--model", "soft-vote"],
        vec!["frobnicate"],
        vec!["cv"],
    ] {
        let o = run(&args, &dir.path().join("x"));
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stderr_lines(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!dir.path().join("x").exists());
    }
}

#[test]
fn malformed_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "age,sex\n1,2\n").unwrap();
    let o = run(&["summarize", "--data", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o), 1);
}

#[test]
fn summarize_reports_counts() {
    let o = run_plain(&["summarize", "--data", &heart_arg()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("rows: 297"), "{text}");
    assert!(text.contains("target: healthy 160 (53.9%), defect 137 (46.1%)"), "{text}");
    assert!(text.contains("sex: male 201, female 96"), "{text}");
}

#[test]
fn raw_file_format_is_inferred() {
    let raw = common::data_dir().join("cleveland.data");
    let o = run_plain(&["summarize", "--data", raw.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("rows: 297 (dropped 6)"), "{text}");
}

#[test]
fn corr_writes_matrix_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["corr", "--data", &heart_arg()], dir.path()).status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    assert_eq!(csv.lines().count(), 15);
    assert!(csv.lines().nth(1).unwrap().starts_with("age,1.000000,"));
    let svg = std::fs::read_to_string(dir.path().join("corr.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 14 * 14);
}

#[test]
fn tune_writes_leaderboard() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tune", "--data", &heart_arg(), "--model", "svm"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("leaderboard.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "rank,spec,objective,score");
    assert_eq!(lines.len(), 7);
    assert!(csv.contains("svm(kernel=linear,C=2,gamma=auto,"));
    let scores: Vec<f64> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tune", "--data", &heart_arg(), "--model", "knn", "--grid", "k=1,15", "--objective", "f1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("leaderboard.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().contains(",f1,"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("from-config");
    std::fs::write(
        &cfg,
        format!(
            "data = {:?}\nmodel = \"svm\"\nseed = 7\nout = {:?}\n[params]\nkernel = \"rbf\"\nC = 2\n",
            heart_arg(),
            out.display().to_string()
        ),
    )
    .unwrap();
    let o = run_plain(&["cv", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().starts_with("SVM,"));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run_plain(&["cv", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(common::bin())
        .args(["corr", "--data", &heart_arg()])
        .env("HEARTVOTE_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("corr.csv").exists());
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = heart_arg();
    let before = sha256_hex(&std::fs::read(&data).unwrap());
    let o = run(&["train", "--data", &data, "--model", "logreg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(sha256_hex(&std::fs::read(&data).unwrap()), before);

    let model_path = dir.path().join("model.json");
    let bytes = std::fs::read(&model_path).unwrap();
    assert!(String::from_utf8_lossy(&bytes).starts_with("{\n  \"schema_version\": 1,"));
    let file = deserialize_model(&bytes).unwrap();
    assert_eq!(file.provenance.data_sha256, before);
    assert_eq!(file.provenance.seed, 42);

    let input = dir.path().join("one-row.csv");
    let text = std::fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    std::fs::write(&input, format!("{}\n{}\n", lines.next().unwrap(), lines.next().unwrap())).unwrap();
    let o = run_plain(&["predict", "--model-file", model_path.to_str().unwrap(), "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let (p, label) = stdout.trim().split_once(',').unwrap();
    let p: f64 = p.parse().unwrap();
    let d = common::heart();
    let expected = file.predict_proba(&d.rows()[..1]).unwrap()[0];
    assert!((p - expected).abs() < 5e-7);
    assert_eq!(label, if expected >= 0.5 { "1" } else { "0" });
}

#[test]
fn bad_model_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("rows.csv");
    std::fs::write(&input, "age,sex,cp,trestbps,chol,fbs,restecg,thalach,exang,oldpeak,slope,ca,thal\n63,1,1,145,233,1,2,150,0,2.3,3,0,6\n").unwrap();
    let o = run(&["train", "--data", &heart_arg(), "--model", "gnb"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let model = dir.path().join("model.json");
    let text = std::fs::read_to_string(&model).unwrap().replace("\"kind\": \"gnb\"", "\"kind\": \"xgboost\"");
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, text).unwrap();
    for path in [broken.as_path(), Path::new("/nonexistent/model.json")] {
        let o = run_plain(&["predict", "--model-file", path.to_str().unwrap(), "--input", input.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        assert_eq!(stderr_lines(&o), 1);
    }
}

#[test]
fn holdout_eval_reports_every_member() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["holdout-eval", "--data", &heart_arg(), "--model", "soft-vote"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 9);
    let svg = std::fs::read_to_string(dir.path().join("roc.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 8);
    assert!(String::from_utf8_lossy(&o.stdout).contains("train rows 238, test rows 59"));
}
