//! Acceptance checks, one PASS/FAIL line each. `HEART_CSV` selects the
//! headered table used by criteria 1, 2, 7 and 8.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use heartvote::classifiers::logreg::loss_grad;
use heartvote::classifiers::mlp::MlpModel;
use heartvote::classifiers::svm::{train_smo, Kernel};
use heartvote::classifiers::{
    fit_model, Activation, FeaturesPerSplit, ForestParams, ModelKind, ModelSpec, RngStream, TreeParams,
};
use heartvote::cli::persist::{deserialize_model, serialize_model, ModelFile, PersistedModel, TrainingProvenance};
use heartvote::dataset::{continuous_features, summarize};
use heartvote::ensemble::{soft_vote, EnsembleModel, VotingMode};
use heartvote::evaluation::{
    confusion, cross_validate_with_members, metrics_from_confusion, roc_curve, stratified_kfold_indices, CvConfig,
    CvTarget,
};
use heartvote::Scaler;
use rand::Rng;

type Check = Result<String, String>;

fn within(value: f64, centre: f64, tol: f64) -> bool {
    (value - centre).abs() <= tol
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let note = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    match result {
        Ok(msg) if elapsed <= limit => Ok(format!("{msg}; {note}")),
        Ok(msg) => Err(format!("{msg}; too slow, {note}")),
        Err(msg) => Err(format!("{msg}; {note}")),
    }
}

fn dataset_fidelity() -> Check {
    let d = common::heart();
    let s = summarize(&d).map_err(|e| e.to_string())?;
    let (healthy, defect) = s.class_fractions;
    let (female, male) = s.sex_counts;
    let detail = format!(
        "{} rows, healthy {:.1}% / defect {:.1}%, {male} male / {female} female",
        s.n_rows,
        100.0 * healthy,
        100.0 * defect
    );
    let ok = s.n_rows == 303
        && within(100.0 * healthy, 45.5, 0.1)
        && within(100.0 * defect, 54.5, 0.1)
        && male == 207
        && female == 96;
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail}; expected 303 rows, 45.5% / 54.5%, 207 / 96"))
    }
}

fn table_bands() -> Check {
    let d = common::heart();
    let config = CvConfig::default();
    let (members, soft) = cross_validate_with_members(&CvTarget::default_ensemble(VotingMode::Soft), &d, &config)
        .map_err(|e| e.to_string())?;
    let by_name = |name: &str| members.iter().find(|r| r.model_name == name).expect("member report");
    let logreg = by_name("Logit").mean;
    let forest = by_name("Random Forest").mean;
    let best_member_auc = members.iter().filter_map(|r| r.mean.roc_auc).fold(0.0, f64::max);
    let soft_auc = soft.mean.roc_auc.unwrap_or(f64::NAN);
    let valid = |r: &heartvote::CvReport| {
        let m = r.mean;
        [m.accuracy, m.precision, m.recall, m.f1, m.roc_auc.unwrap_or(-1.0)]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    };
    let checks = [
        ("logreg acc", within(logreg.accuracy, 0.8185, 0.05), logreg.accuracy),
        ("forest acc", within(forest.accuracy, 0.8117, 0.05), forest.accuracy),
        ("soft acc", within(soft.mean.accuracy, 0.8250, 0.05), soft.mean.accuracy),
        ("soft auc", within(soft_auc, 0.8919, 0.07), soft_auc),
        ("best member auc", soft_auc >= best_member_auc - 0.03, best_member_auc),
        ("knn valid", valid(by_name("KNN")), by_name("KNN").mean.accuracy),
        ("svm valid", valid(by_name("SVM")), by_name("SVM").mean.accuracy),
    ];
    let detail = checks
        .iter()
        .map(|(name, ok, v)| format!("{name} {v:.4}{}", if *ok { "" } else { " (out of band)" }))
        .collect::<Vec<_>>()
        .join(", ");
    if checks.iter().all(|c| c.1) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn metric_oracles() -> Check {
    let mut rng = common::rng(301);
    let mut worst_auc: f64 = 0.0;
    let mut trials = 0;
    while trials < 1000 {
        let n = rng.gen_range(2..80);
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        if !(y.contains(&0) && y.contains(&1)) {
            continue;
        }
        let yhat: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..15)) / 14.0).collect();
        let m = metrics_from_confusion(&confusion(&y, &yhat).map_err(|e| e.to_string())?);
        let tp = (0..n).filter(|&i| y[i] == 1 && yhat[i] == 1).count();
        let pred_pos = yhat.iter().filter(|&&t| t == 1).count();
        let pos = y.iter().filter(|&&t| t == 1).count();
        let correct = (0..n).filter(|&i| y[i] == yhat[i]).count();
        let precision = if pred_pos == 0 { 0.0 } else { tp as f64 / pred_pos as f64 };
        let recall = tp as f64 / pos as f64;
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        if (m.accuracy, m.precision, m.recall, m.f1) != (correct as f64 / n as f64, precision, recall, f1) {
            return Err(format!("metric mismatch at trial {trials}"));
        }
        let auc = roc_curve(&y, &scores).map_err(|e| e.to_string())?.auc;
        worst_auc = worst_auc.max((auc - common::mann_whitney_auc(&y, &scores)).abs());
        trials += 1;
    }
    if worst_auc < 1e-9 {
        Ok(format!("1000 trials exact; worst AUC gap {worst_auc:.1e}"))
    } else {
        Err(format!("worst AUC gap {worst_auc:.3e}"))
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn gradients() -> Check {
    const H: f64 = 1e-5;
    let mut rng = common::rng(401);
    let mut worst_logreg: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.gen_range(1..6);
        let n = rng.gen_range(3..20);
        let (x, y) = common::random_problem(&mut rng, n, d);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let l2 = rng.gen_range(0.0..0.3);
        let g = loss_grad(&w, b, &x, &y, l2);
        for j in 0..d {
            let (mut p, mut m) = (w.clone(), w.clone());
            p[j] += H;
            m[j] -= H;
            let num = (loss_grad(&p, b, &x, &y, l2).loss - loss_grad(&m, b, &x, &y, l2).loss) / (2.0 * H);
            worst_logreg = worst_logreg.max(rel_err(g.grad_w[j], num));
        }
        let num = (loss_grad(&w, b + H, &x, &y, l2).loss - loss_grad(&w, b - H, &x, &y, l2).loss) / (2.0 * H);
        worst_logreg = worst_logreg.max(rel_err(g.grad_b, num));
    }

    let mut worst_mlp: f64 = 0.0;
    let mut done = 0;
    while done < 50 {
        let activation = if done % 2 == 0 { Activation::Logistic } else { Activation::Relu };
        let (d, h, n) = (rng.gen_range(1..5), rng.gen_range(1..6), rng.gen_range(3..12));
        let (x, y) = common::random_problem(&mut rng, n, d);
        let mut model = MlpModel::zeros(d, h, activation);
        model.w1.iter_mut().flatten().for_each(|w| *w = rng.gen_range(-1.0..1.0));
        model.b1.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        model.w2.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
        model.b2 = rng.gen_range(-0.5..0.5);
        if activation == Activation::Relu
            && x.iter().any(|r| model.forward(r).hidden_pre.iter().any(|z| z.abs() < 1e-3))
        {
            continue;
        }
        let (_, g) = model.loss_and_grad(&x, &y);
        let analytic: Vec<f64> = g.w1.iter().flatten().chain(&g.b1).chain(&g.w2).copied().chain([g.b2]).collect();
        for (p, a) in analytic.iter().enumerate() {
            let shifted = |delta: f64| {
                let mut m = model.clone();
                let mut params: Vec<&mut f64> = m.w1.iter_mut().flatten().collect();
                params.extend(m.b1.iter_mut());
                params.extend(m.w2.iter_mut());
                params.push(&mut m.b2);
                *params[p] += delta;
                m.loss_and_grad(&x, &y).0
            };
            worst_mlp = worst_mlp.max(rel_err(*a, (shifted(H) - shifted(-H)) / (2.0 * H)));
        }
        done += 1;
    }
    let detail = format!("worst relative error logreg {worst_logreg:.1e}, mlp {worst_mlp:.1e}");
    if worst_logreg < 1e-4 && worst_mlp < 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn structural() -> Check {
    let mut rng = common::rng(501);
    for i in 0..20u64 {
        let (n, d) = (rng.gen_range(10..80), rng.gen_range(1..7));
        let (x, y) = common::random_grid_problem(&mut rng, n, d);
        let tree = TreeParams::default();
        let forest = ModelSpec::Forest(ForestParams {
            n_trees: 1,
            bootstrap: false,
            features_per_split: FeaturesPerSplit::All,
            tree: tree.clone(),
        });
        let s = RngStream::new(i, "structural");
        let f = fit_model(&forest, &x, &y, &s).map_err(|e| e.to_string())?;
        let t = fit_model(&ModelSpec::Tree(tree), &x, &y, &s).map_err(|e| e.to_string())?;
        if f.predict_proba(&x).unwrap() != t.predict_proba(&x).unwrap() {
            return Err(format!("forest and tree differ on dataset {i}"));
        }
    }
    let (x, y) = common::random_problem(&mut rng, 40, 4);
    for kind in ModelKind::ALL {
        let m = fit_model(&kind.default_spec(), &x, &y, &RngStream::new(7, kind.name())).map_err(|e| e.to_string())?;
        let e = EnsembleModel::new(vec![m.clone()], VotingMode::Soft, None).map_err(|e| e.to_string())?;
        if e.predict_proba(&x).unwrap() != m.predict_proba(&x).unwrap() {
            return Err(format!("single-member ensemble differs from {kind}"));
        }
    }
    for _ in 0..1000 {
        let k = rng.gen_range(1..9);
        let p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..5.0)).collect();
        let (v, _) = soft_vote(&p, &w).map_err(|e| e.to_string())?;
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(lo <= v && v <= hi) {
            return Err(format!("soft vote {v} outside [{lo}, {hi}]"));
        }
    }
    Ok("20 forest/tree datasets, 7 single-member ensembles, 1000 convexity trials".into())
}

fn smo() -> Check {
    let mut rng = common::rng(601);
    let mut worst: f64 = 0.0;
    for trial in 0..40usize {
        let n = rng.gen_range(6..60);
        let d = rng.gen_range(1..5);
        let (x, labels) = common::random_problem(&mut rng, n, d);
        let y: Vec<f64> = labels.iter().map(|&t| if t == 1 { 1.0 } else { -1.0 }).collect();
        let c = [0.1, 1.0, 2.0, 10.0][trial % 4];
        let kernel = if trial % 2 == 0 { Kernel::Linear } else { Kernel::Rbf };
        let s = train_smo(&x, &y, c, kernel, 1.0 / d as f64, 1e-3, 10, &RngStream::new(trial as u64, "smo"))
            .map_err(|e| e.to_string())?;
        if s.alphas.iter().any(|&a| !(0.0..=c).contains(&a)) {
            return Err(format!("alpha outside [0, {c}] in trial {trial}"));
        }
        worst = worst.max(s.alphas.iter().zip(&y).map(|(a, t)| a * t).sum::<f64>().abs());
    }
    if worst >= 1e-8 {
        return Err(format!("|sum alpha*y| reached {worst:.1e}"));
    }
    let x = vec![vec![-3.0], vec![-2.0], vec![-1.0], vec![1.0], vec![2.0], vec![3.0]];
    let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
    let s = train_smo(&x, &y, 100.0, Kernel::Linear, 1.0, 1e-6, 50, &RngStream::new(1, "smo")).map_err(|e| e.to_string())?;
    let w: f64 = s.alphas.iter().zip(&y).zip(&x).map(|((a, t), r)| a * t * r[0]).sum();
    let detail = format!("40 solves, worst |sum alpha*y| {worst:.1e}; 1-D case f(x) = {w:.4} x {:+.4}", s.bias);
    if within(w, 1.0, 0.01) && within(s.bias, 0.0, 0.01) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Check {
    let data = common::heart_csv_path();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let o = Command::new(common::bin())
            .args(["cv", "--format", "headered-csv", "--model", "soft-vote", "--seed", "42", "--data"])
            .arg(&data)
            .arg("--out")
            .arg(dir.path())
            .env("RUST_LOG", "error")
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("cv failed: {}", String::from_utf8_lossy(&o.stderr).trim()));
        }
    }
    for name in ["report.csv", "roc.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok("report.csv and roc.csv byte-identical across two runs".into())
}

fn persistence() -> Check {
    let d = common::heart();
    let scaler = Scaler::fit(d.rows(), &continuous_features()).map_err(|e| e.to_string())?;
    let x = scaler.transform(d.rows());
    let stream = RngStream::new(42, "train");
    let members = ModelKind::ALL
        .iter()
        .map(|k| fit_model(&k.default_spec(), &x, d.targets(), &stream.child(k.name())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut models: Vec<(String, PersistedModel)> = members
        .iter()
        .map(|m| (m.kind().name().to_string(), PersistedModel::Single(m.clone())))
        .collect();
    for mode in [VotingMode::Soft, VotingMode::Hard] {
        let e = EnsembleModel::new(members.clone(), mode, None).map_err(|e| e.to_string())?;
        models.push((format!("{mode}-vote"), PersistedModel::Ensemble(e)));
    }
    for (name, model) in models {
        let file = ModelFile::new(
            model,
            Some(scaler.clone()),
            TrainingProvenance {
                source: "heart.csv".into(),
                data_sha256: String::new(),
                rows: d.len(),
                seed: 42,
            },
        );
        let before = file.predict_proba(d.rows()).map_err(|e| e.to_string())?;
        let back = deserialize_model(&serialize_model(&file)).map_err(|e| e.to_string())?;
        let after = back.predict_proba(d.rows()).map_err(|e| e.to_string())?;
        if before.iter().zip(&after).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("{name} predictions changed after a round trip"));
        }
    }
    Ok(format!("8 selectors bit-identical on {} rows", d.len()))
}

fn partition() -> Check {
    let mut rng = common::rng(901);
    for trial in 0..100u64 {
        let n = rng.gen_range(10..400);
        let rate = rng.gen_range(0.2..0.8);
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(rate))).collect();
        let a = stratified_kfold_indices(&y, 5, trial).map_err(|e| e.to_string())?;
        let mut seen = vec![0u32; n];
        a.folds.iter().flatten().for_each(|&i| seen[i] += 1);
        if seen.iter().any(|&c| c != 1) {
            return Err(format!("label vector {trial}: a row is not in exactly one fold"));
        }
        if a.stratified {
            for class in 0..2u8 {
                let total = y.iter().filter(|&&t| t == class).count() as f64;
                for fold in &a.folds {
                    let c = fold.iter().filter(|&&i| y[i] == class).count() as f64;
                    if (c - total / 5.0).abs() >= 1.0 {
                        return Err(format!("label vector {trial}: class {class} count {c} vs {total}/5"));
                    }
                }
            }
        }
    }
    Ok("100 label vectors partitioned, class counts within 1 of proportional".into())
}

fn main() {
    let criteria: [(&str, Box<dyn Fn() -> Check>); 9] = [
        ("dataset fidelity", Box::new(|| timed(Duration::from_secs(1), dataset_fidelity))),
        ("cross-validated score bands", Box::new(|| timed(Duration::from_secs(60), table_bands))),
        ("metric oracles", Box::new(|| timed(Duration::from_secs(5), metric_oracles))),
        ("gradient checks", Box::new(|| timed(Duration::from_secs(10), gradients))),
        ("structural identities", Box::new(structural)),
        ("SMO feasibility", Box::new(smo)),
        ("determinism", Box::new(determinism)),
        ("persistence", Box::new(persistence)),
        ("fold partition", Box::new(partition)),
    ];
    println!("acceptance data: {}", common::heart_csv_path().display());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
