#![allow(dead_code)]

use std::path::PathBuf;

use heartvote::dataset::{load_path, ParseOptions, WireFormat};
use heartvote::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// The headered table; `HEART_CSV` points at a different copy.
pub fn heart_csv_path() -> PathBuf {
    std::env::var_os("HEART_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| data_dir().join("heart.csv"))
}

pub fn heart() -> Dataset {
    load_path(&heart_csv_path(), ParseOptions::new(WireFormat::HeaderedCsv)).expect("bundled table loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real matrix with both labels present.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let mut y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    y[0] = 0;
    y[1] = 1;
    (x, y)
}

/// Integer-valued features so that ties are common.
pub fn random_grid_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| f64::from(rng.gen_range(0..5))).collect())
        .collect();
    let mut y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    y[0] = 0;
    y[1] = 1;
    (x, y)
}

/// Fraction of positive/negative pairs ranked correctly, ties counting half.
pub fn mann_whitney_auc(y: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_heartvote")
}
