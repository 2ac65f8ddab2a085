use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ogaprox_cli::data::{load_dataset, split_indices, zscore, DatasetName, Grouping};
use ogaprox_cli::HarnessError;
use proptest::prelude::*;
use rand::SeedableRng;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn ogaprox(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ogaprox"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("OGAPROX_DATA", data_dir())
        .output()
        .expect("binary runs")
}

#[test]
fn real_datasets_load() {
    for (name, rows, features) in [
        (DatasetName::BreastCancer, 683, 9),
        (DatasetName::HeartDisease, 270, 13),
        (DatasetName::Ionosphere, 351, 33),
        (DatasetName::Sonar, 208, 60),
    ] {
        let ds = load_dataset(name, &data_dir().join(name.file_name())).unwrap();
        assert_eq!(ds.len(), rows, "{name}");
        assert_eq!(ds.features.ncols() + ds.dropped_columns.len(), features, "{name}");
        assert!(ds.labels.iter().all(|&l| l == 1.0 || l == -1.0));
        assert!(ds.labels.iter().any(|&l| l == 1.0) && ds.labels.iter().any(|&l| l == -1.0));
        for c in ds.features.column_iter() {
            assert!(c.mean().abs() < 1e-10);
        }
    }
}

#[test]
fn heart_groups_cover_every_sample() {
    let ds = load_dataset(DatasetName::HeartDisease, &data_dir().join("heart.dat")).unwrap();
    let sex = ds.groups(Grouping::Sex).unwrap();
    let age = ds.groups(Grouping::Age).unwrap();
    assert_eq!(sex.iter().filter(|&&g| g == 0).count(), 87);
    assert_eq!(sex.iter().filter(|&&g| g == 1).count(), 183);
    for g in 0..3 {
        assert!(age.iter().any(|&a| a == g));
    }
    let sonar = load_dataset(DatasetName::Sonar, &data_dir().join("sonar.all-data")).unwrap();
    assert!(sonar.groups(Grouping::Sex).is_err());
}

#[test]
fn malformed_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sonar.all-data");
    std::fs::write(&path, "0.1,0.2,M\n0.3,zz,R\n").unwrap();
    match load_dataset(DatasetName::Sonar, &path) {
        Err(HarnessError::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "0.1,0.2,M\n0.3,?,R\n0.5,0.1,X\n").unwrap();
    assert!(matches!(load_dataset(DatasetName::Sonar, &path), Err(HarnessError::Parse { row: 3, .. })));
    std::fs::write(&path, "0.1,0.2,M\n0.3,?,R\n0.5,0.1,R\n").unwrap();
    let ds = load_dataset(DatasetName::Sonar, &path).unwrap();
    assert_eq!((ds.len(), ds.dropped_rows), (2, 1));
}

#[test]
fn synthetic_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ogaprox(&["synthetic", "--set", "d=10", "--set", "n=8", "--set", "iterations=50", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary.is_object());

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("synthetic.json")).unwrap()).unwrap();
    assert_eq!(doc["seed"], 3);
    assert!(doc["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(doc["config"]["iterations"], 50);

    let csv_path = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>().join(","), ogaprox_cli::report::CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 50);
    let gap: f64 = rows[49][1].parse().unwrap();
    assert!(gap >= 0.0 && gap.is_finite());
}

#[test]
fn same_seed_same_bytes() {
    let args = ["toy", "--set", "d=12", "--set", "n=15", "--set", "iterations=300", "--seed", "9"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(ogaprox(&args, a.path()).status.success());
    assert!(ogaprox(&args, b.path()).status.success());
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 3);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn mksvm_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["mksvm", "--set", "dataset=heart", "--set", "runs=2", "--set", "checkpoints=20,40"];
    let out = ogaprox(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tsa = summary["tsa_trimmed_mean"].as_array().unwrap();
    assert_eq!(tsa.len(), 2);
    let last = tsa[1]["tsa"].as_f64().unwrap();
    assert!((0.0..=100.0).contains(&last));
}

#[test]
fn config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toy.cfg");
    std::fs::write(&cfg, "# small\nd = 6\nn = 9\niterations = 40\n").unwrap();
    let ok = ogaprox(&["toy", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    let unknown_key = ogaprox(&["toy", "--set", "dd=3"], dir.path());
    assert_eq!(unknown_key.status.code(), Some(2));
    let bad_value = ogaprox(&["synthetic", "--set", "mu=-1"], dir.path());
    assert_eq!(bad_value.status.code(), Some(2));
    let bad_line = ogaprox(&["toy", "--set", "nonsense"], dir.path());
    assert_eq!(bad_line.status.code(), Some(2));
    let unknown_dataset = ogaprox(&["mksvm", "--set", "dataset=iris"], dir.path());
    assert_eq!(unknown_dataset.status.code(), Some(2));

    let missing = ogaprox(&["mksvm", "--set", "dataset=sonar", "--set", "path=/nonexistent/sonar"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/sonar"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_partitions_indices(n in 2usize..400, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let (train, test) = split_indices(n, frac, &mut rng);
        prop_assert!(!train.is_empty() && !test.is_empty());
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn zscore_standardizes(rows in 2usize..30, cols in 1usize..6, vals in prop::collection::vec(-1e3f64..1e3, 180)) {
        let raw = nalgebra::DMatrix::from_fn(rows, cols, |i, j| vals[i * 6 + j]);
        let (z, dropped) = zscore(&raw);
        prop_assert_eq!(z.ncols() + dropped.len(), cols);
        for c in z.column_iter() {
            prop_assert!(c.mean().abs() < 1e-9);
            prop_assert!((c.variance() - 1.0).abs() < 1e-9);
        }
    }
}
