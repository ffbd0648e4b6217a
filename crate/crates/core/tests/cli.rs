use std::path::{Path, PathBuf};

use pairclass::cli::main_with_args;
use pairclass::features::FeatureFile;

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/samples")
}

fn run(args: &[&str]) -> i32 {
    let mut all = vec!["pairclass"];
    all.extend_from_slice(args);
    main_with_args(all)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn tiny_index(dir: &Path) -> PathBuf {
    let out = dir.join("tiny.idx");
    assert_eq!(run(&["index", &s(&samples().join("tiny-corpus")), "--out", &s(&out)]), 0);
    out
}

#[test]
fn run_without_index_is_a_usage_error() {
    let data = samples().join("toefl.txt");
    assert_eq!(run(&["run", "--task", "toefl", "--data", &s(&data)]), 2);
}

#[test]
fn unknown_task_and_bad_files_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let index = tiny_index(dir.path());
    let toefl = samples().join("toefl.txt");
    assert_eq!(run(&["run", "--task", "gre", "--data", &s(&toefl), "--index", &s(&index)]), 5);
    let missing = dir.path().join("missing.txt");
    assert_eq!(run(&["run", "--task", "toefl", "--data", &s(&missing), "--index", &s(&index)]), 3);
    let broken = dir.path().join("broken.idx");
    std::fs::write(&broken, b"not an index").unwrap();
    assert_eq!(run(&["run", "--task", "toefl", "--data", &s(&toefl), "--index", &s(&broken)]), 4);
}

#[test]
fn seeded_runs_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let index = tiny_index(dir.path());
    let toefl = samples().join("toefl.txt");
    let reports: Vec<Vec<u8>> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let report = dir.path().join(name);
            let code = run(&[
                "run", "--task", "toefl", "--data", &s(&toefl), "--index", &s(&index), "--seed", "7", "--report",
                &s(&report),
            ]);
            assert_eq!(code, 0);
            std::fs::read(report).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    let json: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(json["task"], "toefl");
    assert_eq!(json["items"].as_array().unwrap().len(), 8);
    assert_eq!(json["config"]["seed"], 7);
}

#[test]
fn extract_train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let index = tiny_index(dir.path());
    let pairs = dir.path().join("pairs.txt");
    std::fs::write(
        &pairs,
        "mason:stone\tmaterial\ncarpenter:wood\tmaterial\npotter:clay\tmaterial\n\
         bottle:wine\tcontent\njar:honey\tcontent\nbasket:fruit\tcontent\n",
    )
    .unwrap();
    let features = dir.path().join("features.tsv");
    assert_eq!(
        run(&["extract", "--pairs", &s(&pairs), "--index", &s(&index), "--k", "3", "--out", &s(&features)]),
        0
    );
    let file = FeatureFile::load(&features).unwrap();
    assert_eq!(file.rows.len(), 6);
    assert_eq!(file.spec.k, 3);
    assert_eq!(file.spec.n, 6);
    assert!(file.spec.len() <= 18);

    let model = dir.path().join("model.txt");
    assert_eq!(run(&["train", "--features", &s(&features), "--out", &s(&model)]), 0);
    assert_eq!(run(&["predict", "--model", &s(&model), "--features", &s(&features)]), 0);
}

#[test]
fn config_file_values_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let index = tiny_index(dir.path());
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "gamma = -1\n").unwrap();
    let toefl = samples().join("toefl.txt");
    let code = run(&["--config", &s(&cfg), "run", "--task", "toefl", "--data", &s(&toefl), "--index", &s(&index)]);
    assert_eq!(code, 5);
}
