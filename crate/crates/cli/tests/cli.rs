//! End-to-end tests of the command-line interface, driving the built binary
//! through temp directories.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fuzzyclass")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: status {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn gen_split_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    assert_ok(&run_in(
        d,
        &[
            "gen",
            "--n",
            "200",
            "--features",
            "4",
            "--classes",
            "2",
            "--seed",
            "11",
            "--out",
            "toy.csv",
        ],
    ));
    assert!(d.join("toy.csv.manifest").exists());

    assert_ok(&run_in(
        d,
        &[
            "split",
            "--in",
            "toy.csv",
            "--out-prefix",
            "toy",
            "--seed",
            "3",
        ],
    ));
    for part in ["toy_train.csv", "toy_val.csv", "toy_test.csv"] {
        assert!(d.join(part).exists(), "{part} missing");
    }

    assert_ok(&run_in(
        d,
        &[
            "train",
            "--model",
            "svm",
            "--defuzz",
            "val",
            "--kernel",
            "rbf",
            "--c",
            "10",
            "--in",
            "toy_train.csv",
            "--out",
            "model.kv",
            "--seed",
            "1",
        ],
    ));
    let model = read(d, "model.kv");
    assert!(model.starts_with("format_version = 1\ntype = svm_model"));

    // Separable synthetic data: evaluating on the training file itself
    // reports perfect accuracy.
    let eval = run_in(d, &["eval", "--model", "model.kv", "--in", "toy_train.csv"]);
    assert_ok(&eval);
    let stdout = String::from_utf8_lossy(&eval.stdout);
    assert!(
        stdout.contains("accuracy") && stdout.contains("1.0000"),
        "unexpected eval output:\n{stdout}"
    );
}

#[test]
fn outputs_are_reproducible_from_manifest_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let flags = [
        "gen",
        "--n",
        "60",
        "--features",
        "3",
        "--classes",
        "2",
        "--seed",
        "99",
    ];
    assert_ok(&run_in(d, &[&flags[..], &["--out", "a.csv"]].concat()));
    assert_ok(&run_in(d, &[&flags[..], &["--out", "b.csv"]].concat()));
    assert_eq!(read(d, "a.csv"), read(d, "b.csv"));

    let manifest = read(d, "a.csv.manifest");
    for needle in ["command = gen", "n = 60", "seed = 99"] {
        assert!(manifest.contains(needle), "manifest missing '{needle}'");
    }
}

#[test]
fn mlp_training_writes_loss_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&run_in(
        d,
        &[
            "gen",
            "--n",
            "80",
            "--features",
            "3",
            "--classes",
            "2",
            "--seed",
            "5",
            "--out",
            "toy.csv",
        ],
    ));
    assert_ok(&run_in(
        d,
        &[
            "train",
            "--model",
            "mlp",
            "--in",
            "toy.csv",
            "--out",
            "mlp.kv",
            "--hidden1",
            "8",
            "--hidden2",
            "8",
            "--lr",
            "0.01",
            "--epochs",
            "20",
            "--loss-out",
            "loss.csv",
            "--seed",
            "2",
        ],
    ));
    let loss = read(d, "loss.csv");
    assert!(loss.starts_with("epoch,loss\n"));
    assert_eq!(loss.lines().count(), 21);
    assert_ok(&run_in(
        d,
        &["eval", "--model", "mlp.kv", "--in", "toy.csv"],
    ));
}

#[test]
fn interval_convert_and_oversample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("iv.csv"),
        "w:interval,label\n0,2,0\n1,3,0\n5,7,1\n6,8,1\n7,9,1\n",
    )
    .unwrap();

    assert_ok(&run_in(
        d,
        &[
            "convert", "--in", "iv.csv", "--beta", "0.5", "--out", "tri.csv",
        ],
    ));
    let converted = read(d, "tri.csv");
    assert!(converted.starts_with("w:tri,label\n0,1,2,0\n"));

    assert_ok(&run_in(
        d,
        &[
            "oversample",
            "--in",
            "iv.csv",
            "--target",
            "3",
            "--k-neighbors",
            "1",
            "--seed",
            "4",
            "--out",
            "grown.csv",
        ],
    ));
    let grown = read(d, "grown.csv");
    assert_eq!(grown.lines().count(), 7, "2+1 and 3 instances plus header");
}

#[test]
fn sweep_writes_rows_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&run_in(
        d,
        &[
            "sweep",
            "--param",
            "defuzz",
            "--values",
            "mom,val",
            "--repeats",
            "2",
            "--n",
            "100",
            "--features",
            "3",
            "--classes",
            "2",
            "--model",
            "svm",
            "--kernel",
            "linear",
            "--c",
            "1",
            "--seed",
            "8",
            "--out",
            "sweep.csv",
        ],
    ));
    let rows = read(d, "sweep.csv");
    assert!(rows.starts_with("param,repeat,accuracy,balanced_accuracy,auc\n"));
    assert_eq!(rows.lines().count(), 5, "header + 2 methods x 2 repeats");
    let summary = read(d, "sweep.summary.csv");
    assert!(summary.contains("mom,") && summary.contains("val,"));
    assert!(d.join("sweep.csv.manifest").exists());

    // Same seeds for both files: identical samples, p close to 1.
    let compare = run_in(
        d,
        &[
            "compare",
            "--a",
            "sweep.csv",
            "--b",
            "sweep.csv",
            "--column",
            "accuracy",
        ],
    );
    assert_ok(&compare);
    let stdout = String::from_utf8_lossy(&compare.stdout);
    assert!(stdout.contains("two-sided p ="), "{stdout}");
}

#[test]
fn rademacher_reports_bound() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_in(
        d,
        &[
            "rademacher",
            "--n",
            "100",
            "--features",
            "4",
            "--classes",
            "2",
            "--lambda",
            "1.5",
            "--draws",
            "50",
            "--kernel",
            "rbf",
            "--seed",
            "6",
            "--out",
            "rad.kv",
        ],
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("estimate within bound: true"), "{stdout}");
    let report = read(d, "rad.kv");
    assert!(report.contains("type = rademacher_report"));
}

#[test]
fn exit_codes_distinguish_validation_from_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // Unknown flag: validation error, exit 1.
    let out = run_in(d, &["gen", "--n", "10", "--out", "x.csv", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // Bad domain value: validation error, exit 1.
    std::fs::write(d.join("iv.csv"), "w:interval,label\n0,2,0\n").unwrap();
    let out = run_in(
        d,
        &[
            "convert", "--in", "iv.csv", "--beta", "1.5", "--out", "y.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    // Unknown defuzzifier name: validation error, exit 1.
    let out = run_in(
        d,
        &[
            "train", "--model", "svm", "--defuzz", "median", "--in", "iv.csv", "--out", "m.kv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    // Missing input file: runtime error, exit 2.
    let out = run_in(
        d,
        &[
            "convert",
            "--in",
            "absent.csv",
            "--beta",
            "0.5",
            "--out",
            "z.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    // Malformed CSV: runtime error with position, exit 2.
    std::fs::write(d.join("bad.csv"), "w:tri,label\n3,2,1,0\n").unwrap();
    let out = run_in(
        d,
        &[
            "train", "--model", "svm", "--in", "bad.csv", "--out", "m.kv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

fn write_results(path: &PathBuf, values: &[f64]) {
    let mut csv = String::from("param,repeat,accuracy,balanced_accuracy,auc\n");
    for (i, v) in values.iter().enumerate() {
        csv.push_str(&format!("x,{i},{v},{v},NaN\n"));
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn compare_detects_separated_samples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_results(
        &d.join("low.csv"),
        &[0.61, 0.62, 0.63, 0.60, 0.64, 0.62, 0.61, 0.63],
    );
    write_results(
        &d.join("high.csv"),
        &[0.91, 0.92, 0.93, 0.90, 0.94, 0.92, 0.91, 0.93],
    );
    let out = run_in(
        d,
        &[
            "compare", "--a", "low.csv", "--b", "high.csv", "--column", "accuracy",
        ],
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let p: f64 = stdout.split("p = ").nth(1).unwrap().trim().parse().unwrap();
    assert!(p < 0.05, "expected a significant difference, p = {p}");

    // NaN auc column is skipped and reported as empty.
    let out = run_in(
        d,
        &[
            "compare", "--a", "low.csv", "--b", "high.csv", "--column", "auc",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}
