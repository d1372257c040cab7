use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nnbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnbounds"))
        .args(args)
        .env_remove("NNBOUNDS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = nnbounds(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn count_prints_bare_number() {
    let out = nnbounds(&["count", "--d", "1", "--W", "2", "--l", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "7\n");
    let v = json(&["count", "--d", "1", "--W", "2", "--l", "1", "--format", "json"]);
    assert_eq!(v["n"], 7);
}

#[test]
fn lip_bound_reports_recursion_and_closed_form() {
    let v = json(&[
        "lip-bound",
        "--d",
        "1",
        "--W",
        "2",
        "--l",
        "1",
        "--act",
        "relu",
        "--w",
        "1",
    ]);
    assert_eq!(v["C"], serde_json::json!([2.0, 21.0]));
    assert_eq!(v["closed_form"], 36.0);
    for key in [
        "L",
        "log2_C",
        "log2_closed_form",
        "tilde_c",
        "layer_bounds",
        "phi",
        "n",
        "arch",
        "act",
        "w",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn custom_activation_only_for_formulas() {
    let v = json(&[
        "lip-bound",
        "--W",
        "2",
        "--l",
        "1",
        "--act",
        "custom",
        "--lip",
        "3",
        "--at-zero",
        "5",
    ]);
    assert_eq!(v["L"], 5.0);
    let out = nnbounds(&[
        "lip-verify",
        "--W",
        "2",
        "--l",
        "1",
        "--act",
        "custom",
        "--lip",
        "3",
        "--pairs",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = nnbounds(&[
        "lip-bound",
        "--W",
        "2",
        "--l",
        "1",
        "--act",
        "relu",
        "--lip",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let base = [
        "lip-verify",
        "--d",
        "1",
        "--W",
        "2",
        "--l",
        "2",
        "--pairs",
        "500",
        "--grid",
        "128",
    ];
    let out = nnbounds(&base);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["margin"].as_f64().unwrap() >= 1.0);

    let mut corrupted = base.to_vec();
    corrupted.extend(["--claim", "1e-6"]);
    let out = nnbounds(&corrupted);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["witness"]["y"].is_object() || v["witness"]["y"].is_array());
}

#[test]
fn invalid_input_and_usage_exit_two() {
    for args in [
        vec!["count", "--W", "2", "--l", "1", "--bogus"],
        vec!["frobnicate"],
        vec!["lip-bound", "--W", "1", "--l", "1"],
        vec!["lip-verify", "--W", "2", "--l", "1", "--pairs", "0"],
        vec![
            "entropy",
            "--ball",
            "4,1,4,0.5",
            "--method",
            "exact",
            "--n-max",
            "0",
        ],
        vec!["super", "--n-exp-min", "8", "--n-exp-max", "9"],
        vec![
            "approx",
            "--W",
            "2",
            "--l",
            "1",
            "--target",
            "/nonexistent/target.csv",
        ],
    ] {
        let out = nnbounds(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn every_csv_has_a_header() {
    let cases: [(&[&str], &str); 8] = [
        (&["count", "--W", "2", "--l", "1"], "d,W,l,n"),
        (&["lip-bound", "--W", "2", "--l", "2"], "j,C,log2_C,layer_bound"),
        (
            &[
                "lip-verify",
                "--W",
                "2",
                "--l",
                "1",
                "--pairs",
                "50",
                "--grid",
                "32",
            ],
            "pass,checked_constant,max_ratio,margin,valid_pairs,skipped_pairs,witness_index",
        ),
        (
            &["entropy", "--values", "0,0.5,1", "--n-max", "2"],
            "n,radius,mode,centers",
        ),
        (
            &["bound", "--W", "8", "--l", "3", "--n", "1024,4096"],
            "n,l,W,w,value,regime,formula_id",
        ),
        (
            &["tradeoff", "--budget", "65536"],
            "n,l,W,w,value,regime,formula_id",
        ),
        (
            &["super", "--n-exp-min", "8", "--n-exp-max", "12"],
            "n,l,W,w,bound,entropy_rate,ratio",
        ),
        (
            &[
                "approx",
                "--W",
                "2",
                "--l",
                "1",
                "--target-fn",
                "sine",
                "--grid",
                "32",
                "--samples",
                "20",
                "--refine",
                "2",
            ],
            "W,error,sampled_error,evaluations",
        ),
    ];
    for (args, expected) in cases {
        let mut args = args.to_vec();
        args.extend(["--format", "csv"]);
        let out = nnbounds(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = stdout(&out);
        assert_eq!(text.lines().next(), Some(expected), "{args:?}");
        assert!(text.lines().count() >= 2);
    }
}

#[test]
fn bound_rows_are_strictly_decreasing_in_depth() {
    let out = nnbounds(&["tradeoff", "--budget", "65536", "--depths", "2,4,8,16"]);
    let values: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4);
    assert!(values.windows(2).all(|p| p[1] < p[0]));
}

#[test]
fn super_classifies_both_regimes() {
    let shallow = json(&["super", "--W-rule", "1,1", "--l-rule", "1,0"]);
    assert_eq!(shallow["report"]["class"], "polylog");
    let deep = json(&["super", "--W-rule", "4,0", "--l-rule", "0.0625,1"]);
    assert_eq!(deep["report"]["class"], "polynomial");
}

#[test]
fn entropy_sources() {
    let v = json(&["entropy", "--values", "0,0.5,1", "--n-max", "2"]);
    let radii: Vec<f64> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["radius"].as_f64().unwrap())
        .collect();
    assert_eq!(radii, [0.5, 0.5, 0.0]);
    let v = json(&["entropy", "--interval", "0,1", "--n-max", "1"]);
    assert_eq!(v["results"][1]["radius"], 0.25);
    let v = json(&["entropy", "--ball", "1,1,2,1", "--n-max", "0"]);
    assert_eq!(v["points"], 7);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.csv");
    fs::write(&path, "x,y\n0,0\n3,4\n").unwrap();
    let v = json(&[
        "entropy",
        "--cloud",
        path.to_str().unwrap(),
        "--metric",
        "euclidean",
        "--n-max",
        "0",
    ]);
    assert_eq!(v["results"][0]["radius"], 5.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# architecture\nd = 2\nW = 4\nl = 3\n").unwrap();
    let conf = conf.to_str().unwrap();
    let v = json(&["count", "--config", conf, "--format", "json"]);
    assert_eq!(
        (v["d"].as_u64(), v["W"].as_u64(), v["l"].as_u64()),
        (Some(2), Some(4), Some(3))
    );
    let v = json(&["count", "--config", conf, "--l", "1", "--format", "json"]);
    assert_eq!(v["l"], 1);
    assert_eq!(v["n"], 4 * 3 + 5);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_nnbounds"))
        .args(["count", "--W", "2", "--l", "1", "--out", "nested/count.txt"])
        .env("NNBOUNDS_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("nested/count.txt")).unwrap(),
        "7\n"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "lip-verify",
            "--d",
            "2",
            "--W",
            "4",
            "--l",
            "2",
            "--pairs",
            "300",
            "--grid",
            "16",
            "--seed",
            "9",
        ],
        &[
            "approx",
            "--W",
            "4",
            "--l",
            "2",
            "--target-fn",
            "sine",
            "--grid",
            "64",
            "--samples",
            "200",
            "--refine",
            "20",
            "--refine-starts",
            "3",
            "--seed",
            "4",
            "--widths",
            "4,6",
        ],
        &["entropy", "--ball", "1,1,5,0.5", "--n-max", "3"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (j, threads) in ["1", "3"].iter().enumerate() {
            let path = dir.path().join(format!("{i}-{j}.json"));
            let mut full = args.to_vec();
            full.extend(["--threads", threads, "--out", path.to_str().unwrap()]);
            let out = nnbounds(&full);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(fs::read(&path).unwrap());
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}
