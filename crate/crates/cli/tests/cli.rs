use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn treeaut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeaut"))
        .args(args)
        .env_remove("TREEAUT_K")
        .env_remove("TREEAUT_SEED")
        .env_remove("TREEAUT_FORMAT")
        .output()
        .expect("spawn treeaut")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?} stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn classify_examples() {
    let out = treeaut(&["classify", "lm:01"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["kind"], "hyperbolic");
    assert_eq!(v["l"], 2);

    let v = json(&treeaut(&["classify", "lm:0"]));
    assert_eq!(v["kind"], "inversion");

    let v = json(&treeaut(&["classify", "haar:7"]));
    assert_eq!(v["kind"], "elliptic");
    assert_eq!(v["witness"], "");

    let v = json(&treeaut(&["classify", "haar:7 * lm:0101 * haar:7^-1"]));
    assert_eq!(v["l"], 4);
}

#[test]
fn classify_honors_k_and_format() {
    let out = treeaut(&["classify", "lm:3", "--k", "4", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "kind,l,anchor,witness,edge\ninversion,0,,,-3\n");
    // The letter 3 does not exist for k = 3.
    assert_eq!(code(&treeaut(&["classify", "lm:3"])), 64);
}

#[test]
fn portrait_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.json");
    fs::write(&path, r#"{"k":3,"base_image":"","depth":1,"locals":{"":[1,0,2]}}"#).unwrap();
    let expr = format!("portrait:@{}", path.display());
    let v = json(&treeaut(&["classify", &expr]));
    assert_eq!(v["kind"], "elliptic");
    let v = json(&treeaut(&["classify", &format!("{expr} * lm:0")]));
    assert_eq!(v["kind"], "hyperbolic");
    assert_eq!(v["l"], 1);

    fs::write(&path, r#"{"k":3,"base_image":"","depth":1,"locals":{"":[1,1,2]}}"#).unwrap();
    assert_eq!(code(&treeaut(&["classify", &expr])), 64);
}

#[test]
fn trichotomy_examples() {
    let out = treeaut(&["trichotomy", "lm:01", "lm:21"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "DISCRETE_FREE");

    let out = treeaut(&["trichotomy", "haar:1", "haar:2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "COMPACT");

    let out = treeaut(&["trichotomy", "haar:1", "lm:01", "--depth", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "DENSE_TO_DEPTH");
    assert_eq!(v["n"], 2);
}

#[test]
fn undecided_exits_with_two() {
    // One word of budget cannot reach the full stabilizer image.
    let out = treeaut(&["trichotomy", "haar:1", "lm:01", "--word-budget", "1", "--node-cap", "2"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["verdict"], "UNDECIDED");
}

#[test]
fn usage_errors_exit_with_64() {
    assert_eq!(code(&treeaut(&["classify", "lm:0 *"])), 64);
    assert_eq!(code(&treeaut(&["classify"])), 64);
    assert_eq!(code(&treeaut(&["no-such-command"])), 64);
    assert_eq!(code(&treeaut(&["experiment", "nope"])), 64);
    assert_eq!(code(&treeaut(&["--k", "2", "classify", "id"])), 64);
    assert_eq!(code(&treeaut(&["--help"])), 0);
}

#[test]
fn environment_overrides() {
    let run = |vars: &[(&str, &str)], args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_treeaut"));
        cmd.args(args);
        for (k, v) in vars {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    };
    let out = run(&[("TREEAUT_FORMAT", "csv")], &["classify", "lm:01"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("kind,l,"));
    let out = run(&[("TREEAUT_K", "4")], &["classify", "lm:3"]);
    assert_eq!(code(&out), 0);
    let a = run(&[("TREEAUT_SEED", "5")], &["classify", "haar: * lm:01 * haar:^-1"]);
    let b = treeaut(&["--seed", "5", "classify", "haar: * lm:01 * haar:^-1"]);
    assert_eq!(a.stdout, b.stdout);
}

fn experiment(dir: &Path, extra: &[&str]) -> Output {
    let out_dir = dir.to_str().unwrap();
    let mut args = vec!["experiment", "nielsen_measure", "--samples", "20000", "--out", out_dir];
    args.extend_from_slice(extra);
    treeaut(&args)
}

#[test]
fn experiments_write_reports_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let first = experiment(dir.path(), &[]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let summary = json(&first);
    assert_eq!(summary["name"], "nielsen_measure");
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["config"]["seed"], 42);
    let csv = fs::read(dir.path().join("nielsen_measure.csv")).unwrap();
    let report = fs::read(dir.path().join("nielsen_measure.json")).unwrap();

    let second = experiment(dir.path(), &["--jobs", "1"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv, fs::read(dir.path().join("nielsen_measure.csv")).unwrap());
    assert_eq!(report, fs::read(dir.path().join("nielsen_measure.json")).unwrap());

    let as_csv = experiment(dir.path(), &["--format", "csv"]);
    assert_eq!(as_csv.stdout, csv);

    let reseeded = experiment(dir.path(), &["--seed", "7"]);
    assert_eq!(json(&reseeded)["config"]["seed"], 7);
    assert_ne!(csv, fs::read(dir.path().join("nielsen_measure.csv")).unwrap());
}
