use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
name = "cli-smoke"

[data]
datasets = ["clogp"]
max_molecules = 100
random_splits = 1
scaffold_split = false

[model]
hidden = 8
fp_length = 256

[training]
epochs = 2

[estimators]
roster = ["ffn-mve", "fp-gp"]
"#;

fn uqmol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqmol"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("UQMOL_WORKERS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_config_prints_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TINY);
    let out = uqmol(&["validate-config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ensemble_size = 16"));
    assert!(text.contains("hidden = 8"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[model]\nhiden = 3\n");
    assert_eq!(uqmol(&["validate-config", &bad]).status.code(), Some(1));
    let roster = write(
        dir.path(),
        "r.toml",
        "[estimators]\nroster = [\"mpnn-magic\"]\n",
    );
    assert_eq!(uqmol(&["validate-config", &roster]).status.code(), Some(1));
    let out = dir.path().join("run").display().to_string();
    assert_eq!(
        uqmol(&["run", "-c", &bad, "-o", &out]).status.code(),
        Some(1)
    );
    assert_eq!(uqmol(&["report", &out]).status.code(), Some(1));
}

#[test]
fn run_report_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TINY);
    let out = dir.path().join("run");
    let o = out.display().to_string();

    let r = uqmol(&["run", "-c", &cfg, "-o", &o, "-w", "1"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(
        String::from_utf8(r.stdout).unwrap().trim(),
        "2 completed, 0 skipped, 0 failed"
    );
    let metrics = out.join("clogp/random-0/ffn-mve/metrics.json");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&metrics).unwrap()).unwrap();
    assert_eq!(report["estimator"], "ffn-mve");

    let again = uqmol(&["run", "-c", &cfg, "-o", &o]);
    assert_eq!(
        String::from_utf8(again.stdout).unwrap().trim(),
        "0 completed, 2 skipped, 0 failed"
    );

    assert!(uqmol(&["report", &o]).status.success());
    assert!(out.join("report/spearman.tsv").exists());

    // One random split gives a single paired observation, too few to rank.
    assert_eq!(uqmol(&["compare", &o, "-m", "nll"]).status.code(), Some(1));
    assert_eq!(
        uqmol(&["compare", &o, "-m", "bogus"]).status.code(),
        Some(1)
    );
}

#[test]
fn failed_cells_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("smiles,target\n");
    for n in 1..=40 {
        csv += &format!("{},1.5\n", "C".repeat(n));
    }
    let data = write(dir.path(), "flat.csv", &csv);
    let cfg = write(
        dir.path(),
        "c.toml",
        "[data]\ndatasets = []\nrandom_splits = 1\nscaffold_split = false\n[estimators]\nroster = [\"fp-gp\"]\n",
    );
    let o = dir.path().join("run").display().to_string();
    let r = uqmol(&["run", "-c", &cfg, "-o", &o, "--dataset", &data]);
    assert_eq!(
        r.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert!(String::from_utf8(r.stderr)
        .unwrap()
        .contains("failed: flat / random-0 / fp-gp"));
    assert!(dir.path().join("run/failures.jsonl").exists());
}
