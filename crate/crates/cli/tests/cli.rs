use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcdt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcdt")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = dcdt(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn small_cohort(dir: &Path) {
    ok(dir, &["generate", "--seed", "3", "--hc", "30", "--mid", "20", "--vcd", "20", "--pd", "20", "--out", "data"]);
}

#[test]
fn generate_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    small_cohort(d.path());
    let first = fs::read(d.path().join("data/strokes.txt")).unwrap();
    ok(d.path(), &["generate", "--seed", "3", "--hc", "30", "--mid", "20", "--vcd", "20", "--pd", "20", "--out", "again"]);
    assert_eq!(first, fs::read(d.path().join("again/strokes.txt")).unwrap());
    let labels = fs::read_to_string(d.path().join("data/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 91);
}

#[test]
fn end_to_end_on_a_small_cohort() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    small_cohort(p);
    ok(p, &["extract", "--strokes", "data/strokes.txt", "--labels", "data/labels.csv", "--out", "all.csv"]);
    ok(p, &["extract", "--strokes", "data/strokes.txt", "--labels", "data/labels.csv", "--binarize", "--out", "bin.csv"]);
    ok(p, &["rouleau", "fit", "--input", "all.csv", "--task", "pd", "--out", "pd.params"]);
    let scores = ok(p, &["rouleau", "score", "--input", "all.csv", "--params", "pd.params"]);
    assert_eq!(scores.lines().count(), 91);
    ok(p, &["slim", "train", "--input", "bin.csv", "--binary-input", "--task", "mid", "--node-budget", "50", "--out", "mid.slim"]);
    ok(p, &["render", "--model", "mid.slim", "--out", "mid.sheet.txt"]);
    let via_model = ok(p, &["slim", "predict", "--model", "mid.slim", "--input", "bin.csv", "--binary-input"]);
    let via_sheet = ok(p, &["slim", "predict", "--model", "mid.sheet.txt", "--input", "bin.csv", "--binary-input"]);
    assert_eq!(via_model, via_sheet);
    assert!(via_model.starts_with("subject_id,score,impaired"));
    let report = ok(p, &["evaluate", "--task", "pd", "--method", "rouleau", "--folds", "3", "--inner-folds", "2"]);
    assert!(report.contains("PDvsHC") && report.contains("mean"), "{report}");
    assert!(p.join("reports/PDvsHC_rouleau.csv").is_file());
}

#[test]
fn renders_the_published_sheet() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../ref");
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["render", "--model", root.join("table3.slim").to_str().unwrap()]);
    assert_eq!(out, fs::read_to_string(root.join("table3_sheet.txt")).unwrap());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(dcdt(p, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(dcdt(p, &["slim", "train", "--input", "x.csv", "--task", "nope"]).status.code(), Some(2));
    assert_eq!(dcdt(p, &["render", "--model", "absent.slim"]).status.code(), Some(1));
    fs::write(p.join("bad.slim"), "not a model\n").unwrap();
    let o = dcdt(p, &["render", "--model", "bad.slim"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    fs::write(p.join("cfg.kv"), "no_such_flag = 1\n").unwrap();
    assert_eq!(dcdt(p, &["--config", "cfg.kv", "repro"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_flags() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("gen.kv"), "seed = 5\nhc = 4\nmid = 3\nvcd = 0\npd = 0\nout = cfgdata\n").unwrap();
    ok(p, &["--config", "gen.kv", "generate"]);
    assert_eq!(fs::read_to_string(p.join("cfgdata/labels.csv")).unwrap().lines().count(), 8);
    // Flags on the command line win over the file.
    ok(p, &["--config", "gen.kv", "generate", "--hc", "2"]);
    assert_eq!(fs::read_to_string(p.join("cfgdata/labels.csv")).unwrap().lines().count(), 6);
}

#[test]
fn help_lists_subcommands() {
    let d = tempfile::tempdir().unwrap();
    let h = ok(d.path(), &["--help"]);
    for s in ["generate", "extract", "rouleau", "slim", "evaluate", "render", "repro"] {
        assert!(h.contains(s), "{s}");
    }
    let h = ok(d.path(), &["slim", "train", "--help"]);
    for f in ["--c-minus", "--c0", "--c1", "--coeff-bound", "--max-features", "--node-budget"] {
        assert!(h.contains(f), "{f}");
    }
}
