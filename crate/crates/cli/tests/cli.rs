//! End-to-end checks of the `crowdarg` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crowdarg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdarg")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) {
    let text = format!(
        "input = \"campaign\"\noutput = \"out\"\n\n[simulate]\ndocuments = 12\nannotators = 10\nspammer_fraction = 0.2\nseed = 11\n{extra}"
    );
    fs::write(dir.join("crowdarg.toml"), text).expect("config written");
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.expect("readable entry"))
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).expect("under root").to_string_lossy().into_owned();
            (rel, fs::read(e.path()).expect("readable artifact"))
        })
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_reports_injected_violations_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "violation_rate = 1.0\n");
    assert!(crowdarg(tmp.path(), &["--config", "crowdarg.toml", "simulate"]).status.success());
    let o = crowdarg(tmp.path(), &["--config", "crowdarg.toml", "validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/validation/report.json")).unwrap()).unwrap();
    assert!(report["error_count"].as_u64().unwrap() > 0);
    assert!(!report["report"]["removed_sets"].as_array().unwrap().is_empty());
}

#[test]
fn stage_without_prerequisites_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "");
    assert!(crowdarg(tmp.path(), &["--config", "crowdarg.toml", "simulate"]).status.success());
    for stage in ["validate", "agreement"] {
        assert!(crowdarg(tmp.path(), &["--config", "crowdarg.toml", stage]).status.success());
    }
    let o = crowdarg(tmp.path(), &["--config", "crowdarg.toml", "build"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("filter"), "{}", stderr(&o));
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "threads = \"many\"\n").unwrap();
    let o = crowdarg(tmp.path(), &["--config", "bad.toml", "validate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    write_config(tmp.path(), "");
    let o = crowdarg(tmp.path(), &["--config", "crowdarg.toml", "--easy-threshold", "1.5", "validate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = crowdarg(tmp.path(), &["--config", "missing.toml", "validate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn config_command_round_trips_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let o = crowdarg(tmp.path(), &["--sentence-threshold", "0.8", "--threads", "3", "config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    fs::write(tmp.path().join("printed.toml"), &text).unwrap();
    let again = crowdarg(tmp.path(), &["--config", "printed.toml", "config"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    assert!(text.contains("sentence_threshold = 0.8"), "{text}");
    assert!(text.contains("threads = 3"), "{text}");
}

#[test]
fn simulate_then_run_is_reproducible() {
    let mut trees = Vec::new();
    for threads in ["1", "4"] {
        let tmp = tempfile::tempdir().unwrap();
        write_config(tmp.path(), "");
        assert!(crowdarg(tmp.path(), &["--config", "crowdarg.toml", "simulate"]).status.success());
        let o = crowdarg(tmp.path(), &["--config", "crowdarg.toml", "--threads", threads, "run"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report = fs::read_to_string(tmp.path().join("out/report.txt")).unwrap();
        assert!(!report.is_empty());
        trees.push((tree(&tmp.path().join("campaign")), tree(&tmp.path().join("out"))));
    }
    assert!(trees[0] == trees[1], "artifacts differ between runs");
}

#[test]
fn simulate_refuses_a_populated_campaign_directory() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "");
    assert!(crowdarg(tmp.path(), &["--config", "crowdarg.toml", "simulate"]).status.success());
    let o = crowdarg(tmp.path(), &["--config", "crowdarg.toml", "simulate"]);
    assert_ne!(o.status.code(), Some(0));
}
