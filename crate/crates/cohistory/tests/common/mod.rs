//! Helpers for tests that drive the `pipeline` binary on the bundled fixture.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic200")
}

pub fn fixture_config() -> PathBuf {
    fixture_dir().join("pipeline.toml")
}

/// Runs the binary with its output redirected into `out`.
pub fn pipeline(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pipeline"))
        .args(args)
        .env(cohistory::config::OUTPUT_DIR_ENV, out)
        .output()
        .expect("spawn pipeline")
}

pub fn run_ok(out: &Path, args: &[&str]) -> String {
    let o = pipeline(out, args);
    assert!(
        o.status.success(),
        "pipeline {args:?} failed: {}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

pub fn run_fixture(out: &Path, extra: &[&str]) {
    let config = fixture_config();
    let mut args = vec!["all", "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run_ok(out, &args);
}

/// Copies the fixture config into `dir` with absolute input paths, so it can
/// be edited without touching the bundled one.
pub fn editable_config(dir: &Path, edit: impl FnOnce(String) -> String) -> PathBuf {
    let text = fs::read_to_string(fixture_config()).unwrap();
    let inputs = fixture_dir().canonicalize().unwrap();
    let text = text
        .replace("\"entities.json\"", &format!("{:?}", inputs.join("entities.json")))
        .replace("\"pagelinks.nt\"", &format!("{:?}", inputs.join("pagelinks.nt")));
    let path = dir.join("pipeline.toml");
    fs::write(&path, edit(text)).unwrap();
    path
}

/// Relative path to sha256 for every file under `root`.
pub fn tree_digest(root: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, hex::encode(Sha256::digest(fs::read(&path).unwrap())));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a TSV, header dropped.
pub fn tsv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split('\t').map(str::to_string).collect()).collect()
}
