#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_psei");

/// Compressed encoding of the BLS12-381 G1 generator.
pub const G1_GENERATOR: &str =
    "97f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac586c55e83ff97a1aeffb3af00adb22c6bb";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Copies the fixture files into a fresh directory.
pub fn scenario_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
    }
    dir
}

pub struct Run {
    pub code: i32,
    pub json: Value,
    pub stdout: String,
}

pub fn psei(args: &[&str]) -> Run {
    let out = Command::new(BIN).args(args).env("RUST_LOG", "warn").output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap_or(-1), json, stdout }
}

pub fn run_ok(args: &[&str]) -> Run {
    let r = psei(args);
    assert_eq!(r.code, 0, "psei {args:?} failed: {}", r.stdout);
    r
}

/// setup, both funding legs and request-data.
pub fn prepare(config: &Path, extra: &[&str]) {
    let c = config.to_str().unwrap();
    let with = |mut v: Vec<&'static str>| {
        let mut args: Vec<String> = v.drain(..).map(String::from).collect();
        args.push("--config".into());
        args.push(c.into());
        args.extend(extra.iter().map(|s| s.to_string()));
        args
    };
    for cmd in
        [vec!["setup"], vec!["fund", "--party", "farm"], vec!["fund", "--party", "insurer"], vec!["request-data"]]
    {
        let args = with(cmd);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        run_ok(&refs);
    }
}
