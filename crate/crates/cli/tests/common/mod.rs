#![allow(dead_code)]

use ampaug_cli::cli::Cli;
use clap::Parser;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Runs one `ampaug` invocation in-process.
pub fn ampaug(args: &[&str]) -> ampaug::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("ampaug").chain(args.iter().copied())).expect("arguments parse");
    ampaug_cli::run(&cli)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn sha256(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of every file directly inside `dir`, keyed by file name.
pub fn digests(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), sha256(&p)))
        .collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
