//! Locations of the example corpus.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(sub)
}

/// The `.tt` files of a corpus directory, sorted.
pub fn files(sub: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir(sub))
        .expect("corpus directory exists")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "tt"))
        .collect();
    out.sort();
    out
}

pub fn expected_rule(tt: &Path) -> String {
    std::fs::read_to_string(tt.with_extension("expected")).expect("sidecar .expected file").trim().to_string()
}

pub fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}
