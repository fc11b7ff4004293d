//! Timing of store building and loading at vocabulary scale. Kept in its
//! own binary so that no other test competes for the CPU.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use psdcomp::lexicon::MatrixStore;
use psdcomp::linalg::Tolerance;
use psdcomp::random::rng_for;
use rand::Rng;
use tempfile::TempDir;

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// 1000 words of dimension 50, each with up to six hyponyms.
fn large_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut rng = rng_for(42, 0);
    let mut emb = String::new();
    for i in 0..1000 {
        emb.push_str(&format!("w{i}"));
        for _ in 0..50 {
            emb.push_str(&format!(" {:.6}", rng.random_range(-1.0..1.0)));
        }
        emb.push('\n');
    }
    let mut lex = String::new();
    for i in 0..1000 {
        let k = rng.random_range(0..=6);
        let hyponyms: Vec<String> = (0..k).map(|_| format!("w{}", rng.random_range(0..1000))).collect();
        lex.push_str(&format!("w{i}\t{}\n", hyponyms.join(",")));
    }
    let (e, l) = (dir.join("big.txt"), dir.join("big.tsv"));
    std::fs::write(&e, emb).unwrap();
    std::fs::write(&l, lex).unwrap();
    (e, l)
}

#[test]
fn large_store_build_and_load_times() {
    let dir = TempDir::new().unwrap();
    let (emb, lex) = large_fixture(dir.path());
    let store = dir.path().join("big.store");
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_psdcomp"))
        .args(["build-matrices", "--embeddings", p(&emb), "--lexicon", p(&lex), "--out", p(&store), "--dim", "50"])
        .output()
        .unwrap();
    let build = start.elapsed();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(build < Duration::from_secs(10), "build took {build:?}");

    let start = Instant::now();
    let loaded = MatrixStore::load(&store, &Tolerance::default()).unwrap();
    let load = start.elapsed();
    assert_eq!(loaded.len(), 1000);
    assert_eq!(loaded.dim(), 50);
    println!("build {build:?}, load {load:?}");
    assert!(load < Duration::from_secs(1), "load took {load:?}");
}
