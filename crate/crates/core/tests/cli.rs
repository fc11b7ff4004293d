use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use psdcomp::cli::format_matrix;
use psdcomp::compose::CompositionRule;
use psdcomp::eval::{compose_phrase, PhraseType};
use psdcomp::lexicon::MatrixStore;
use psdcomp::linalg::Tolerance;
use psdcomp::synthetic::{generate, SyntheticConfig};
use tempfile::TempDir;

fn psdcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdcomp"))
        .args(args)
        .env_remove("PSDCOMP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Embeddings and lexicon for dog, cat, animal, run, chase.
fn word_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let emb = dir.join("vectors.txt");
    std::fs::write(
        &emb,
        "dog 0.9 0.1 0.0\ncat 0.1 0.9 0.1\nrun 0.3 0.3 0.8\nchase 0.5 0.0 0.7\nsprint 0.2 0.4 0.9\n",
    )
    .unwrap();
    let lex = dir.join("lexicon.tsv");
    std::fs::write(&lex, "animal\tdog,cat\ndog\t\ncat\t\nrun\tsprint\nchase\t\n").unwrap();
    (emb, lex)
}

fn built_store(dir: &Path) -> PathBuf {
    let (emb, lex) = word_fixture(dir);
    let store = dir.join("words.store");
    let o = psdcomp(&["build-matrices", "--embeddings", p(&emb), "--lexicon", p(&lex), "--out", p(&store)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    store
}

#[test]
fn build_matrices_small_fixture() {
    let dir = TempDir::new().unwrap();
    let (emb, lex) = word_fixture(dir.path());
    std::fs::write(&lex, "animal\tdog,cat\ndog\t\ncat\t\n").unwrap();
    let store = dir.path().join("three.store");
    let o = psdcomp(&[
        "build-matrices", "--embeddings", p(&emb), "--lexicon", p(&lex), "--out", p(&store), "--dim", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("3 matrices of dimension 3"));
    let loaded = MatrixStore::load(&store, &Tolerance::default()).unwrap();
    assert_eq!(loaded.len(), 3);
    assert!(loaded.is_normalized(1e-6));
}

#[test]
fn build_matrices_missing_lexicon() {
    let dir = TempDir::new().unwrap();
    let (emb, _) = word_fixture(dir.path());
    let missing = dir.path().join("no-such-lexicon.tsv");
    let out = dir.path().join("x.store");
    let o = psdcomp(&["build-matrices", "--embeddings", p(&emb), "--lexicon", p(&missing), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-lexicon.tsv"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn build_matrices_dimension_check() {
    let dir = TempDir::new().unwrap();
    let (emb, lex) = word_fixture(dir.path());
    let out = dir.path().join("x.store");
    let o = psdcomp(&[
        "build-matrices", "--embeddings", p(&emb), "--lexicon", p(&lex), "--out", p(&out), "--dim", "50",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compose_prints_matrix() {
    let dir = TempDir::new().unwrap();
    let store = built_store(dir.path());
    let o = psdcomp(&["compose", "--store", p(&store), "--type", "sv", "--rule", "traced-verb", "dog run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3 + 2);
    assert!(text.contains("lambda_max"));
    assert!(text.contains("trace"));
}

#[test]
fn compose_svo_matches_library() {
    let dir = TempDir::new().unwrap();
    let store_path = built_store(dir.path());
    let o = psdcomp(&["compose", "--store", p(&store_path), "--type", "svo", "--rule", "mult", "dog chase cat"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = Tolerance::default();
    let store = MatrixStore::load(&store_path, &t).unwrap();
    let expected = compose_phrase(&["dog", "chase", "cat"], PhraseType::SVO, CompositionRule::Mult, &store, &t).unwrap();
    assert_eq!(stdout(&o), format_matrix(&expected));
}

#[test]
fn compose_unknown_rule_lists_ids() {
    let dir = TempDir::new().unwrap();
    let store = built_store(dir.path());
    let o = psdcomp(&["compose", "--store", p(&store), "--type", "sv", "--rule", "tracednoun2", "dog run"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for id in ["traced-noun", "fuzz-switched", "summed-addition", "verb-only"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn compose_missing_word() {
    let dir = TempDir::new().unwrap();
    let store = built_store(dir.path());
    let o = psdcomp(&["compose", "--store", p(&store), "--type", "sv", "--rule", "mult", "unicorn run"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unicorn"));
}

#[test]
fn score_pair_of_phrases() {
    let dir = TempDir::new().unwrap();
    let store = built_store(dir.path());
    let o = psdcomp(&[
        "score", "--store", p(&store), "--type", "sv", "--rule", "traced-noun", "--measure", "ke", "dog run", "dog run",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "k_E 1");
    let o = psdcomp(&[
        "score", "--store", p(&store), "--type", "sv", "--rule", "traced-noun", "--measure", "kl", "dog run", "dog run",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn synthetic_config(dir: &Path, extra: &str) -> PathBuf {
    let corpus = generate(&SyntheticConfig {
        pairs: 20,
        ..SyntheticConfig::default()
    })
    .unwrap();
    corpus.write_to_dir(dir).unwrap();
    let config = dir.join("eval.json");
    std::fs::write(
        &config,
        format!(
            r#"{{
  "datasets": [
    {{"path": "sv.tsv", "type": "sv"}},
    {{"path": "vo.tsv", "type": "vo"}},
    {{"path": "svo.tsv", "type": "svo"}}
  ],
  "rules": ["verb-only", "fuzz", "fuzz-switched", "phaser", "phaser-switched", "traced-verb", "mult"],
  "measures": ["ke", "kba"],
  "store_path": "words.store"{extra}
}}"#
        ),
    )
    .unwrap();
    config
}

#[test]
fn evaluate_writes_reports_deterministically() {
    let dir = TempDir::new().unwrap();
    let config = synthetic_config(dir.path(), r#", "csv_report": "table.csv", "text_report": "table.txt""#);
    let o = psdcomp(&["evaluate", "--config", p(&config)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("table.txt")).unwrap();
    assert_eq!(stdout(&o), text);
    assert!(text.contains("100 bootstrap samples"), "{text}");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("dataset,rule,measure,mean_auc,std,p_vs_fuzz,p_vs_phaser,flags"));
    assert_eq!(lines.count(), 3 * 7 * 2);

    let second = dir.path().join("again.csv");
    let o = psdcomp(&["evaluate", "--config", p(&config), "--csv-out", p(&second)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("table.csv")).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn evaluate_seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let config = synthetic_config(dir.path(), "");
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_psdcomp"));
        cmd.args(["evaluate", "--config", p(&config), "--reps", "5"]).env_remove("PSDCOMP_SEED");
        if let Some(s) = seed {
            cmd.env("PSDCOMP_SEED", s);
        }
        cmd.output().unwrap()
    };
    let default = run(None);
    assert!(stdout(&default).contains("(seed 0)"), "{}", stdout(&default));
    let seeded = run(Some("7"));
    assert!(stdout(&seeded).contains("5 bootstrap samples (seed 7)"));
    assert_eq!(run(Some("abc")).status.code(), Some(2));
}

#[test]
fn evaluate_missing_config() {
    let o = psdcomp(&["evaluate", "--config", "/nonexistent/eval.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_default_passes() {
    let o = psdcomp(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("checks passed"));
}

#[test]
fn verify_detects_injected_corruption() {
    let o = psdcomp(&["verify", "--m", "2", "--trials", "50", "--inject-corrupt"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("witness {"), "{out}");
    assert!(out.contains("corrupted-mult"));
}

#[test]
fn verify_rejects_zero_trials() {
    let o = psdcomp(&["verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_witnesses() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let o = psdcomp(&["verify", "--m", "2", "--trials", "20", "--witness-out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let w: Vec<psdcomp::verify::Witness> = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(w.len(), 4);
}
