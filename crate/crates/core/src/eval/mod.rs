//! Entailment datasets of short phrases and their evaluation.

mod bootstrap;
mod report;
mod stats;

pub use bootstrap::{bootstrap_auc, bootstrap_auc_scores, IdentityResampler, Resampler, SeededResampler};
pub use report::{run_table, run_table_on, DatasetSpec, EvalConfig, EvalReport, ReportRow};
pub use stats::{bonferroni, mean, roc_auc, sample_std, welch_t_test};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::compose::{compose, CompositionRule};
use crate::error::{Error, Result};
use crate::hyponymy::{measure, Measure};
use crate::lexicon::MatrixStore;
use crate::linalg::{PsdMatrix, Tolerance};

/// Grammatical shape of a phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhraseType {
    /// subject verb
    SV,
    /// verb object
    VO,
    /// subject verb object
    SVO,
}

impl PhraseType {
    pub fn id(self) -> &'static str {
        match self {
            PhraseType::SV => "sv",
            PhraseType::VO => "vo",
            PhraseType::SVO => "svo",
        }
    }

    pub fn token_count(self) -> usize {
        match self {
            PhraseType::SV | PhraseType::VO => 2,
            PhraseType::SVO => 3,
        }
    }

    pub fn all() -> [PhraseType; 3] {
        [PhraseType::SV, PhraseType::VO, PhraseType::SVO]
    }
}

impl fmt::Display for PhraseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PhraseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sv" => Ok(PhraseType::SV),
            "vo" => Ok(PhraseType::VO),
            "svo" => Ok(PhraseType::SVO),
            _ => Err(Error::InvalidArgument(format!("unknown phrase type `{s}` (expected sv, vo or svo)"))),
        }
    }
}

impl serde::Serialize for PhraseType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> serde::Deserialize<'de> for PhraseType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `left` entails `right` when `label` is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhrasePair {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub label: bool,
    pub phrase_type: PhraseType,
}

impl PhrasePair {
    pub fn new(left: Vec<String>, right: Vec<String>, label: bool, phrase_type: PhraseType) -> Result<Self> {
        for side in [&left, &right] {
            if side.len() != phrase_type.token_count() {
                return Err(Error::InvalidArgument(format!(
                    "{phrase_type} phrase needs {} tokens, got `{}`",
                    phrase_type.token_count(),
                    side.join(" ")
                )));
            }
        }
        Ok(PhrasePair {
            left,
            right,
            label,
            phrase_type,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentDataset {
    name: String,
    phrase_type: PhraseType,
    pairs: Vec<PhrasePair>,
}

impl EntailmentDataset {
    pub fn new(name: impl Into<String>, phrase_type: PhraseType, pairs: Vec<PhrasePair>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::InvalidArgument(format!("dataset `{name}` is empty")));
        }
        if let Some(p) = pairs.iter().find(|p| p.phrase_type != phrase_type) {
            return Err(Error::InvalidArgument(format!(
                "dataset `{name}` mixes {phrase_type} and {} pairs",
                p.phrase_type
            )));
        }
        Ok(EntailmentDataset {
            name,
            phrase_type,
            pairs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phrase_type(&self) -> PhraseType {
        self.phrase_type
    }

    pub fn pairs(&self) -> &[PhrasePair] {
        &self.pairs
    }

    pub fn labels(&self) -> Vec<bool> {
        self.pairs.iter().map(|p| p.label).collect()
    }
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "t" | "1" | "yes" => Some(true),
        "false" | "f" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Reads `left phrase<TAB>right phrase<TAB>true|false` lines. The dataset is
/// named after the file stem.
pub fn load_dataset(path: impl AsRef<Path>, phrase_type: PhraseType) -> Result<EntailmentDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| phrase_type.id().to_string());
    parse_dataset(&text, &name, &path.display().to_string(), phrase_type)
}

pub fn parse_dataset(text: &str, name: &str, source: &str, phrase_type: PhraseType) -> Result<EntailmentDataset> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::format(
                source,
                Some(lineno),
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let tokens = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
        let (left, right) = (tokens(fields[0]), tokens(fields[1]));
        for side in [&left, &right] {
            if side.len() != phrase_type.token_count() {
                return Err(Error::format(
                    source,
                    Some(lineno),
                    format!(
                        "{phrase_type} phrase needs {} tokens, found {} in `{}`",
                        phrase_type.token_count(),
                        side.len(),
                        side.join(" ")
                    ),
                ));
            }
        }
        let label = parse_label(fields[2])
            .ok_or_else(|| Error::format(source, Some(lineno), format!("bad label `{}`", fields[2].trim())))?;
        pairs.push(PhrasePair {
            left,
            right,
            label,
            phrase_type,
        });
    }
    if pairs.is_empty() {
        return Err(Error::format(source, None, "no phrase pairs found"));
    }
    EntailmentDataset::new(name, phrase_type, pairs)
}

/// Composes a phrase. SV and VO compose the noun into the verb; SVO first
/// composes the object into the verb and then the subject into the result.
pub fn compose_phrase<S: AsRef<str>>(
    tokens: &[S],
    phrase_type: PhraseType,
    rule: CompositionRule,
    store: &MatrixStore,
    tol: &Tolerance,
) -> Result<PsdMatrix> {
    if tokens.len() != phrase_type.token_count() {
        return Err(Error::InvalidArgument(format!(
            "{phrase_type} phrase needs {} tokens, got {}",
            phrase_type.token_count(),
            tokens.len()
        )));
    }
    let word = |i: usize| store.lookup(tokens[i].as_ref());
    match phrase_type {
        PhraseType::SV => compose(rule, word(0)?, word(1)?, tol),
        PhraseType::VO => compose(rule, word(1)?, word(0)?, tol),
        PhraseType::SVO => {
            let (s, v, o) = (word(0)?, word(1)?, word(2)?);
            let vp = compose(rule, o, v, tol)?;
            compose(rule, s, &vp, tol)
        }
    }
}

/// `measure(compose(left), compose(right))`.
pub fn score_pair(
    pair: &PhrasePair,
    rule: CompositionRule,
    measure_kind: Measure,
    store: &MatrixStore,
    tol: &Tolerance,
) -> Result<f64> {
    let left = compose_phrase(&pair.left, pair.phrase_type, rule, store, tol)?;
    let right = compose_phrase(&pair.right, pair.phrase_type, rule, store, tol)?;
    Ok(measure(measure_kind, &left, &right, tol)?.value)
}

/// Scores every pair once for each measure; `result[k][i]` is pair `i`
/// under `measures[k]`.
pub fn score_dataset(
    dataset: &EntailmentDataset,
    rule: CompositionRule,
    measures: &[Measure],
    store: &MatrixStore,
    tol: &Tolerance,
) -> Result<Vec<Vec<f64>>> {
    let per_pair = dataset
        .pairs()
        .par_iter()
        .map(|pair| {
            let left = compose_phrase(&pair.left, pair.phrase_type, rule, store, tol)?;
            let right = compose_phrase(&pair.right, pair.phrase_type, rule, store, tol)?;
            measures
                .iter()
                .map(|&m| measure(m, &left, &right, tol).map(|s| s.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..measures.len())
        .map(|k| per_pair.iter().map(|scores| scores[k]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, hadamard};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn store() -> MatrixStore {
        let t = tol();
        let mut s = MatrixStore::new(2);
        s.insert("dog", PsdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]], &t).unwrap())
            .unwrap();
        s.insert("run", PsdMatrix::from_rows(&[vec![0.8, -0.1], vec![-0.1, 0.6]], &t).unwrap())
            .unwrap();
        s.insert("cat", PsdMatrix::from_rows(&[vec![0.3, 0.1], vec![0.1, 0.9]], &t).unwrap())
            .unwrap();
        s
    }

    #[test]
    fn parses_paired_examples() {
        let d = parse_dataset(
            "summer finish\tseason end\ttrue\nseason end\tsummer finish\tfalse\n",
            "sv",
            "mem",
            PhraseType::SV,
        )
        .unwrap();
        assert_eq!(d.pairs().len(), 2);
        assert_eq!(d.pairs()[0].left, ["summer", "finish"]);
        assert_eq!(d.pairs()[0].right, ["season", "end"]);
        assert!(d.pairs()[0].label);
        assert!(!d.pairs()[1].label);
    }

    #[test]
    fn wrong_token_count_reports_line() {
        let err = parse_dataset(
            "summer finish\tseason end\ttrue\nbig dog bark\tanimal make noise\tfalse\n",
            "sv",
            "sv.tsv",
            PhraseType::SV,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format { line: Some(2), .. }), "{err}");
    }

    #[test]
    fn bad_label_and_empty() {
        assert!(parse_dataset("a b\tc d\tmaybe\n", "x", "mem", PhraseType::SV).is_err());
        assert!(parse_dataset("\n# nothing\n", "x", "mem", PhraseType::SV).is_err());
    }

    #[test]
    fn verb_only_returns_verb() {
        let s = store();
        let out = compose_phrase(&["dog", "run"], PhraseType::SV, CompositionRule::VerbOnly, &s, &tol()).unwrap();
        assert_eq!(out, *s.get("run").unwrap());
    }

    #[test]
    fn svo_traced_verb_nests() {
        let s = store();
        let t = tol();
        let out = compose_phrase(&["dog", "run", "cat"], PhraseType::SVO, CompositionRule::TracedVerb, &s, &t).unwrap();
        let (subj, verb, obj) = (s.get("dog").unwrap(), s.get("run").unwrap(), s.get("cat").unwrap());
        let expected = subj.as_matrix() * (verb.trace() * obj.trace() / 4.0);
        assert!(frobenius_norm(&(out.as_matrix() - expected)) < 1e-14);
    }

    #[test]
    fn vo_mult_is_hadamard() {
        let s = store();
        let out = compose_phrase(&["run", "cat"], PhraseType::VO, CompositionRule::Mult, &s, &tol()).unwrap();
        let expected = hadamard(s.get("cat").unwrap().as_matrix(), s.get("run").unwrap().as_matrix()).unwrap();
        assert_eq!(out.as_matrix(), &expected);
    }

    #[test]
    fn missing_word_is_named() {
        let err = compose_phrase(&["dog", "fly"], PhraseType::SV, CompositionRule::Mult, &store(), &tol()).unwrap_err();
        assert!(matches!(err, Error::MissingWord(w) if w == "fly"));
    }

    #[test]
    fn identical_phrases_score_one() {
        let s = store();
        let pair = PhrasePair::new(
            vec!["dog".into(), "run".into()],
            vec!["dog".into(), "run".into()],
            true,
            PhraseType::SV,
        )
        .unwrap();
        for rule in CompositionRule::default_evaluation() {
            assert_eq!(score_pair(&pair, *rule, Measure::KE, &s, &tol()).unwrap(), 1.0, "{rule}");
        }
    }

    #[test]
    fn crisp_pair_and_its_reverse() {
        let t = tol();
        let mut s = store();
        let dog = s.get("dog").unwrap().clone();
        let extra = PsdMatrix::from_rows(&[vec![0.2, 0.1], vec![0.1, 0.3]], &t).unwrap();
        s.insert("animal", dog.add(&extra).unwrap()).unwrap();
        let fwd = PhrasePair::new(
            vec!["dog".into(), "run".into()],
            vec!["animal".into(), "run".into()],
            true,
            PhraseType::SV,
        )
        .unwrap();
        let rev = PhrasePair::new(fwd.right.clone(), fwd.left.clone(), false, PhraseType::SV).unwrap();
        let rule = CompositionRule::TracedNoun;
        assert_eq!(score_pair(&fwd, rule, Measure::KE, &s, &t).unwrap(), 1.0);
        assert!(score_pair(&rev, rule, Measure::KE, &s, &t).unwrap() < 1.0);
    }

    #[test]
    fn phrase_type_ids() {
        for p in PhraseType::all() {
            assert_eq!(p.id().parse::<PhraseType>().unwrap(), p);
        }
        assert!("ov".parse::<PhraseType>().is_err());
    }
}
