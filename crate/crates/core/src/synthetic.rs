//! Synthetic SV, VO and SVO entailment data with known crisp answers.
//!
//! Every hyponym word gets a random psd matrix and its hypernym is that matrix
//! plus another random psd matrix, so the entailing direction holds in the
//! Loewner order. Matrices are stored unnormalized because rescaling would
//! break that order. Positive pairs compose hyponyms on the left and
//! hypernyms on the right; negatives are the same pairs reversed. In half of
//! the pairs the verb is shared by both sides, so only the noun differs.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{EntailmentDataset, PhrasePair, PhraseType};
use crate::lexicon::MatrixStore;
use crate::linalg::PsdMatrix;
use crate::random::{random_psd, rng_for, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub dim: usize,
    /// Pairs per dataset, half positive and half negative.
    pub pairs: usize,
    /// Rank of each hyponym matrix.
    pub base_rank: usize,
    /// Rank of the psd part added to get the hypernym.
    pub extra_rank: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            dim: 8,
            pairs: 100,
            base_rank: 3,
            extra_rank: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub store: MatrixStore,
    /// One dataset per phrase type, named `sv`, `vo` and `svo`.
    pub datasets: Vec<EntailmentDataset>,
}

impl SyntheticCorpus {
    pub fn dataset(&self, phrase_type: PhraseType) -> &EntailmentDataset {
        self.datasets
            .iter()
            .find(|d| d.phrase_type() == phrase_type)
            .expect("one dataset per phrase type")
    }

    /// Writes `words.store`, `sv.tsv`, `vo.tsv` and `svo.tsv` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.store.persist(dir.join("words.store"))?;
        for d in &self.datasets {
            let mut text = String::new();
            for p in d.pairs() {
                text.push_str(&format!("{}\t{}\t{}\n", p.left.join(" "), p.right.join(" "), p.label));
            }
            let path = dir.join(format!("{}.tsv", d.name()));
            std::fs::write(&path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

struct Builder<'a> {
    config: &'a SyntheticConfig,
    rng: StreamRng,
    store: MatrixStore,
}

impl Builder<'_> {
    /// Adds a hyponym and a hypernym word; returns their names. With
    /// `generalize == false` both names refer to the same matrix.
    fn word_pair(&mut self, name: String, generalize: bool) -> Result<(String, String)> {
        let c = self.config;
        let hypo = random_psd(&mut self.rng, c.dim, c.base_rank);
        self.store.insert(name.clone(), hypo.clone())?;
        if !generalize {
            return Ok((name.clone(), name));
        }
        let extra: PsdMatrix = random_psd(&mut self.rng, c.dim, c.extra_rank);
        let hyper_name = format!("{name}+");
        self.store.insert(hyper_name.clone(), hypo.add(&extra)?)?;
        Ok((name, hyper_name))
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if config.dim == 0 || config.base_rank == 0 || config.extra_rank == 0 {
        return Err(Error::InvalidArgument("dimension and ranks must be positive".into()));
    }
    if config.pairs < 2 || config.pairs % 2 != 0 {
        return Err(Error::InvalidArgument("pairs must be an even number of at least 2".into()));
    }
    let mut store = MatrixStore::new(config.dim);
    let mut datasets = Vec::new();
    for (stream, phrase_type) in PhraseType::all().into_iter().enumerate() {
        let mut b = Builder {
            config,
            rng: rng_for(config.seed, stream as u64),
            store,
        };
        let mut pairs = Vec::with_capacity(config.pairs);
        for i in 0..config.pairs / 2 {
            let tag = format!("{phrase_type}{i}");
            let new_verb = i % 2 == 1;
            let (left, right) = match phrase_type {
                PhraseType::SV => {
                    let (s, s_up) = b.word_pair(format!("{tag}.subj"), true)?;
                    let (v, v_up) = b.word_pair(format!("{tag}.verb"), new_verb)?;
                    (vec![s, v], vec![s_up, v_up])
                }
                PhraseType::VO => {
                    let (v, v_up) = b.word_pair(format!("{tag}.verb"), new_verb)?;
                    let (o, o_up) = b.word_pair(format!("{tag}.obj"), true)?;
                    (vec![v, o], vec![v_up, o_up])
                }
                PhraseType::SVO => {
                    let (s, s_up) = b.word_pair(format!("{tag}.subj"), true)?;
                    let (v, v_up) = b.word_pair(format!("{tag}.verb"), new_verb)?;
                    let (o, o_up) = b.word_pair(format!("{tag}.obj"), true)?;
                    (vec![s, v, o], vec![s_up, v_up, o_up])
                }
            };
            pairs.push(PhrasePair::new(left.clone(), right.clone(), true, phrase_type)?);
            pairs.push(PhrasePair::new(right, left, false, phrase_type)?);
        }
        store = b.store;
        datasets.push(EntailmentDataset::new(phrase_type.id(), phrase_type, pairs)?);
    }
    Ok(SyntheticCorpus { store, datasets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{loewner_leq, Tolerance};

    #[test]
    fn shape_and_order() {
        let config = SyntheticConfig {
            pairs: 10,
            ..SyntheticConfig::default()
        };
        let corpus = generate(&config).unwrap();
        let t = Tolerance::default();
        assert_eq!(corpus.datasets.len(), 3);
        for d in &corpus.datasets {
            assert_eq!(d.pairs().len(), 10);
            assert_eq!(d.labels().iter().filter(|&&l| l).count(), 5);
            for p in d.pairs().iter().filter(|p| p.label) {
                for (a, b) in p.left.iter().zip(&p.right) {
                    let (a, b) = (corpus.store.get(a).unwrap(), corpus.store.get(b).unwrap());
                    assert!(loewner_leq(a, b, &t).unwrap());
                }
            }
        }
        assert_eq!(corpus.dataset(PhraseType::VO).name(), "vo");
    }

    #[test]
    fn deterministic() {
        let config = SyntheticConfig {
            pairs: 4,
            ..SyntheticConfig::default()
        };
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a.store, b.store);
        assert_eq!(a.datasets, b.datasets);
    }

    #[test]
    fn rejects_odd_pair_count() {
        let config = SyntheticConfig {
            pairs: 3,
            ..SyntheticConfig::default()
        };
        assert!(generate(&config).is_err());
    }
}
