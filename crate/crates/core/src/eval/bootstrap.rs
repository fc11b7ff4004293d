//! Bootstrap resampling of ROC AUC.

use rand::Rng;
use rayon::prelude::*;

use super::stats::roc_auc;
use super::{score_dataset, EntailmentDataset};
use crate::compose::CompositionRule;
use crate::error::{Error, Result};
use crate::hyponymy::Measure;
use crate::lexicon::MatrixStore;
use crate::linalg::Tolerance;
use crate::random::rng_for;

/// Resamples drawn before giving up on getting both classes.
const MAX_ATTEMPTS: u32 = 1000;

/// Source of bootstrap index vectors. `draw` must be a pure function of its
/// arguments so that repetitions can run in any order.
pub trait Resampler: Sync {
    fn draw(&self, len: usize, rep: u64, attempt: u32) -> Vec<usize>;
}

/// Uniform sampling with replacement; repetition `r`, attempt `a` uses its
/// own ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededResampler {
    pub seed: u64,
}

impl Resampler for SeededResampler {
    fn draw(&self, len: usize, rep: u64, attempt: u32) -> Vec<usize> {
        let mut rng = rng_for(self.seed, (rep << 16) | u64::from(attempt));
        (0..len).map(|_| rng.random_range(0..len)).collect()
    }
}

/// Always returns `0..len`; used to check the plumbing against a plain AUC.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityResampler;

impl Resampler for IdentityResampler {
    fn draw(&self, len: usize, _rep: u64, _attempt: u32) -> Vec<usize> {
        (0..len).collect()
    }
}

/// AUC of `reps` resamples of precomputed scores.
pub fn bootstrap_auc_scores(
    scores: &[f64],
    labels: &[bool],
    reps: usize,
    resampler: &dyn Resampler,
) -> Result<Vec<f64>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one repetition".into()));
    }
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    // Fails early on single-class data.
    roc_auc(scores, labels)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            for attempt in 0..MAX_ATTEMPTS {
                let idx = resampler.draw(scores.len(), rep, attempt);
                let positives = idx.iter().filter(|&&i| labels[i]).count();
                if positives == 0 || positives == idx.len() {
                    continue;
                }
                let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
                let l: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
                return roc_auc(&s, &l);
            }
            let positives = labels.iter().filter(|&&l| l).count();
            Err(Error::DegenerateLabels {
                positives,
                negatives: labels.len() - positives,
            })
        })
        .collect()
}

/// Scores the dataset once and bootstraps the AUC with a seeded resampler.
pub fn bootstrap_auc(
    dataset: &EntailmentDataset,
    rule: CompositionRule,
    measure: Measure,
    store: &MatrixStore,
    reps: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<f64>> {
    let scores = score_dataset(dataset, rule, &[measure], store, tol)?.remove(0);
    bootstrap_auc_scores(&scores, &dataset.labels(), reps, &SeededResampler { seed })
}
