//! Evaluation tables: bootstrap AUC per dataset, rule and measure, with
//! significance against the Fuzz and Phaser baselines.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_auc_scores, SeededResampler};
use super::stats::{bonferroni, mean, sample_std, welch_t_test};
use super::{load_dataset, score_dataset, EntailmentDataset, PhraseType};
use crate::compose::CompositionRule;
use crate::error::{Error, Result};
use crate::hyponymy::Measure;
use crate::lexicon::MatrixStore;
use crate::linalg::Tolerance;

/// Adjusted p-value below which a difference is flagged.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(rename = "type")]
    pub phrase_type: PhraseType,
    /// Defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_rules() -> Vec<CompositionRule> {
    CompositionRule::default_evaluation().to_vec()
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::KE, Measure::KBA]
}

fn default_reps() -> usize {
    100
}

/// JSON evaluation config. Relative paths are resolved against the
/// directory containing the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_rules")]
    pub rules: Vec<CompositionRule>,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub store_path: PathBuf,
    #[serde(default)]
    pub text_report: Option<PathBuf>,
    #[serde(default)]
    pub csv_report: Option<PathBuf>,
}

impl EvalConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: EvalConfig = serde_json::from_str(&text).map_err(|e| {
            Error::format(path.display().to_string(), Some(e.line()), e.to_string())
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.store_path);
        for d in &mut config.datasets {
            resolve(&mut d.path);
        }
        config.text_report.as_mut().map(resolve);
        config.csv_report.as_mut().map(resolve);
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub dataset: String,
    pub phrase_type: PhraseType,
    pub rule: CompositionRule,
    pub measure: Measure,
    pub mean_auc: f64,
    pub std: f64,
    pub aucs: Vec<f64>,
    /// Largest adjusted p-value against the Fuzz variants in the run.
    pub p_vs_fuzz: Option<f64>,
    pub p_vs_phaser: Option<f64>,
    pub beats_fuzz: bool,
    pub beats_phaser: bool,
}

impl ReportRow {
    /// `*` for beating both Fuzz variants, `+` for both Phaser variants.
    pub fn flags(&self) -> String {
        let mut s = String::new();
        if self.beats_fuzz {
            s.push('*');
        }
        if self.beats_phaser {
            s.push('+');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub reps: usize,
    pub seed: u64,
    /// Number of tests the p-values were corrected for.
    pub comparisons: usize,
    pub datasets: Vec<String>,
    pub rules: Vec<CompositionRule>,
    pub measures: Vec<Measure>,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, dataset: &str, rule: CompositionRule, measure: Measure) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.rule == rule && r.measure == measure)
    }

    /// One line per rule, one column per dataset and measure.
    pub fn to_text(&self) -> String {
        let mut header = vec!["Model".to_string()];
        for d in &self.datasets {
            for m in &self.measures {
                header.push(format!("{d} {}", m.display_name()));
            }
        }
        let mut lines = vec![header];
        for &rule in &self.rules {
            let mut line = vec![rule.display_name().to_string()];
            for d in &self.datasets {
                for &m in &self.measures {
                    line.push(match self.row(d, rule, m) {
                        Some(r) => format!("{:.3}{}", r.mean_auc, r.flags()),
                        None => "-".into(),
                    });
                }
            }
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, line) in lines.iter().enumerate() {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        let _ = writeln!(
            out,
            "\nMean AUC over {} bootstrap samples (seed {}). * better than both Fuzz variants, \
             + better than both Phaser variants (Welch t-test, Bonferroni over {} comparisons, p < {}).",
            self.reps, self.seed, self.comparisons, SIGNIFICANCE_LEVEL
        );
        out
    }

    /// `dataset,rule,measure,mean_auc,std,p_vs_fuzz,p_vs_phaser,flags`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,rule,measure,mean_auc,std,p_vs_fuzz,p_vs_phaser,flags\n");
        let p = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{},{},{}",
                csv_field(&r.dataset),
                r.rule.id(),
                r.measure.id(),
                r.mean_auc,
                r.std,
                p(r.p_vs_fuzz),
                p(r.p_vs_phaser),
                r.flags()
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Loads the store and datasets named by `config` and evaluates them.
/// `seed` is used when the config does not set one.
pub fn run_table(config: &EvalConfig, seed: u64, tol: &Tolerance) -> Result<EvalReport> {
    let store = MatrixStore::load(&config.store_path, tol)?;
    let datasets = config
        .datasets
        .iter()
        .map(|spec| {
            let d = load_dataset(&spec.path, spec.phrase_type)?;
            match &spec.name {
                Some(name) => EntailmentDataset::new(name.clone(), d.phrase_type(), d.pairs().to_vec()),
                None => Ok(d),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    run_table_on(
        &datasets,
        &store,
        &config.rules,
        &config.measures,
        config.reps,
        config.seed.unwrap_or(seed),
        tol,
    )
}

fn check_unique<T: std::hash::Hash + Eq + std::fmt::Display>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::InvalidArgument(format!("no {what} given")));
    }
    let mut seen = HashSet::new();
    for item in items {
        if !seen.insert(item) {
            return Err(Error::InvalidArgument(format!("{what} `{item}` listed twice")));
        }
    }
    Ok(())
}

/// Evaluates in-memory datasets. Every dataset uses the same seed, so rules
/// are compared on identical resamples.
pub fn run_table_on(
    datasets: &[EntailmentDataset],
    store: &MatrixStore,
    rules: &[CompositionRule],
    measures: &[Measure],
    reps: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<EvalReport> {
    check_unique(rules, "rule")?;
    check_unique(measures, "measure")?;
    let names: Vec<&str> = datasets.iter().map(|d| d.name()).collect();
    check_unique(&names, "dataset")?;
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }

    let fuzz: Vec<CompositionRule> = rules.iter().copied().filter(|r| r.is_fuzz()).collect();
    let phaser: Vec<CompositionRule> = rules.iter().copied().filter(|r| r.is_phaser()).collect();
    let compared = rules.iter().filter(|r| !r.is_fuzz() && !r.is_phaser()).count();
    let families = usize::from(!fuzz.is_empty()) + usize::from(!phaser.is_empty());
    let comparisons = (compared * families).max(1);
    let resampler = SeededResampler { seed };

    let mut rows = Vec::new();
    for dataset in datasets {
        let labels = dataset.labels();
        let mut block = Vec::new();
        for &rule in rules {
            let scores = score_dataset(dataset, rule, measures, store, tol)?;
            for (&measure, s) in measures.iter().zip(&scores) {
                let aucs = bootstrap_auc_scores(s, &labels, reps, &resampler)?;
                block.push(ReportRow {
                    dataset: dataset.name().to_string(),
                    phrase_type: dataset.phrase_type(),
                    rule,
                    measure,
                    mean_auc: mean(&aucs),
                    std: sample_std(&aucs),
                    aucs,
                    p_vs_fuzz: None,
                    p_vs_phaser: None,
                    beats_fuzz: false,
                    beats_phaser: false,
                });
            }
        }
        let baseline = |block: &[ReportRow], rule: CompositionRule, measure: Measure| {
            block
                .iter()
                .find(|r| r.rule == rule && r.measure == measure)
                .map(|r| (r.mean_auc, r.aucs.clone()))
                .expect("baseline row present")
        };
        for i in 0..block.len() {
            let (rule, measure) = (block[i].rule, block[i].measure);
            if rule.is_fuzz() || rule.is_phaser() {
                continue;
            }
            for (variants, is_fuzz) in [(&fuzz, true), (&phaser, false)] {
                if variants.is_empty() {
                    continue;
                }
                let mut worst_p: Option<f64> = Some(0.0);
                let mut beats = true;
                for &variant in variants {
                    let (base_mean, base_aucs) = baseline(&block, variant, measure);
                    let p = welch_t_test(&block[i].aucs, &base_aucs)
                        .ok()
                        .map(|p| bonferroni(p, comparisons));
                    worst_p = match (worst_p, p) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                    beats &= p.is_some_and(|p| p < SIGNIFICANCE_LEVEL) && block[i].mean_auc > base_mean;
                }
                let row = &mut block[i];
                if is_fuzz {
                    row.p_vs_fuzz = worst_p;
                    row.beats_fuzz = beats;
                } else {
                    row.p_vs_phaser = worst_p;
                    row.beats_phaser = beats;
                }
            }
        }
        rows.extend(block);
    }
    Ok(EvalReport {
        reps,
        seed,
        comparisons,
        datasets: names.iter().map(|s| s.to_string()).collect(),
        rules: rules.to_vec(),
        measures: measures.to_vec(),
        rows,
    })
}
