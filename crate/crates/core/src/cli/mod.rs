//! The `psdcomp` command line.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad arguments or
//! unreadable input, 3 a word is missing from the store or embeddings,
//! 4 a numerical error.

mod output;

pub use output::{format_matrix, format_sig};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::compose::CompositionRule;
use crate::error::{Error, Result};
use crate::eval::{compose_phrase, run_table, EvalConfig, PhraseType};
use crate::hyponymy::{measure, Measure};
use crate::lexicon::{load_embeddings, load_lexicon, MatrixStore};
use crate::linalg::Tolerance;
use crate::verify::{run_suite, VerifyConfig};

pub const SEED_ENV: &str = "PSDCOMP_SEED";

#[derive(Debug, Parser)]
#[command(name = "psdcomp", version, about = "Compose psd word matrices and score phrase entailment")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build normalized word matrices from embeddings and a hyponym lexicon.
    BuildMatrices {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Expected embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Compose a phrase and print its matrix.
    Compose {
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "type", value_name = "sv|vo|svo")]
        phrase_type: String,
        #[arg(long)]
        rule: String,
        /// Space-separated tokens, e.g. "dog chase cat".
        phrase: String,
    },
    /// Score how strongly the left phrase entails the right one.
    Score {
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "type", value_name = "sv|vo|svo")]
        phrase_type: String,
        #[arg(long)]
        rule: String,
        #[arg(long, value_name = "ke|kba|crisp")]
        measure: String,
        left: String,
        right: String,
    },
    /// Bootstrap AUC table for the datasets in a JSON config.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's repetition count.
        #[arg(long)]
        reps: Option<usize>,
        /// Used when the config has no seed; defaults to $PSDCOMP_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the aligned table here (overrides the config).
        #[arg(long)]
        text_out: Option<PathBuf>,
        /// Write CSV rows here (overrides the config).
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Run the randomized property suite on the composition rules.
    Verify {
        /// Dimension to test; repeat for several.
        #[arg(long = "m", value_name = "N")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Defaults to $PSDCOMP_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Budget of the Fuzz/Phaser counterexample search.
        #[arg(long, default_value_t = 10_000)]
        search_trials: usize,
        /// Write the counterexamples found as JSON.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_corrupt: bool,
    },
}

/// Seed from `$PSDCOMP_SEED`, else 0.
pub fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Error::InvalidArgument(format!("{SEED_ENV}: {e}"))),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::MissingWord(_) | Error::MissingVector(_) => 3,
        Error::InvalidArgument(_)
        | Error::UnknownRule { .. }
        | Error::UnknownMeasure { .. }
        | Error::Io { .. }
        | Error::Format { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotLinearRule(_)
        | Error::NotStructural(_) => 2,
        Error::InvalidMatrix(_) | Error::ZeroMatrix { .. } | Error::NotPsd { .. } | Error::DegenerateLabels { .. } => 4,
    }
}

fn tokens(phrase: &str) -> Vec<&str> {
    phrase.split_whitespace().collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs a parsed command, writing results to `out`. Returns the exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerance::default();
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cli.command {
        Command::BuildMatrices {
            embeddings,
            lexicon,
            out: store_path,
            dim,
        } => {
            let lexicon = load_lexicon(&lexicon)?;
            let embeddings = load_embeddings(&embeddings)?;
            if let Some(dim) = dim {
                if embeddings.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: embeddings.dim(),
                    });
                }
            }
            let store = MatrixStore::build(&lexicon, &embeddings, &tol)?;
            store.persist(&store_path)?;
            writeln!(
                out,
                "wrote {} matrices of dimension {} to {}",
                store.len(),
                store.dim(),
                store_path.display()
            )
            .map_err(io)?;
        }
        Command::Compose {
            store,
            phrase_type,
            rule,
            phrase,
        } => {
            let phrase_type: PhraseType = phrase_type.parse()?;
            let rule: CompositionRule = rule.parse()?;
            let store = MatrixStore::load(&store, &tol)?;
            let result = compose_phrase(&tokens(&phrase), phrase_type, rule, &store, &tol)?;
            write!(out, "{}", format_matrix(&result)).map_err(io)?;
        }
        Command::Score {
            store,
            phrase_type,
            rule,
            measure: measure_id,
            left,
            right,
        } => {
            let phrase_type: PhraseType = phrase_type.parse()?;
            let rule: CompositionRule = rule.parse()?;
            let measure_kind: Measure = measure_id.parse()?;
            let store = MatrixStore::load(&store, &tol)?;
            let a = compose_phrase(&tokens(&left), phrase_type, rule, &store, &tol)?;
            let b = compose_phrase(&tokens(&right), phrase_type, rule, &store, &tol)?;
            let score = measure(measure_kind, &a, &b, &tol)?;
            writeln!(out, "{} {}", measure_kind.display_name(), score.value).map_err(io)?;
        }
        Command::Evaluate {
            config,
            reps,
            seed,
            text_out,
            csv_out,
        } => {
            let mut config = EvalConfig::load(&config)?;
            if let Some(reps) = reps {
                config.reps = reps;
            }
            let seed = match seed {
                Some(s) => s,
                None => default_seed()?,
            };
            let report = run_table(&config, seed, &tol)?;
            let text = report.to_text();
            write!(out, "{text}").map_err(io)?;
            if let Some(path) = text_out.or(config.text_report) {
                write_file(&path, &text)?;
                info!("wrote {}", path.display());
            }
            if let Some(path) = csv_out.or(config.csv_report) {
                write_file(&path, &report.to_csv())?;
                info!("wrote {}", path.display());
            }
        }
        Command::Verify {
            dims,
            trials,
            seed,
            search_trials,
            witness_out,
            inject_corrupt,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => default_seed()?,
            };
            let config = VerifyConfig {
                dims: if dims.is_empty() { vec![3] } else { dims },
                trials,
                seed,
                search_trials,
                inject_corrupt,
            };
            let report = run_suite(&config, &tol)?;
            for o in &report.outcomes {
                writeln!(out, "{o}").map_err(io)?;
            }
            if let Some(path) = witness_out {
                let json = serde_json::to_string_pretty(&report.counterexamples())
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                write_file(&path, &json)?;
            }
            let failed: Vec<_> = report.failures().collect();
            if failed.is_empty() {
                writeln!(out, "all {} checks passed", report.outcomes.len()).map_err(io)?;
            } else {
                writeln!(out, "{} of {} checks failed", failed.len(), report.outcomes.len()).map_err(io)?;
                for o in failed {
                    warn!("{} failed for {} (m={})", o.property, o.rule, o.m);
                    if let Some(w) = &o.witness {
                        let json = serde_json::to_string(w).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                        writeln!(out, "witness {json}").map_err(io)?;
                    }
                }
                return Ok(1);
            }
        }
    }
    Ok(0)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}
