//! Word vectors, hyponym lexicons and the persisted store of word matrices.
//!
//! A word with hyponyms `h_1..h_k` is represented by `sum_i |h_i><h_i|`,
//! divided by its largest eigenvalue. Words without hyponyms fall back to
//! the rank-one projector on their own (unnormalized) vector.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{normalize_max_eig, PsdMatrix, Tolerance};

/// Pretrained word vectors of a single dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Adds a vector; returns `false` (and keeps the old one) if the word
    /// is already present.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let word = word.into();
        if self.vectors.contains_key(&word) {
            return Ok(false);
        }
        self.vectors.insert(word, vector);
        Ok(true)
    }
}

fn read_file(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::io(path, e))?;
    Ok(s)
}

/// Reads `word v1 ... vm` lines. A leading `count dim` header (word2vec text
/// format) is skipped.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), &path.display().to_string())
}

pub fn parse_embeddings(reader: impl BufRead, source: &str) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::format(source, Some(lineno), e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if table.is_none() && values.len() == 1 && word.parse::<u64>().is_ok() && values[0].parse::<u64>().is_ok() {
            continue;
        }
        let vector = values
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::format(source, Some(lineno), format!("non-numeric value `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let table = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
        if vector.is_empty() {
            return Err(Error::format(source, Some(lineno), format!("no values for `{word}`")));
        }
        if vector.len() != table.dim {
            return Err(Error::format(
                source,
                Some(lineno),
                format!("expected {} values, found {}", table.dim, vector.len()),
            ));
        }
        if !table.insert(word, vector)? {
            warn!("{source}:{lineno}: duplicate vector for `{word}` ignored");
        }
    }
    table.ok_or_else(|| Error::format(source, None, "no embedding vectors found"))
}

/// Word -> ordered, duplicate-free list of hyponyms.
#[derive(Debug, Clone, Default)]
pub struct HyponymLexicon {
    entries: BTreeMap<String, Vec<String>>,
    warnings: Vec<String>,
}

impl HyponymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds hyponyms for `word`, dropping duplicates.
    pub fn insert(&mut self, word: impl Into<String>, hyponyms: impl IntoIterator<Item = String>) {
        let word = word.into();
        let list = self.entries.entry(word.clone()).or_default();
        for h in hyponyms {
            if list.contains(&h) {
                self.warnings.push(format!("duplicate hyponym `{h}` of `{word}` dropped"));
            } else {
                list.push(h);
            }
        }
    }

    pub fn hyponyms(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Problems that were tolerated while reading, e.g. duplicate hyponyms.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Reads `word<TAB>h1,h2,...` lines. Blank lines and lines starting with `#`
/// are skipped.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<HyponymLexicon> {
    let path = path.as_ref();
    parse_lexicon(&read_file(path)?, &path.display().to_string())
}

pub fn parse_lexicon(text: &str, source: &str) -> Result<HyponymLexicon> {
    let mut lexicon = HyponymLexicon::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(source, Some(lineno), "expected `word<TAB>hyponym,hyponym,...`"))?;
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::format(source, Some(lineno), "empty word"));
        }
        let before = lexicon.warnings.len();
        lexicon.insert(
            word,
            rest.split(',')
                .map(str::trim)
                .filter(|h| !h.is_empty())
                .map(str::to_string),
        );
        for w in &mut lexicon.warnings[before..] {
            *w = format!("{source}:{lineno}: {w}");
            warn!("{w}");
        }
    }
    Ok(lexicon)
}

/// `sum_i |x_i><x_i|`
pub fn sum_of_outer_products<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a [f64]>) -> PsdMatrix {
    let mut acc = DMatrix::zeros(dim, dim);
    for x in vectors {
        let col = nalgebra::DVector::from_column_slice(x);
        acc += &col * col.transpose();
    }
    PsdMatrix::from_psd_unchecked(acc)
}

/// Unnormalized word matrix: the hyponym vectors that have embeddings, or the
/// word's own vector for leaves and for words whose hyponyms are all missing.
pub fn raw_word_matrix(word: &str, lexicon: &HyponymLexicon, embeddings: &EmbeddingTable) -> Result<PsdMatrix> {
    let hyponyms = lexicon.hyponyms(word).unwrap_or(&[]);
    let present: Vec<&[f64]> = hyponyms.iter().filter_map(|h| embeddings.get(h)).collect();
    if present.len() < hyponyms.len() {
        warn!(
            "`{word}`: {} of {} hyponyms have no embedding",
            hyponyms.len() - present.len(),
            hyponyms.len()
        );
    }
    if !present.is_empty() {
        return Ok(sum_of_outer_products(embeddings.dim(), present));
    }
    let own = embeddings
        .get(word)
        .ok_or_else(|| Error::MissingVector(word.to_string()))?;
    Ok(PsdMatrix::outer(own))
}

/// Word matrix normalized to largest eigenvalue 1.
pub fn build_matrix(
    word: &str,
    lexicon: &HyponymLexicon,
    embeddings: &EmbeddingTable,
    tol: &Tolerance,
) -> Result<PsdMatrix> {
    let raw = raw_word_matrix(word, lexicon, embeddings)?;
    normalize_max_eig(&raw, tol)
}

/// Named psd matrices of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixStore {
    dim: usize,
    matrices: BTreeMap<String, PsdMatrix>,
}

const STORE_MAGIC: &str = "psdcomp-store";
const STORE_VERSION: u32 = 1;

impl MatrixStore {
    pub fn new(dim: usize) -> Self {
        MatrixStore {
            dim,
            matrices: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&PsdMatrix> {
        self.matrices.get(word)
    }

    pub fn lookup(&self, word: &str) -> Result<&PsdMatrix> {
        self.get(word).ok_or_else(|| Error::MissingWord(word.to_string()))
    }

    pub fn insert(&mut self, word: impl Into<String>, matrix: PsdMatrix) -> Result<()> {
        if matrix.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: matrix.dim(),
            });
        }
        let word = word.into();
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("store words cannot contain whitespace: `{word}`")));
        }
        self.matrices.insert(word, matrix);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PsdMatrix)> {
        self.matrices.iter().map(|(w, m)| (w.as_str(), m))
    }

    /// Every matrix has largest eigenvalue 1 within `eps`.
    pub fn is_normalized(&self, eps: f64) -> bool {
        self.matrices
            .values()
            .all(|m| (m.max_eigenvalue() - 1.0).abs() <= eps)
    }

    /// Builds normalized matrices for every lexicon entry.
    pub fn build(lexicon: &HyponymLexicon, embeddings: &EmbeddingTable, tol: &Tolerance) -> Result<Self> {
        let words: Vec<&str> = lexicon.words().collect();
        let built = words
            .par_iter()
            .map(|w| build_matrix(w, lexicon, embeddings, tol).map(|m| (w.to_string(), m)))
            .collect::<Result<Vec<_>>>()?;
        let mut store = MatrixStore::new(embeddings.dim());
        for (w, m) in built {
            store.insert(w, m)?;
        }
        Ok(store)
    }

    /// Text format: a `psdcomp-store <version> <dim> <count>` header, then per
    /// word a `word dim` line followed by `dim` rows of shortest round-trip
    /// decimals.
    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{STORE_MAGIC} {STORE_VERSION} {} {}", self.dim, self.matrices.len())?;
        let mut row = String::new();
        for (word, matrix) in &self.matrices {
            writeln!(out, "{word} {}", self.dim)?;
            let a = matrix.as_matrix();
            for i in 0..self.dim {
                row.clear();
                for j in 0..self.dim {
                    if j > 0 {
                        row.push(' ');
                    }
                    row.push_str(&a[(i, j)].to_string());
                }
                writeln!(out, "{row}")?;
            }
        }
        Ok(())
    }

    pub fn persist(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, tol: &Tolerance) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?, &path.display().to_string(), tol)
    }

    pub fn parse(text: &str, source: &str, tol: &Tolerance) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(source, None, "empty store file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != STORE_MAGIC {
            return Err(Error::format(source, Some(1), "not a psdcomp store"));
        }
        let header_num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::format(source, Some(1), format!("bad header field `{s}`")))
        };
        let version = header_num(fields[1])?;
        if version != STORE_VERSION as usize {
            return Err(Error::format(
                source,
                Some(1),
                format!("unsupported store version {version} (expected {STORE_VERSION})"),
            ));
        }
        let dim = header_num(fields[2])?;
        let count = header_num(fields[3])?;
        if dim == 0 {
            return Err(Error::format(source, Some(1), "dimension must be positive"));
        }

        let mut raw = Vec::with_capacity(count);
        for _ in 0..count {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| Error::format(source, None, format!("truncated: expected {count} words")))?;
            let (word, m) = line
                .split_once(' ')
                .ok_or_else(|| Error::format(source, Some(lineno), "expected `word dim`"))?;
            if m.trim().parse::<usize>().ok() != Some(dim) {
                return Err(Error::format(source, Some(lineno), format!("expected dimension {dim}")));
            }
            let mut rows = Vec::with_capacity(dim);
            for _ in 0..dim {
                rows.push(
                    lines
                        .next()
                        .ok_or_else(|| Error::format(source, None, format!("truncated inside `{word}`")))?,
                );
            }
            raw.push((lineno, word, rows));
        }
        if let Some((lineno, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::format(source, Some(lineno), format!("unexpected trailing content `{extra}`")));
        }

        // Number parsing dominates load time, so it runs in parallel too.
        let checked = raw
            .into_par_iter()
            .map(|(header_line, word, rows)| {
                let mut values = Vec::with_capacity(dim * dim);
                for (lineno, row) in rows {
                    let before = values.len();
                    for v in row.split_whitespace() {
                        values.push(
                            v.parse::<f64>()
                                .map_err(|_| Error::format(source, Some(lineno), format!("bad number `{v}`")))?,
                        );
                    }
                    if values.len() - before != dim {
                        return Err(Error::format(source, Some(lineno), format!("expected {dim} values")));
                    }
                }
                let lineno = header_line + dim;
                let a = DMatrix::from_row_slice(dim, dim, &values);
                if a != a.transpose() {
                    return Err(Error::format(source, Some(lineno), format!("matrix for `{word}` is not symmetric")));
                }
                PsdMatrix::new(a, tol)
                    .map(|m| (word.to_string(), m))
                    .map_err(|e| Error::format(source, Some(lineno), format!("`{word}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut store = MatrixStore::new(dim);
        for (word, m) in checked {
            store.insert(word, m)?;
        }
        Ok(store)
    }
}
