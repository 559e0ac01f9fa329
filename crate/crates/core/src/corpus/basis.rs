use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ranked_words, TokenizedCorpus};
use crate::error::{io_err, Error, Result};

/// Function words excluded from the basis of untagged corpora.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "he",
    "her", "his", "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "not", "of",
    "on", "one", "or", "other", "our", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "to", "too", "up",
    "us", "was", "we", "were", "what", "when", "which", "who", "will", "with", "would", "you",
    "your",
];

/// Ordered context words; index `i` of every vector and matrix refers to word `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct BasisSpec {
    words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TryFrom<Vec<String>> for BasisSpec {
    type Error = Error;

    fn try_from(words: Vec<String>) -> Result<Self> {
        Self::new(words)
    }
}

impl From<BasisSpec> for Vec<String> {
    fn from(b: BasisSpec) -> Self {
        b.words
    }
}

impl BasisSpec {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Config("basis must contain at least one word".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid basis word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate basis word {w:?}")));
            }
        }
        Ok(Self { words, index })
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// The first `dim` words.
    pub fn truncate(&self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::Config(format!(
                "cannot take {dim} words from a basis of {}",
                self.dim()
            )));
        }
        Self::new(self.words[..dim].to_vec())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            let _ = writeln!(out, "{w}");
        }
        out
    }

    /// One word per line; `#` lines are comments.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect(),
        )
    }
}

/// Top-`dim` content words by frequency, ties lexicographic.
///
/// In a tagged corpus a word is content if its majority tag is a noun, verb,
/// adjective or adverb; words that never carry a tag fall back to the
/// stopword rule used for untagged corpora.
pub fn select_basis(
    vocab: &BTreeMap<String, u64>,
    corpus: &TokenizedCorpus,
    dim: usize,
    stopwords: &[String],
) -> Result<BasisSpec> {
    if dim == 0 {
        return Err(Error::Config("basis size must be at least 1".into()));
    }
    let stop: HashSet<&str> = stopwords.iter().map(String::as_str).collect();
    let content: Vec<String> = ranked_words(vocab)
        .into_iter()
        .filter(|(w, _)| match corpus.majority_class(w) {
            Some(c) => c.is_content(),
            None => !stop.contains(w),
        })
        .take(dim)
        .map(|(w, _)| w.to_string())
        .collect();
    if content.len() < dim {
        return Err(Error::Corpus(format!(
            "basis size {dim} requested but only {} content words are available",
            content.len()
        )));
    }
    BasisSpec::new(content)
}
