//! Corpus ingestion: reading tokenized text, frequencies, context basis,
//! windowed co-occurrence counts with PPMI weighting, dataset selection and
//! distributional vectors.
//!
//! Corpus format: one sentence per line, tokens separated by whitespace, each
//! token either `word` or `word|TAG`. Blank lines and lines starting with `#`
//! are skipped.

mod basis;
mod cooc;
mod dataset;
pub mod synthetic;
mod vectors;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

pub use basis::{select_basis, BasisSpec, DEFAULT_STOPWORDS};
pub use cooc::{count_cooccurrence, ppmi_value, CoocTable, DEFAULT_WINDOW};
pub use dataset::{
    extract_pairs, select_dataset, Argument, DatasetSelection, DatasetTarget, PairCounts,
    TargetClass, Thresholds,
};
pub use vectors::{
    build_compound_vectors, build_noun_vectors, format_vectors, parse_vectors, read_vectors,
    write_vectors, CompoundVectors, CompoundWarning, DistVector,
};

/// Coarse part-of-speech class derived from a Penn or Universal tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosClass {
    pub fn from_tag(tag: &str) -> Self {
        let t = tag.to_ascii_uppercase();
        match t.as_str() {
            "NOUN" | "PROPN" => return PosClass::Noun,
            "VERB" => return PosClass::Verb,
            "ADJ" => return PosClass::Adjective,
            "ADV" => return PosClass::Adverb,
            _ => {}
        }
        if t.starts_with("NN") {
            PosClass::Noun
        } else if t.starts_with("VB") {
            PosClass::Verb
        } else if t.starts_with("JJ") {
            PosClass::Adjective
        } else if t.starts_with("RB") {
            PosClass::Adverb
        } else {
            PosClass::Other
        }
    }

    pub fn is_content(self) -> bool {
        self != PosClass::Other
    }

    const COUNT: usize = 5;

    fn index(self) -> usize {
        self as usize
    }

    fn from_index(i: usize) -> Self {
        [
            PosClass::Noun,
            PosClass::Verb,
            PosClass::Adjective,
            PosClass::Adverb,
            PosClass::Other,
        ][i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<u32>,
    tags: Vec<Option<PosClass>>,
}

impl Sentence {
    /// Word ids in order.
    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn tags(&self) -> &[Option<PosClass>] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Sentences of interned tokens with per-word frequency and tag statistics.
#[derive(Debug, Clone, Default)]
pub struct TokenizedCorpus {
    words: Vec<String>,
    index: HashMap<String, u32>,
    sentences: Vec<Sentence>,
    frequency: Vec<u64>,
    tag_counts: Vec<[u64; PosClass::COUNT]>,
    token_count: u64,
    tagged: bool,
}

impl TokenizedCorpus {
    pub fn parse(text: &str) -> Self {
        let mut corpus = Self::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            corpus.push_sentence(line.split_whitespace().map(split_token));
        }
        corpus
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(Self::parse(&text))
    }

    /// Appends a sentence of `(word, tag)` tokens. Empty sentences are dropped.
    pub fn push_sentence<'a>(&mut self, tokens: impl IntoIterator<Item = (&'a str, Option<&'a str>)>) {
        let mut sentence = Sentence {
            tokens: Vec::new(),
            tags: Vec::new(),
        };
        for (word, tag) in tokens {
            let id = self.intern(word);
            let class = tag.map(PosClass::from_tag);
            if let Some(c) = class {
                self.tag_counts[id as usize][c.index()] += 1;
                self.tagged = true;
            }
            self.frequency[id as usize] += 1;
            sentence.tokens.push(id);
            sentence.tags.push(class);
        }
        if !sentence.is_empty() {
            self.token_count += sentence.len() as u64;
            self.sentences.push(sentence);
        }
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        self.frequency.push(0);
        self.tag_counts.push([0; PosClass::COUNT]);
        id
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    /// Total number of tokens, `N` in the PMI formula.
    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn frequency(&self, word: &str) -> u64 {
        self.id(word).map_or(0, |id| self.frequency[id as usize])
    }

    pub fn is_tagged(&self) -> bool {
        self.tagged
    }

    /// Most frequent tag class of a word; ties go to the earlier class in
    /// `Noun, Verb, Adjective, Adverb, Other`. `None` if never tagged.
    pub fn majority_class(&self, word: &str) -> Option<PosClass> {
        let counts = &self.tag_counts[self.id(word)? as usize];
        let (best, &n) = counts
            .iter()
            .enumerate()
            .fold((0, &0), |acc, (i, c)| if *c > *acc.1 { (i, c) } else { acc });
        (n > 0).then(|| PosClass::from_index(best))
    }

    /// Writes the corpus back in the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            for (k, (&id, tag)) in s.tokens.iter().zip(&s.tags).enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                out.push_str(self.word(id));
                if let Some(t) = tag {
                    let _ = write!(out, "|{}", tag_label(*t));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn split_token(raw: &str) -> (&str, Option<&str>) {
    match raw.rsplit_once('|') {
        Some((w, t)) if !w.is_empty() && !t.is_empty() => (w, Some(t)),
        _ => (raw, None),
    }
}

fn tag_label(c: PosClass) -> &'static str {
    match c {
        PosClass::Noun => "NOUN",
        PosClass::Verb => "VERB",
        PosClass::Adjective => "ADJ",
        PosClass::Adverb => "ADV",
        PosClass::Other => "X",
    }
}

/// Surface-form frequencies.
pub fn build_vocab(corpus: &TokenizedCorpus) -> Result<BTreeMap<String, u64>> {
    if corpus.token_count() == 0 {
        return Err(Error::Corpus("empty corpus".into()));
    }
    Ok(corpus
        .words
        .iter()
        .zip(&corpus.frequency)
        .map(|(w, &f)| (w.clone(), f))
        .collect())
}

/// Words sorted by decreasing frequency, ties lexicographic.
pub fn ranked_words(vocab: &BTreeMap<String, u64>) -> Vec<(&str, u64)> {
    let mut ranked: Vec<(&str, u64)> = vocab.iter().map(|(w, &f)| (w.as_str(), f)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
}

/// `word<TAB>count` lines in rank order.
pub fn format_frequencies(vocab: &BTreeMap<String, u64>) -> String {
    let mut out = String::new();
    for (w, f) in ranked_words(vocab) {
        let _ = writeln!(out, "{w}\t{f}");
    }
    out
}
