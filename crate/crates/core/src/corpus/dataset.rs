use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PosClass, TokenizedCorpus};
use crate::error::{io_err, Error, Result};

/// Head-word class. Heads of an untagged corpus are `Unclassified` and use
/// the adjective compound rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetClass {
    Adjective,
    Verb,
    Unclassified,
}

impl TargetClass {
    pub fn name(self) -> &'static str {
        match self {
            TargetClass::Adjective => "adjective",
            TargetClass::Verb => "verb",
            TargetClass::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum corpus frequency of a head word.
    pub min_target_freq: u64,
    /// Number of most frequent heads of each class to discard.
    pub drop_top: usize,
    /// Minimum count of a (head, argument) pair.
    pub min_pair_count: u64,
    /// Minimum number of surviving arguments.
    pub min_args: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_target_freq: 1000,
            drop_top: 100,
            min_pair_count: 100,
            min_args: 100,
        }
    }
}

/// (head, argument) -> count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts(pub BTreeMap<String, BTreeMap<String, u64>>);

impl PairCounts {
    pub fn add(&mut self, head: &str, arg: &str, count: u64) {
        *self
            .0
            .entry(head.to_string())
            .or_default()
            .entry(arg.to_string())
            .or_insert(0) += count;
    }

    pub fn heads(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn arguments(&self, head: &str) -> Option<&BTreeMap<String, u64>> {
        self.0.get(head)
    }

    /// Tab-separated `head argument count` lines. Blank and `#` lines are skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut pairs = Self::default();
        for (k, line) in text.lines().enumerate() {
            let err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: k + 1,
                message,
            };
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [head, arg, count] = fields[..] else {
                return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            if head.is_empty() || arg.is_empty() {
                return Err(err("empty head or argument".into()));
            }
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid count {count:?}")))?;
            if count == 0 {
                return Err(err("pair count must be positive".into()));
            }
            pairs.add(head, arg, count);
        }
        Ok(pairs)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (h, args) in &self.0 {
            for (a, c) in args {
                let _ = writeln!(out, "{h}\t{a}\t{c}");
            }
        }
        out
    }
}

/// Pairs from a tagged corpus by adjacency: an adjective directly followed by
/// a noun, and a verb with the first noun at distance `1..=window` to its right.
pub fn extract_pairs(corpus: &TokenizedCorpus, window: usize) -> PairCounts {
    let mut pairs = PairCounts::default();
    for s in corpus.sentences() {
        let (toks, tags) = (s.tokens(), s.tags());
        for p in 0..toks.len() {
            match tags[p] {
                Some(PosClass::Adjective) => {
                    if tags.get(p + 1) == Some(&Some(PosClass::Noun)) {
                        pairs.add(corpus.word(toks[p]), corpus.word(toks[p + 1]), 1);
                    }
                }
                Some(PosClass::Verb) => {
                    let hi = (p + window).min(toks.len() - 1);
                    if let Some(q) = (p + 1..=hi).find(|&q| tags[q] == Some(PosClass::Noun)) {
                        pairs.add(corpus.word(toks[p]), corpus.word(toks[q]), 1);
                    }
                }
                _ => {}
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub noun: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetTarget {
    pub word: String,
    pub class: TargetClass,
    pub frequency: u64,
    pub arguments: Vec<Argument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSelection {
    pub thresholds: Thresholds,
    /// Sorted by class, then word.
    pub targets: Vec<DatasetTarget>,
}

impl DatasetSelection {
    pub fn of_class(&self, class: TargetClass) -> impl Iterator<Item = &DatasetTarget> {
        self.targets.iter().filter(move |t| t.class == class)
    }

    /// Every argument noun, sorted and deduplicated.
    pub fn nouns(&self) -> Vec<String> {
        let mut all: Vec<String> = self
            .targets
            .iter()
            .flat_map(|t| t.arguments.iter().map(|a| a.noun.clone()))
            .collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Applies the frequency, drop-top, pair-count and argument-count filters in
/// that order. Tagged heads whose majority class is neither adjective nor
/// verb are ignored.
pub fn select_dataset(
    corpus: &TokenizedCorpus,
    pairs: &PairCounts,
    thresholds: &Thresholds,
) -> Result<DatasetSelection> {
    let mut by_class: BTreeMap<TargetClass, Vec<(&str, u64)>> = BTreeMap::new();
    for head in pairs.heads() {
        let class = match corpus.majority_class(head) {
            Some(PosClass::Adjective) => TargetClass::Adjective,
            Some(PosClass::Verb) => TargetClass::Verb,
            Some(_) => continue,
            None => TargetClass::Unclassified,
        };
        let freq = corpus.frequency(head);
        if freq >= thresholds.min_target_freq {
            by_class.entry(class).or_default().push((head, freq));
        }
    }

    let min_args = thresholds.min_args.max(1);
    let mut targets = Vec::new();
    for (class, mut heads) in by_class {
        heads.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for &(head, frequency) in heads.iter().skip(thresholds.drop_top) {
            let arguments: Vec<Argument> = pairs
                .arguments(head)
                .into_iter()
                .flatten()
                .filter(|(_, &c)| c >= thresholds.min_pair_count)
                .map(|(n, &c)| Argument {
                    noun: n.clone(),
                    count: c,
                })
                .collect();
            if arguments.len() >= min_args {
                targets.push(DatasetTarget {
                    word: head.to_string(),
                    class,
                    frequency,
                    arguments,
                });
            }
        }
    }
    targets.sort_by(|a, b| a.class.cmp(&b.class).then_with(|| a.word.cmp(&b.word)));
    Ok(DatasetSelection {
        thresholds: *thresholds,
        targets,
    })
}
