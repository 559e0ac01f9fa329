//! Seeded generator for a small tagged corpus with planted adjective-noun
//! regularities.
//!
//! The vocabulary has three content layers. Context words (`ctx###|NN`) are
//! the most frequent and fill the basis. Nouns (`noun##|NN`) and adjectives
//! (`adj##|JJ`) each own a profile, a random subset of context words they
//! prefer. Every adjective modifies a fixed set of nouns; a sentence holding
//! the compound draws its context words from the adjective's profile, the
//! noun's profile, or uniformly. Nouns also appear alone. Function words
//! (`the|DT`, `of|IN`, ...) pad sentences and never enter the basis.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PairCounts;
use crate::error::{Error, Result};

const FUNCTION_WORDS: [(&str, &str); 6] = [
    ("the", "DT"),
    ("a", "DT"),
    ("of", "IN"),
    ("in", "IN"),
    ("with", "IN"),
    ("and", "CC"),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub context_words: usize,
    pub nouns: usize,
    pub adjectives: usize,
    pub args_per_adjective: usize,
    /// Sentences per planted (adjective, noun) pair.
    pub compound_repeats: usize,
    /// Sentences per noun without an adjective.
    pub noun_sentences: usize,
    pub contexts_per_sentence: usize,
    pub profile_size: usize,
    /// Probability that a context slot comes from a profile rather than uniformly.
    pub profile_weight: f64,
    /// Within profile slots of a compound sentence, the adjective's share.
    pub adjective_share: f64,
    /// Probability of a function word after each context word.
    pub function_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 20170,
            context_words: 120,
            nouns: 60,
            adjectives: 60,
            args_per_adjective: 5,
            compound_repeats: 20,
            noun_sentences: 40,
            contexts_per_sentence: 6,
            profile_size: 30,
            profile_weight: 0.6,
            adjective_share: 0.5,
            function_rate: 0.3,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic corpus: {m}")));
        if self.context_words == 0 || self.nouns == 0 || self.adjectives == 0 {
            return bad("word counts must be positive");
        }
        if self.args_per_adjective == 0 || self.args_per_adjective > self.nouns {
            return bad("args_per_adjective must be in 1..=nouns");
        }
        if self.profile_size == 0 || self.profile_size > self.context_words {
            return bad("profile_size must be in 1..=context_words");
        }
        for (name, p) in [
            ("profile_weight", self.profile_weight),
            ("adjective_share", self.adjective_share),
            ("function_rate", self.function_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

pub fn context_word(i: usize) -> String {
    format!("ctx{i:03}")
}

pub fn noun_word(i: usize) -> String {
    format!("noun{i:02}")
}

pub fn adjective_word(i: usize) -> String {
    format!("adj{i:02}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Corpus text, one tagged sentence per line.
    pub text: String,
    /// The planted pairs with their sentence counts.
    pub pairs: PairCounts,
}

struct Generator<'a> {
    cfg: &'a SyntheticConfig,
    rng: ChaCha8Rng,
    out: String,
}

impl Generator<'_> {
    fn profile(&mut self) -> Vec<usize> {
        let mut p = sample_indices(&mut self.rng, self.cfg.context_words, self.cfg.profile_size).into_vec();
        p.sort_unstable();
        p
    }

    fn context(&mut self, profiles: &[(&[usize], f64)]) -> usize {
        if self.rng.random::<f64>() < self.cfg.profile_weight {
            let mut u = self.rng.random::<f64>();
            for (profile, share) in profiles {
                if u < *share {
                    return profile[self.rng.random_range(0..profile.len())];
                }
                u -= share;
            }
        }
        self.rng.random_range(0..self.cfg.context_words)
    }

    fn push_contexts(&mut self, contexts: &[usize]) {
        for &c in contexts {
            self.out.push_str(&context_word(c));
            self.out.push_str("|NN ");
            if self.rng.random::<f64>() < self.cfg.function_rate {
                let (w, t) = FUNCTION_WORDS[self.rng.random_range(0..FUNCTION_WORDS.len())];
                self.out.push_str(w);
                self.out.push('|');
                self.out.push_str(t);
                self.out.push(' ');
            }
        }
    }

    /// Context words split around the core tokens, then a newline.
    fn sentence(&mut self, core: &str, profiles: &[(&[usize], f64)]) {
        let k = self.cfg.contexts_per_sentence;
        let contexts: Vec<usize> = (0..k).map(|_| self.context(profiles)).collect();
        let left = self.rng.random_range(0..=k);
        self.push_contexts(&contexts[..left]);
        self.out.push_str(core);
        self.out.push(' ');
        self.push_contexts(&contexts[left..]);
        self.out.pop();
        self.out.push('\n');
    }
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut g = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        out: String::new(),
    };
    let noun_profiles: Vec<Vec<usize>> = (0..cfg.nouns).map(|_| g.profile()).collect();
    let adj_profiles: Vec<Vec<usize>> = (0..cfg.adjectives).map(|_| g.profile()).collect();
    let arguments: Vec<Vec<usize>> = (0..cfg.adjectives)
        .map(|_| {
            let mut a = sample_indices(&mut g.rng, cfg.nouns, cfg.args_per_adjective).into_vec();
            a.sort_unstable();
            a
        })
        .collect();

    let mut pairs = PairCounts::default();
    for (n, profile) in noun_profiles.iter().enumerate() {
        let core = format!("the|DT {}|NN", noun_word(n));
        for _ in 0..cfg.noun_sentences {
            g.sentence(&core, &[(profile, 1.0)]);
        }
    }
    for (a, args) in arguments.iter().enumerate() {
        for &n in args {
            let core = format!("{}|JJ {}|NN", adjective_word(a), noun_word(n));
            let profiles: [(&[usize], f64); 2] = [
                (&adj_profiles[a], cfg.adjective_share),
                (&noun_profiles[n], 1.0 - cfg.adjective_share),
            ];
            for _ in 0..cfg.compound_repeats {
                g.sentence(&core, &profiles);
            }
            pairs.add(&adjective_word(a), &noun_word(n), cfg.compound_repeats as u64);
        }
    }
    Ok(SyntheticCorpus { text: g.out, pairs })
}
