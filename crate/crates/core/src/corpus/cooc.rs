use std::collections::HashMap;

use rayon::prelude::*;

use super::{BasisSpec, TokenizedCorpus};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 5;

/// Windowed co-occurrence counts of target words against basis words.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocTable {
    window: usize,
    basis: BasisSpec,
    targets: Vec<String>,
    target_index: HashMap<String, usize>,
    /// `targets.len() x basis.dim()`, row-major.
    counts: Vec<u64>,
    target_freq: Vec<u64>,
    context_freq: Vec<u64>,
    total: u64,
}

/// Counts, for each target occurrence, the basis tokens at distance
/// `1..=window` inside the same sentence.
pub fn count_cooccurrence(
    corpus: &TokenizedCorpus,
    targets: &[String],
    basis: &BasisSpec,
    window: usize,
) -> Result<CoocTable> {
    let mut target_index = HashMap::with_capacity(targets.len());
    for (k, t) in targets.iter().enumerate() {
        if target_index.insert(t.clone(), k).is_some() {
            return Err(Error::Config(format!("duplicate target {t:?}")));
        }
    }
    let d = basis.dim();
    // Word id -> row / column, so the scan never touches strings.
    let mut row_of = vec![usize::MAX; corpus.word_count()];
    let mut col_of = vec![usize::MAX; corpus.word_count()];
    for (t, &k) in &target_index {
        if let Some(id) = corpus.id(t) {
            row_of[id as usize] = k;
        }
    }
    for (i, w) in basis.words().iter().enumerate() {
        if let Some(id) = corpus.id(w) {
            col_of[id as usize] = i;
        }
    }

    let counts = corpus
        .sentences()
        .par_iter()
        .fold(
            || vec![0u64; targets.len() * d],
            |mut acc, s| {
                let toks = s.tokens();
                for (p, &tok) in toks.iter().enumerate() {
                    let row = row_of[tok as usize];
                    if row == usize::MAX {
                        continue;
                    }
                    let lo = p.saturating_sub(window);
                    let hi = (p + window).min(toks.len() - 1);
                    for (q, &ctx) in toks.iter().enumerate().take(hi + 1).skip(lo) {
                        let col = col_of[ctx as usize];
                        if q != p && col != usize::MAX {
                            acc[row * d + col] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; targets.len() * d],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    Ok(CoocTable {
        window,
        target_freq: targets.iter().map(|t| corpus.frequency(t)).collect(),
        context_freq: basis.words().iter().map(|c| corpus.frequency(c)).collect(),
        basis: basis.clone(),
        targets: targets.to_vec(),
        target_index,
        counts,
        total: corpus.token_count(),
    })
}

/// `max(0, ln(count_ct · n / (count_t · count_c)))`, zero when `count_ct = 0`.
pub fn ppmi_value(count_ct: u64, count_t: u64, count_c: u64, n: u64) -> f64 {
    if count_ct == 0 {
        return 0.0;
    }
    let ratio = (count_ct as f64 * n as f64) / (count_t as f64 * count_c as f64);
    ratio.ln().max(0.0)
}

impl CoocTable {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    fn target_row(&self, t: &str) -> Result<usize> {
        self.target_index
            .get(t)
            .copied()
            .ok_or_else(|| Error::UnknownWord(t.to_string()))
    }

    fn context_col(&self, c: &str) -> Result<usize> {
        self.basis
            .index_of(c)
            .ok_or_else(|| Error::UnknownWord(c.to_string()))
    }

    pub fn count(&self, t: &str, c: &str) -> Result<u64> {
        let (row, col) = (self.target_row(t)?, self.context_col(c)?);
        Ok(self.counts[row * self.basis.dim() + col])
    }

    pub fn row(&self, t: &str) -> Result<&[u64]> {
        let row = self.target_row(t)?;
        let d = self.basis.dim();
        Ok(&self.counts[row * d..(row + 1) * d])
    }

    pub fn target_frequency(&self, t: &str) -> Result<u64> {
        Ok(self.target_freq[self.target_row(t)?])
    }

    pub(crate) fn context_frequencies(&self) -> &[u64] {
        &self.context_freq
    }

    pub fn ppmi(&self, t: &str, c: &str) -> Result<f64> {
        let (row, col) = (self.target_row(t)?, self.context_col(c)?);
        let (ft, fc) = (self.target_freq[row], self.context_freq[col]);
        if ft == 0 {
            return Err(Error::UnknownWord(t.to_string()));
        }
        if fc == 0 {
            return Err(Error::UnknownWord(c.to_string()));
        }
        Ok(ppmi_value(
            self.counts[row * self.basis.dim() + col],
            ft,
            fc,
            self.total,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(words: &[&str]) -> BasisSpec {
        BasisSpec::new(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn targets(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn window_counts() {
        let c = TokenizedCorpus::parse("x y z\n");
        let b = basis(&["y", "z"]);
        let wide = count_cooccurrence(&c, &targets(&["x"]), &b, 5).unwrap();
        assert_eq!(wide.count("x", "y").unwrap(), 1);
        assert_eq!(wide.count("x", "z").unwrap(), 1);
        let narrow = count_cooccurrence(&c, &targets(&["x"]), &b, 1).unwrap();
        assert_eq!(narrow.count("x", "y").unwrap(), 1);
        assert_eq!(narrow.count("x", "z").unwrap(), 0);
    }

    #[test]
    fn sentences_are_boundaries() {
        let c = TokenizedCorpus::parse("x\ny\n");
        let t = count_cooccurrence(&c, &targets(&["x"]), &basis(&["y"]), 5).unwrap();
        assert_eq!(t.count("x", "y").unwrap(), 0);
    }

    #[test]
    fn self_pairs_use_other_positions() {
        let c = TokenizedCorpus::parse("x x\n");
        let t = count_cooccurrence(&c, &targets(&["x"]), &basis(&["x"]), 5).unwrap();
        assert_eq!(t.count("x", "x").unwrap(), 2);
    }

    #[test]
    fn counting_is_symmetric() {
        let c = TokenizedCorpus::parse("a b c a d\nb a c c\nd d a\n");
        let all = targets(&["a", "b", "c", "d"]);
        let b = basis(&["a", "b", "c", "d"]);
        let t = count_cooccurrence(&c, &all, &b, 2).unwrap();
        for x in &all {
            for y in &all {
                assert_eq!(t.count(x, y).unwrap(), t.count(y, x).unwrap());
            }
        }
    }

    #[test]
    fn ppmi_hand_values() {
        assert!((ppmi_value(4, 8, 4, 16) - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(ppmi_value(2, 4, 8, 16), 0.0);
        assert_eq!(ppmi_value(0, 4, 8, 16), 0.0);
        assert_eq!(ppmi_value(1, 8, 8, 16), 0.0);
    }

    #[test]
    fn unknown_words() {
        let c = TokenizedCorpus::parse("x y\n");
        let t = count_cooccurrence(&c, &targets(&["x", "ghost"]), &basis(&["y"]), 5).unwrap();
        assert!(matches!(t.count("zzz", "y"), Err(Error::UnknownWord(_))));
        assert!(matches!(t.ppmi("ghost", "y"), Err(Error::UnknownWord(_))));
        assert!(t.ppmi("x", "y").unwrap() >= 0.0);
        assert!(count_cooccurrence(&c, &targets(&["x", "x"]), &basis(&["y"]), 5).is_err());
    }
}
