//! PPMI vectors for argument nouns and for (head, noun) compounds.
//!
//! Vector files hold several rows over one basis:
//!
//! ```text
//! dim 3
//! count 2
//! car 0.0 1.25 0.5
//! road 0.75 0.0 0.0
//! ```
//!
//! Leading `#` lines are comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ppmi_value, CoocTable, TargetClass, TokenizedCorpus};
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistVector {
    pub word: String,
    pub values: Vec<f64>,
}

pub fn build_noun_vectors(table: &CoocTable, nouns: &[String]) -> Result<Vec<DistVector>> {
    let n = table.total_tokens();
    let cf = table.context_frequencies();
    nouns
        .iter()
        .map(|noun| {
            let ft = table.target_frequency(noun)?;
            if ft == 0 {
                return Err(Error::UnknownWord(noun.clone()));
            }
            let values = table
                .row(noun)?
                .iter()
                .zip(cf)
                .map(|(&ct, &fc)| if fc == 0 { 0.0 } else { ppmi_value(ct, ft, fc, n) })
                .collect();
            Ok(DistVector {
                word: noun.clone(),
                values,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundWarning {
    pub target: String,
    pub noun: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundVectors {
    pub target: String,
    /// One vector per noun with at least one compound occurrence, input order.
    pub vectors: Vec<DistVector>,
    pub occurrences: Vec<u64>,
    pub warnings: Vec<CompoundWarning>,
}

/// Vectors of the compounds `target noun`.
///
/// An adjective (or unclassified head) forms a compound with a noun directly
/// after it; a verb forms one with the first listed noun at distance
/// `1..=window` to its right. The compound counts as one token spanning both
/// positions: its contexts are the basis tokens within `window` to the left of
/// the head and to the right of the noun. `count(t)` is the number of compound
/// occurrences; `count(c)` and `N` are the corpus unigram statistics.
pub fn build_compound_vectors(
    corpus: &TokenizedCorpus,
    table: &CoocTable,
    target: &str,
    class: TargetClass,
    nouns: &[String],
) -> Result<CompoundVectors> {
    let head = corpus
        .id(target)
        .ok_or_else(|| Error::UnknownWord(target.to_string()))?;
    let mut noun_row = HashMap::with_capacity(nouns.len());
    for (k, noun) in nouns.iter().enumerate() {
        let id = corpus
            .id(noun)
            .ok_or_else(|| Error::UnknownWord(noun.clone()))?;
        noun_row.insert(id, k);
    }
    let basis = table.basis();
    let d = basis.dim();
    let col_of: HashMap<u32, usize> = basis
        .words()
        .iter()
        .enumerate()
        .filter_map(|(i, w)| corpus.id(w).map(|id| (id, i)))
        .collect();
    let window = table.window();

    let mut counts = vec![0u64; nouns.len() * d];
    let mut occurrences = vec![0u64; nouns.len()];
    for s in corpus.sentences() {
        let toks = s.tokens();
        for start in 0..toks.len() {
            if toks[start] != head {
                continue;
            }
            let reach = match class {
                TargetClass::Verb => window,
                TargetClass::Adjective | TargetClass::Unclassified => 1,
            };
            let hi = (start + reach).min(toks.len() - 1);
            let Some((end, row)) = (start + 1..=hi)
                .find_map(|q| noun_row.get(&toks[q]).map(|&row| (q, row)))
            else {
                continue;
            };
            occurrences[row] += 1;
            let left = start.saturating_sub(window)..start;
            let right = end + 1..(end + window + 1).min(toks.len());
            for q in left.chain(right) {
                if let Some(&col) = col_of.get(&toks[q]) {
                    counts[row * d + col] += 1;
                }
            }
        }
    }

    let n = table.total_tokens();
    let cf = table.context_frequencies();
    let mut vectors = Vec::new();
    let mut kept = Vec::new();
    let mut warnings = Vec::new();
    for (k, noun) in nouns.iter().enumerate() {
        let occ = occurrences[k];
        if occ == 0 {
            warnings.push(CompoundWarning {
                target: target.to_string(),
                noun: noun.clone(),
                reason: "no compound occurrences".into(),
            });
            continue;
        }
        let values = counts[k * d..(k + 1) * d]
            .iter()
            .zip(cf)
            .map(|(&ct, &fc)| if fc == 0 { 0.0 } else { ppmi_value(ct, occ, fc, n) })
            .collect();
        vectors.push(DistVector {
            word: noun.clone(),
            values,
        });
        kept.push(occ);
    }
    Ok(CompoundVectors {
        target: target.to_string(),
        vectors,
        occurrences: kept,
        warnings,
    })
}

pub fn format_vectors(dim: usize, vectors: &[DistVector], comment: Option<&str>) -> Result<String> {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "dim {dim}");
    let _ = writeln!(out, "count {}", vectors.len());
    for v in vectors {
        if v.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.values.len(),
            });
        }
        if v.word.is_empty() || v.word.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("invalid vector label {:?}", v.word)));
        }
        out.push_str(&v.word);
        for x in &v.values {
            let _ = write!(out, " {x:?}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Returns the basis dimension and the rows.
pub fn parse_vectors(text: &str, origin: &Path) -> Result<(usize, Vec<DistVector>)> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .skip_while(|(_, l)| l.starts_with('#'));
    let mut header = |key: &str| -> Result<usize> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}` header")))?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| err(no, format!("expected `{key} <n>`")))
    };
    let dim = header("dim")?;
    let count = header("count")?;
    let mut vectors = Vec::with_capacity(count);
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap_or_default().to_string();
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(no, format!("invalid value {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(err(no, format!("expected {dim} values, found {}", values.len())));
        }
        vectors.push(DistVector { word, values });
    }
    if vectors.len() != count {
        return Err(err(0, format!("header says {count} rows, found {}", vectors.len())));
    }
    Ok((dim, vectors))
}

pub fn read_vectors(path: impl AsRef<Path>) -> Result<(usize, Vec<DistVector>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_vectors(&text, path)
}

pub fn write_vectors(
    path: impl AsRef<Path>,
    dim: usize,
    vectors: &[DistVector],
    comment: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_vectors(dim, vectors, comment)?).map_err(io_err(path))
}
