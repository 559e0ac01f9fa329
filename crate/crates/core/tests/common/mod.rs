//! Helpers shared by the integration tests: a brute-force invariant oracle,
//! random matrices and a quadratic co-occurrence scan.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordmat::corpus::{BasisSpec, TokenizedCorpus};
use wordmat::{InvariantId, WordMatrix};

/// Calls `f` for every tuple of `k` pairwise distinct indices below `d`.
fn distinct_tuples(d: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(d: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in 0..d {
            if !cur.contains(&i) {
                cur.push(i);
                go(d, k, cur, f);
                cur.pop();
            }
        }
    }
    go(d, k, &mut Vec::with_capacity(k), f);
}

/// Nested-loop value of an invariant, plus the sum of absolute values of its terms.
pub fn oracle(id: InvariantId, m: &WordMatrix) -> (f64, f64) {
    use InvariantId::*;
    let g = |i: usize, j: usize| m.get(i, j);
    let term = |x: &[usize]| -> f64 {
        match id {
            Md1 => g(x[0], x[0]),
            Mo1 => g(x[0], x[1]),
            Md2 => g(x[0], x[0]).powi(2),
            Mo21 => g(x[0], x[1]).powi(2),
            Mo22 => g(x[0], x[1]) * g(x[1], x[0]),
            Qdd => g(x[0], x[0]) * g(x[1], x[1]),
            Qdio => g(x[0], x[0]) * g(x[0], x[1]),
            Qoid => g(x[0], x[1]) * g(x[1], x[1]),
            Qchain => g(x[0], x[1]) * g(x[1], x[2]),
            Qout => g(x[0], x[1]) * g(x[0], x[2]),
            Qin => g(x[0], x[1]) * g(x[2], x[1]),
            Qodiag => g(x[0], x[1]) * g(x[2], x[2]),
            Qdisc => g(x[0], x[1]) * g(x[2], x[3]),
            Md3 => g(x[0], x[0]).powi(3),
            Mo31 => g(x[0], x[1]).powi(3),
            Mo32 => g(x[0], x[1]) * g(x[1], x[2]) * g(x[2], x[0]),
            Md4 => g(x[0], x[0]).powi(4),
            Mo41 => g(x[0], x[1]).powi(4),
            Mo42 => g(x[0], x[1]) * g(x[1], x[2]) * g(x[2], x[3]) * g(x[3], x[0]),
        }
    };
    let arity = match id {
        Md1 | Md2 | Md3 | Md4 => 1,
        Mo1 | Mo21 | Mo22 | Qdd | Qdio | Qoid | Mo31 | Mo41 => 2,
        Qchain | Qout | Qin | Qodiag | Mo32 => 3,
        Qdisc | Mo42 => 4,
    };
    let (mut sum, mut abs) = (0.0, 0.0);
    distinct_tuples(m.dim(), arity, &mut |x| {
        let t = term(x);
        sum += t;
        abs += t.abs();
    });
    (sum, abs)
}

/// Entries uniform in `[-1, 1)` plus a random common shift, so that sums with
/// and without cancellation both occur.
pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> WordMatrix {
    let shift = rng.random_range(-1.0..1.0);
    let values = (0..d * d).map(|_| shift + rng.random_range(-1.0..1.0)).collect();
    WordMatrix::new("random", d, values).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_permutation(rng: &mut ChaCha8Rng, d: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// Window co-occurrence by comparing every pair of positions in each sentence.
pub fn scan_count(corpus: &TokenizedCorpus, target: &str, context: &str, window: usize) -> u64 {
    let (Some(t), Some(c)) = (corpus.id(target), corpus.id(context)) else {
        return 0;
    };
    let mut n = 0;
    for s in corpus.sentences() {
        let toks = s.tokens();
        for p in 0..toks.len() {
            for q in 0..toks.len() {
                if p != q && toks[p] == t && toks[q] == c && p.abs_diff(q) <= window {
                    n += 1;
                }
            }
        }
    }
    n
}

pub fn basis_of(words: &[&str]) -> BasisSpec {
    BasisSpec::new(words.iter().map(|w| w.to_string()).collect()).unwrap()
}
