//! Permutation-invariant polynomial observables of a matrix.
//!
//! Every catalog entry is a sum over index tuples whose listed indices are all
//! pairwise distinct. The fast evaluator rewrites each restricted sum through
//! inclusion-exclusion into unrestricted contractions (row/column sums, traces
//! of powers of the off-diagonal part) so that everything except `Mo32` and
//! `Mo42` costs `O(D^2)`; those two need one dense product `O(D^3)`.
//!
//! A directed multigraph gives an independent brute-force route: vertex `v` is
//! an index, edge `u -> v` is a factor `M_uv`, and the sum runs over injective
//! vertex labelings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Ensemble, WordMatrix};

/// The fixed catalog of invariants, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InvariantId {
    /// `Σ_i M_ii`
    Md1,
    /// `Σ_{i≠j} M_ij`
    Mo1,
    /// `Σ_i M_ii²`
    Md2,
    /// `Σ_{i≠j} M_ij²`
    Mo21,
    /// `Σ_{i≠j} M_ij M_ji`
    Mo22,
    /// `Σ_{i≠j} M_ii M_jj`
    Qdd,
    /// `Σ_{i≠j} M_ii M_ij`
    Qdio,
    /// `Σ_{i≠j} M_ij M_jj`
    Qoid,
    /// `Σ_{i≠j≠k} M_ij M_jk`
    Qchain,
    /// `Σ_{i≠j≠k} M_ij M_ik`
    Qout,
    /// `Σ_{i≠j≠k} M_ij M_kj`
    Qin,
    /// `Σ_{i≠j≠k} M_ij M_kk`
    Qodiag,
    /// `Σ_{i≠j≠k≠l} M_ij M_kl`
    Qdisc,
    /// `Σ_i M_ii³`
    Md3,
    /// `Σ_{i≠j} M_ij³`
    Mo31,
    /// `Σ_{i≠j≠k} M_ij M_jk M_ki`
    Mo32,
    /// `Σ_i M_ii⁴`
    Md4,
    /// `Σ_{i≠j} M_ij⁴`
    Mo41,
    /// `Σ_{i≠j≠k≠l} M_ij M_jk M_kl M_li`
    Mo42,
}

use InvariantId::*;

impl InvariantId {
    pub const ALL: [InvariantId; 19] = [
        Md1, Mo1, Md2, Mo21, Mo22, Qdd, Qdio, Qoid, Qchain, Qout, Qin, Qodiag, Qdisc, Md3, Mo31,
        Mo32, Md4, Mo41, Mo42,
    ];

    /// The quadratic invariants in their conventional listing order.
    pub const QUADRATIC: [InvariantId; 11] = [
        Md2, Mo21, Mo22, Qdd, Qdio, Qoid, Qchain, Qout, Qin, Qodiag, Qdisc,
    ];

    /// Linear and diagonal/off-diagonal quadratic averages that fix the model.
    pub const FIT: [InvariantId; 5] = [Md1, Mo1, Md2, Mo21, Mo22];

    /// Cubic and quartic observables predicted from the fitted model.
    pub const HIGHER: [InvariantId; 6] = [Md3, Mo31, Mo32, Md4, Mo41, Mo42];

    pub fn tag(self) -> &'static str {
        match self {
            Md1 => "Md1",
            Mo1 => "Mo1",
            Md2 => "Md2",
            Mo21 => "Mo21",
            Mo22 => "Mo22",
            Qdd => "Qdd",
            Qdio => "Qdio",
            Qoid => "Qoid",
            Qchain => "Qchain",
            Qout => "Qout",
            Qin => "Qin",
            Qodiag => "Qodiag",
            Qdisc => "Qdisc",
            Md3 => "Md3",
            Mo31 => "Mo31",
            Mo32 => "Mo32",
            Md4 => "Md4",
            Mo41 => "Mo41",
            Mo42 => "Mo42",
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Md1 | Mo1 => 1,
            Md3 | Mo31 | Mo32 => 3,
            Md4 | Mo41 | Mo42 => 4,
            _ => 2,
        }
    }

    /// Number of distinct summation indices.
    pub fn index_count(self) -> usize {
        match self {
            Md1 | Md2 | Md3 | Md4 => 1,
            Mo1 | Mo21 | Mo22 | Qdd | Qdio | Qoid | Mo31 | Mo41 => 2,
            Qchain | Qout | Qin | Qodiag | Mo32 => 3,
            Qdisc | Mo42 => 4,
        }
    }

    fn position(self) -> usize {
        self as usize
    }

    /// The directed multigraph whose injective-labeling sum is this invariant.
    pub fn graph(self) -> GraphInvariant {
        let (v, edges): (usize, &[(usize, usize)]) = match self {
            Md1 => (1, &[(0, 0)]),
            Mo1 => (2, &[(0, 1)]),
            Md2 => (1, &[(0, 0), (0, 0)]),
            Mo21 => (2, &[(0, 1), (0, 1)]),
            Mo22 => (2, &[(0, 1), (1, 0)]),
            Qdd => (2, &[(0, 0), (1, 1)]),
            Qdio => (2, &[(0, 0), (0, 1)]),
            Qoid => (2, &[(0, 1), (1, 1)]),
            Qchain => (3, &[(0, 1), (1, 2)]),
            Qout => (3, &[(0, 1), (0, 2)]),
            Qin => (3, &[(0, 1), (2, 1)]),
            Qodiag => (3, &[(0, 1), (2, 2)]),
            Qdisc => (4, &[(0, 1), (2, 3)]),
            Md3 => (1, &[(0, 0), (0, 0), (0, 0)]),
            Mo31 => (2, &[(0, 1), (0, 1), (0, 1)]),
            Mo32 => (3, &[(0, 1), (1, 2), (2, 0)]),
            Md4 => (1, &[(0, 0), (0, 0), (0, 0), (0, 0)]),
            Mo41 => (2, &[(0, 1), (0, 1), (0, 1), (0, 1)]),
            Mo42 => (4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
        };
        GraphInvariant::new(v, edges.to_vec()).expect("catalog graphs are well formed")
    }
}

impl fmt::Display for InvariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InvariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InvariantId::ALL
            .into_iter()
            .find(|id| id.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown invariant {s:?}")))
    }
}

/// Values of all catalog invariants of one matrix, indexed by catalog order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantValues([f64; 19]);

impl InvariantValues {
    pub fn get(&self, id: InvariantId) -> f64 {
        self.0[id.position()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (InvariantId, f64)> + '_ {
        InvariantId::ALL.into_iter().zip(self.0.iter().copied())
    }
}

/// Unrestricted contractions shared by the `O(D^2)` catalog entries.
struct Contractions {
    tr: f64,
    diag_pow: [f64; 4],
    /// `Σ_{i≠j} M_ij^p` for `p = 1..=4`.
    off_pow: [f64; 4],
    /// `Σ_{i≠j} M_ij M_ji`.
    off_pair: f64,
    row_dot_col_off: f64,
    row_off_sq: f64,
    col_off_sq: f64,
    diag_row: f64,
    diag_col: f64,
}

impl Contractions {
    fn of(m: &WordMatrix) -> Self {
        let d = m.dim();
        let mut row = vec![0.0; d];
        let mut col = vec![0.0; d];
        let mut c = Contractions {
            tr: 0.0,
            diag_pow: [0.0; 4],
            off_pow: [0.0; 4],
            off_pair: 0.0,
            row_dot_col_off: 0.0,
            row_off_sq: 0.0,
            col_off_sq: 0.0,
            diag_row: 0.0,
            diag_col: 0.0,
        };
        #[allow(clippy::needless_range_loop)]
        for i in 0..d {
            for j in 0..d {
                let x = m.get(i, j);
                row[i] += x;
                col[j] += x;
                if i == j {
                    continue;
                }
                let x2 = x * x;
                c.off_pow[0] += x;
                c.off_pow[1] += x2;
                c.off_pow[2] += x2 * x;
                c.off_pow[3] += x2 * x2;
                c.off_pair += x * m.get(j, i);
            }
        }
        for i in 0..d {
            let x = m.get(i, i);
            let x2 = x * x;
            c.tr += x;
            c.diag_pow[0] += x;
            c.diag_pow[1] += x2;
            c.diag_pow[2] += x2 * x;
            c.diag_pow[3] += x2 * x2;
            let r = row[i] - x;
            let k = col[i] - x;
            c.row_dot_col_off += r * k;
            c.row_off_sq += r * r;
            c.col_off_sq += k * k;
            c.diag_row += x * r;
            c.diag_col += x * k;
        }
        c
    }
}

/// `(tr(O^3), Mo42)` with `O` the off-diagonal part of `m`.
fn cycle_sums(m: &WordMatrix) -> (f64, f64) {
    let d = m.dim();
    let off = |i: usize, j: usize| if i == j { 0.0 } else { m.get(i, j) };
    let mut sq = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let a = off(i, j);
            if a == 0.0 {
                continue;
            }
            let dst = &mut sq[i * d..(i + 1) * d];
            for (k, out) in dst.iter_mut().enumerate() {
                *out += a * off(j, k);
            }
        }
    }
    let mut tr3 = 0.0;
    let mut tr4 = 0.0;
    let mut diag_sq = 0.0;
    let mut pair_sq = 0.0;
    for i in 0..d {
        diag_sq += sq[i * d + i] * sq[i * d + i];
        for k in 0..d {
            tr3 += sq[i * d + k] * off(k, i);
            tr4 += sq[i * d + k] * sq[k * d + i];
            if i != k {
                let (a, b) = (m.get(i, k), m.get(k, i));
                pair_sq += a * a * b * b;
            }
        }
    }
    // i = k and j = l coincidences removed from the unrestricted 4-cycle.
    (tr3, tr4 - 2.0 * diag_sq + pair_sq)
}

/// Evaluates every catalog invariant on `m`.
pub fn eval_all(m: &WordMatrix) -> InvariantValues {
    let c = Contractions::of(m);
    let mo1 = c.off_pow[0];
    let md2 = c.diag_pow[1];
    let mo21 = c.off_pow[1];
    let mo22 = c.off_pair;
    let qdio = c.diag_row;
    let qoid = c.diag_col;
    let qchain = c.row_dot_col_off - mo22;
    let qout = c.row_off_sq - mo21;
    let qin = c.col_off_sq - mo21;
    let (mo32, mo42) = cycle_sums(m);
    let mut out = InvariantValues([
        c.tr,
        mo1,
        md2,
        mo21,
        mo22,
        c.tr * c.tr - md2,
        qdio,
        qoid,
        qchain,
        qout,
        qin,
        mo1 * c.tr - qdio - qoid,
        mo1 * mo1 - qout - qin - 2.0 * qchain - mo21 - mo22,
        c.diag_pow[2],
        c.off_pow[2],
        mo32,
        c.diag_pow[3],
        c.off_pow[3],
        mo42,
    ]);
    for id in InvariantId::ALL {
        if id.index_count() > m.dim() {
            out.0[id.position()] = 0.0;
        }
    }
    out
}

/// Exact value of the restricted sum for `id`. Sums with more distinct
/// indices than `D` are empty and evaluate to 0.
pub fn eval_invariant(id: InvariantId, m: &WordMatrix) -> f64 {
    match id {
        Mo32 => cycle_sums(m).0,
        Mo42 => cycle_sums(m).1,
        _ => {
            if id.index_count() > m.dim() {
                0.0
            } else {
                eval_quick(id, m)
            }
        }
    }
}

fn eval_quick(id: InvariantId, m: &WordMatrix) -> f64 {
    let c = Contractions::of(m);
    let mo1 = c.off_pow[0];
    let md2 = c.diag_pow[1];
    let mo21 = c.off_pow[1];
    let mo22 = c.off_pair;
    let qchain = || c.row_dot_col_off - mo22;
    let qout = || c.row_off_sq - mo21;
    let qin = || c.col_off_sq - mo21;
    match id {
        Md1 => c.tr,
        Mo1 => mo1,
        Md2 => md2,
        Mo21 => mo21,
        Mo22 => mo22,
        Qdd => c.tr * c.tr - md2,
        Qdio => c.diag_row,
        Qoid => c.diag_col,
        Qchain => qchain(),
        Qout => qout(),
        Qin => qin(),
        Qodiag => mo1 * c.tr - c.diag_row - c.diag_col,
        Qdisc => mo1 * mo1 - qout() - qin() - 2.0 * qchain() - mo21 - mo22,
        Md3 => c.diag_pow[2],
        Mo31 => c.off_pow[2],
        Md4 => c.diag_pow[3],
        Mo41 => c.off_pow[3],
        Mo32 | Mo42 => unreachable!("cycle sums are handled by eval_invariant"),
    }
}

/// A directed multigraph with loops; edge `(u, v)` stands for `M_{φ(u) φ(v)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInvariant {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphInvariant {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Config("graph needs at least one vertex".into()));
        }
        let mut touched = vec![false; vertex_count];
        for &(u, v) in &edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::Config(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            touched[u] = true;
            touched[v] = true;
        }
        if let Some(v) = touched.iter().position(|t| !t) {
            return Err(Error::Config(format!("vertex {v} is isolated")));
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Polynomial degree, i.e. the number of edges.
    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

/// Brute-force sum over injective labelings of the graph's vertices by
/// matrix indices. Exponential in the vertex count; meant as an oracle.
pub fn eval_graph_invariant(g: &GraphInvariant, m: &WordMatrix) -> f64 {
    let d = m.dim();
    if g.vertex_count > d {
        return 0.0;
    }
    let mut labels = vec![usize::MAX; g.vertex_count];
    let mut used = vec![false; d];
    let mut total = 0.0;
    assign(g, m, 0, &mut labels, &mut used, &mut total);
    total
}

fn assign(
    g: &GraphInvariant,
    m: &WordMatrix,
    vertex: usize,
    labels: &mut [usize],
    used: &mut [bool],
    total: &mut f64,
) {
    if vertex == labels.len() {
        *total += g
            .edges
            .iter()
            .map(|&(u, v)| m.get(labels[u], labels[v]))
            .product::<f64>();
        return;
    }
    for idx in 0..m.dim() {
        if used[idx] {
            continue;
        }
        used[idx] = true;
        labels[vertex] = idx;
        assign(g, m, vertex + 1, labels, used, total);
        used[idx] = false;
    }
}

/// Mean of each requested invariant over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleAverages {
    pub dim: usize,
    pub count: usize,
    pub values: BTreeMap<InvariantId, f64>,
}

impl EnsembleAverages {
    pub fn get(&self, id: InvariantId) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn require(&self, id: InvariantId) -> Result<f64> {
        self.get(id).ok_or(Error::MissingAverage(id.tag()))
    }
}

/// Per-member invariant values, evaluated in parallel, returned in ensemble order.
pub fn member_values(e: &Ensemble) -> Vec<InvariantValues> {
    e.members().par_iter().map(eval_all).collect()
}

/// Arithmetic means in ensemble order. Members may be evaluated concurrently,
/// but the reduction is a left-to-right sum so results do not depend on the
/// thread count.
pub fn ensemble_averages(e: &Ensemble, ids: &[InvariantId]) -> EnsembleAverages {
    let per_member = member_values(e);
    averages_from_values(e.dim(), &per_member, ids)
}

pub fn averages_from_values(
    dim: usize,
    per_member: &[InvariantValues],
    ids: &[InvariantId],
) -> EnsembleAverages {
    let n = per_member.len() as f64;
    let values = ids
        .iter()
        .map(|&id| {
            let mut sum = 0.0;
            for v in per_member {
                sum += v.get(id);
            }
            (id, sum / n)
        })
        .collect();
    EnsembleAverages {
        dim,
        count: per_member.len(),
        values,
    }
}

/// Equal-width histogram over `[min, max]`, both ends closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin boundaries.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_count: usize) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::Config("bin_count must be at least 1".into()));
        }
        let Some(&first) = values.first() else {
            return Err(Error::Config("histogram of no values".into()));
        };
        let (lo, hi) = values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo == hi {
            return Ok(Self {
                edges: vec![lo, hi],
                counts: vec![values.len() as u64],
            });
        }
        let width = (hi - lo) / bin_count as f64;
        let mut counts = vec![0u64; bin_count];
        for &v in values {
            let idx = (((v - lo) / width).floor() as usize).min(bin_count - 1);
            counts[idx] += 1;
        }
        let mut edges: Vec<f64> = (0..bin_count).map(|k| lo + width * k as f64).collect();
        edges.push(hi);
        Ok(Self { edges, counts })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{:?},{:?},{c}\n", self.edges[k], self.edges[k + 1]));
        }
        out
    }
}

/// Distribution of entry `(i, j)` across the ensemble.
pub fn element_histogram(e: &Ensemble, i: usize, j: usize, bin_count: usize) -> Result<Histogram> {
    let d = e.dim();
    if i >= d || j >= d {
        return Err(Error::Config(format!(
            "entry ({i}, {j}) out of range for dimension {d}"
        )));
    }
    let values: Vec<f64> = e.members().iter().map(|m| m.get(i, j)).collect();
    Histogram::from_values(&values, bin_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::WordMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> WordMatrix {
        let v = (0..d * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        WordMatrix::new("r", d, v).unwrap()
    }

    #[test]
    fn identity_values() {
        let m = WordMatrix::identity("id", 4).unwrap();
        assert_eq!(eval_invariant(Md1, &m), 4.0);
        assert_eq!(eval_invariant(Md2, &m), 4.0);
        assert_eq!(eval_invariant(Qdd, &m), 12.0);
        assert_eq!(eval_invariant(Mo1, &m), 0.0);
        assert_eq!(eval_invariant(Mo32, &m), 0.0);
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let m = WordMatrix::zeros("z", 5).unwrap();
        for id in InvariantId::ALL {
            assert_eq!(eval_invariant(id, &m), 0.0, "{id}");
        }
    }

    #[test]
    fn disconnected_pair_vanishes_below_four_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 3);
            assert_eq!(eval_invariant(Qdisc, &m), 0.0);
            assert_eq!(eval_all(&m).get(Qdisc), 0.0);
            assert_eq!(eval_graph_invariant(&Qdisc.graph(), &m), 0.0);
        }
    }

    #[test]
    fn eval_all_matches_single_evaluations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=7 {
            let m = random_matrix(&mut rng, d);
            let all = eval_all(&m);
            for id in InvariantId::ALL {
                let one = eval_invariant(id, &m);
                let scale = one.abs().max(1.0);
                assert!((all.get(id) - one).abs() <= 1e-12 * scale, "{id} d={d}");
            }
        }
    }

    #[test]
    fn graph_evaluator_matches_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 5);
        for id in InvariantId::ALL {
            let fast = eval_invariant(id, &m);
            let slow = eval_graph_invariant(&id.graph(), &m);
            assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{id}");
        }
        let lp = GraphInvariant::new(1, vec![(0, 0)]).unwrap();
        assert_eq!(eval_graph_invariant(&lp, &m), eval_invariant(Md1, &m));
    }

    #[test]
    fn graph_validation() {
        assert!(GraphInvariant::new(3, vec![(0, 1)]).is_err());
        assert!(GraphInvariant::new(2, vec![(0, 2)]).is_err());
        assert!(GraphInvariant::new(0, vec![]).is_err());
        let g = GraphInvariant::new(2, vec![(0, 1), (1, 1)]).unwrap();
        assert_eq!(g.degree(), 2);
    }

    #[test]
    fn tags_round_trip() {
        for id in InvariantId::ALL {
            assert_eq!(id.tag().parse::<InvariantId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.tag()));
        }
        assert!("Mxx".parse::<InvariantId>().is_err());
    }

    #[test]
    fn averages_of_single_and_opposite_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 4);
        let one = Ensemble::new(vec![m.clone()]).unwrap();
        let avg = ensemble_averages(&one, &InvariantId::ALL);
        for id in InvariantId::ALL {
            assert_eq!(avg.get(id).unwrap(), eval_all(&m).get(id));
        }
        let neg = m.map(|x| -x).unwrap();
        let pair = Ensemble::new(vec![m, neg]).unwrap();
        let avg = ensemble_averages(&pair, &InvariantId::ALL);
        for id in [Md1, Mo1, Md3, Mo31, Mo32] {
            assert!(avg.get(id).unwrap().abs() < 1e-12, "{id}");
        }
        assert_eq!(avg.count, 2);
        let json = serde_json::to_value(&avg).unwrap();
        assert!(json["values"]["Mo42"].is_number());
    }

    #[test]
    fn histogram_binning() {
        let h = Histogram::from_values(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![0.0, 1.5, 3.0]);
        let flat = Histogram::from_values(&[0.25; 7], 4).unwrap();
        assert_eq!(flat.counts, vec![7]);
        assert!(Histogram::from_values(&[1.0], 0).is_err());
        assert!(h.to_csv().starts_with("bin_low,bin_high,count\n0.0,1.5,2\n"));
    }

    #[test]
    fn constant_entry_histogram() {
        let members = (0..6)
            .map(|k| {
                let mut v = vec![k as f64; 9];
                v[5] = 2.5;
                WordMatrix::new(format!("w{k}"), 3, v).unwrap()
            })
            .collect();
        let e = Ensemble::new(members).unwrap();
        let h = element_histogram(&e, 1, 2, 10).unwrap();
        assert_eq!(h.counts, vec![6]);
        let h = element_histogram(&e, 0, 0, 3).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 6);
        assert!(element_histogram(&e, 3, 0, 3).is_err());
    }
}
