//! Number of linearly independent degree-`k` polynomials in the entries of a
//! `D x D` matrix that are invariant under simultaneous row/column relabeling.
//!
//! The count is the dimension of the invariant subspace of `Sym^k(V ⊗ V)`
//! with `V` the natural permutation representation. Averaging characters over
//! `S_D x S_k` and grouping by cycle type gives a double sum over partitions
//! `p ⊢ D`, `q ⊢ k`:
//!
//! ```text
//! Σ_p Σ_q  1/(z_p z_q) · Π_{i=1..k} (Σ_{l | i} l·p_l)^(2 q_i)
//! ```
//!
//! where `z_p = Π_i i^{p_i} p_i!` and `Σ_{l|i} l·p_l` is the number of fixed
//! points of `σ^i` for `σ` of cycle type `p`. All arithmetic is exact.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::invariants::{GraphInvariant, InvariantId};

/// An integer partition stored as part size -> multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    multiplicities: BTreeMap<usize, usize>,
}

impl Partition {
    pub fn from_parts(parts: &[usize]) -> Result<Self> {
        let mut multiplicities = BTreeMap::new();
        for &p in parts {
            if p == 0 {
                return Err(Error::Config("partition parts must be positive".into()));
            }
            *multiplicities.entry(p).or_insert(0) += 1;
        }
        Ok(Self { multiplicities })
    }

    pub fn weight(&self) -> usize {
        self.multiplicities.iter().map(|(i, c)| i * c).sum()
    }

    /// Number of parts of size `i` (`p_i`).
    pub fn multiplicity(&self, i: usize) -> usize {
        self.multiplicities.get(&i).copied().unwrap_or(0)
    }

    pub fn multiplicities(&self) -> &BTreeMap<usize, usize> {
        &self.multiplicities
    }

    /// Parts in non-increasing order.
    pub fn parts(&self) -> Vec<usize> {
        self.multiplicities
            .iter()
            .rev()
            .flat_map(|(&i, &c)| std::iter::repeat_n(i, c))
            .collect()
    }

    /// `Π_i i^{p_i} p_i!`, the centralizer order of the cycle type.
    pub fn centralizer_order(&self) -> BigUint {
        let mut z = BigUint::one();
        for (&i, &c) in &self.multiplicities {
            z *= BigUint::from(i).pow(c as u32);
            for f in 2..=c {
                z *= BigUint::from(f);
            }
        }
        z
    }

    /// Fixed points of `σ^power` for a permutation `σ` of this cycle type.
    pub fn fixed_points_of_power(&self, power: usize) -> usize {
        self.multiplicities
            .iter()
            .filter(|(&l, _)| power.is_multiple_of(l))
            .map(|(&l, &c)| l * c)
            .sum()
    }
}

/// All partitions of `n`, each once, lexicographically by decreasing parts
/// (`[4], [3,1], [2,2], [2,1,1], [1,1,1,1]`).
pub fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(n, n, &mut current, &mut out);
    out
}

fn descend(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition::from_parts(current).expect("parts are positive"));
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        descend(remaining - part, part, current, out);
        current.pop();
    }
}

/// Number of degree-`k` invariant polynomials of a `dim x dim` matrix.
pub fn count_invariants(dim: usize, k: usize) -> Result<BigUint> {
    if dim == 0 || k == 0 {
        return Err(Error::Config(format!(
            "count_invariants needs dim >= 1 and k >= 1 (got dim={dim}, k={k})"
        )));
    }
    let outer = partitions(dim);
    let inner = partitions(k);
    let inner_z: Vec<BigInt> = inner
        .iter()
        .map(|q| BigInt::from(q.centralizer_order()))
        .collect();

    let mut total = BigRational::zero();
    for p in &outer {
        let z_p = BigInt::from(p.centralizer_order());
        let fixed: Vec<BigInt> = (1..=k)
            .map(|i| BigInt::from(p.fixed_points_of_power(i)))
            .collect();
        for (q, z_q) in inner.iter().zip(&inner_z) {
            let mut numerator = BigInt::one();
            for (&i, &q_i) in q.multiplicities() {
                numerator *= fixed[i - 1].pow(2 * q_i as u32);
            }
            if numerator.is_zero() {
                continue;
            }
            total += BigRational::new(numerator, &z_p * z_q);
        }
    }
    if !total.is_integer() {
        return Err(Error::Internal(format!(
            "invariant count for dim={dim}, k={k} is not an integer: {total}"
        )));
    }
    total
        .to_integer()
        .to_biguint()
        .ok_or_else(|| Error::Internal("negative invariant count".into()))
}

/// The large-dimension count, reached once `dim >= 2k`.
pub fn count_invariants_stable(k: usize) -> Result<BigUint> {
    count_invariants(2 * k.max(1), k)
}

/// The eleven quadratic invariants as directed multigraphs, in the order
/// `Md2, Mo21, Mo22, Qdd, Qdio, Qoid, Qchain, Qout, Qin, Qodiag, Qdisc`.
pub fn enumerate_quadratic_graphs() -> Vec<GraphInvariant> {
    InvariantId::QUADRATIC.iter().map(|id| id.graph()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// p(n) from the coin-change recurrence, independent of `partitions`.
    fn partition_numbers(max: usize) -> Vec<u64> {
        let mut p = vec![0u64; max + 1];
        p[0] = 1;
        for part in 1..=max {
            for n in part..=max {
                p[n] += p[n - part];
            }
        }
        p
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in permutations(n - 1) {
            for pos in 0..=rest.len() {
                let mut p = rest.clone();
                p.insert(pos, n - 1);
                out.push(p);
            }
        }
        out
    }

    /// Orbits of degree-k monomials in the D² entries under relabeling,
    /// counted by canonicalizing each multiset of cells.
    fn orbit_count(dim: usize, k: usize) -> usize {
        let cells: Vec<(usize, usize)> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .collect();
        let perms = permutations(dim);
        let mut seen = HashSet::new();
        let mut monomial = Vec::new();
        fn walk(
            start: usize,
            k: usize,
            cells: &[(usize, usize)],
            perms: &[Vec<usize>],
            monomial: &mut Vec<(usize, usize)>,
            seen: &mut HashSet<Vec<(usize, usize)>>,
        ) {
            if monomial.len() == k {
                let canon = perms
                    .iter()
                    .map(|s| {
                        let mut m: Vec<_> = monomial.iter().map(|&(i, j)| (s[i], s[j])).collect();
                        m.sort_unstable();
                        m
                    })
                    .min()
                    .unwrap();
                seen.insert(canon);
                return;
            }
            for c in start..cells.len() {
                monomial.push(cells[c]);
                walk(c, k, cells, perms, monomial, seen);
                monomial.pop();
            }
        }
        walk(0, k, &cells, &perms, &mut monomial, &mut seen);
        seen.len()
    }

    #[test]
    fn small_partitions() {
        assert_eq!(partitions(0).len(), 1);
        assert!(partitions(0)[0].parts().is_empty());
        let four: Vec<Vec<usize>> = partitions(4).iter().map(Partition::parts).collect();
        assert_eq!(
            four,
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
        assert_eq!(partitions(10).len(), 42);
    }

    #[test]
    fn partition_counts_match_recurrence() {
        let p = partition_numbers(30);
        for (n, &count) in p.iter().enumerate() {
            let parts = partitions(n);
            assert_eq!(parts.len() as u64, count, "n={n}");
            assert!(parts.iter().all(|q| q.weight() == n));
            let unique: HashSet<_> = parts.iter().map(Partition::parts).collect();
            assert_eq!(unique.len(), parts.len());
        }
    }

    #[test]
    fn centralizer_orders_sum_to_one_over_factorial() {
        for n in 1..=8usize {
            let mut sum = BigRational::zero();
            for p in partitions(n) {
                sum += BigRational::new(BigInt::one(), BigInt::from(p.centralizer_order()));
            }
            assert_eq!(sum, BigRational::one(), "n={n}");
        }
    }

    #[test]
    fn fixed_points_by_divisors() {
        let p = Partition::from_parts(&[3, 2, 1, 1]).unwrap();
        assert_eq!(p.fixed_points_of_power(1), 2);
        assert_eq!(p.fixed_points_of_power(2), 4);
        assert_eq!(p.fixed_points_of_power(3), 5);
        assert_eq!(p.fixed_points_of_power(6), 7);
    }

    #[test]
    fn quadratic_counts() {
        assert_eq!(count_invariants(4, 2).unwrap(), BigUint::from(11u32));
        assert_eq!(count_invariants(3, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(count_invariants(2, 2).unwrap(), BigUint::from(6u32));
        for d in 2..12 {
            assert_eq!(count_invariants(d, 1).unwrap(), BigUint::from(2u32));
        }
        assert_eq!(count_invariants(1, 1).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn stable_sequence() {
        let expected = [11u32, 52, 296, 1724, 11060];
        for (k, e) in (2..=6).zip(expected) {
            assert_eq!(count_invariants_stable(k).unwrap(), BigUint::from(e), "k={k}");
        }
    }

    #[test]
    fn formula_matches_orbit_enumeration() {
        for dim in 1..=4 {
            for k in 1..=3 {
                let formula = count_invariants(dim, k).unwrap();
                assert_eq!(formula, BigUint::from(orbit_count(dim, k)), "dim={dim} k={k}");
            }
        }
        assert_eq!(orbit_count(5, 2), 11);
    }

    #[test]
    fn stabilizes_at_twice_the_degree() {
        for k in 1..=5 {
            let stable = count_invariants_stable(k).unwrap();
            for d in 2 * k..=2 * k + 3 {
                assert_eq!(count_invariants(d, k).unwrap(), stable, "k={k} d={d}");
            }
            for d in 1..2 * k + 3 {
                assert!(count_invariants(d, k).unwrap() <= count_invariants(d + 1, k).unwrap());
            }
        }
    }

    #[test]
    fn rejects_zero_arguments() {
        assert!(count_invariants(0, 2).is_err());
        assert!(count_invariants(3, 0).is_err());
    }

    #[test]
    fn quadratic_graphs() {
        let graphs = enumerate_quadratic_graphs();
        assert_eq!(graphs.len(), 11);
        assert_eq!(BigUint::from(graphs.len()), count_invariants(4, 2).unwrap());
        assert_eq!(graphs[0].vertex_count(), 1);
        assert_eq!(graphs[0].edges(), &[(0, 0), (0, 0)]);
        assert!(graphs.iter().all(|g| g.degree() == 2));
    }
}
