//! Dense word matrices, ensembles of them, and the simultaneous row/column
//! relabeling action of the symmetric group.
//!
//! Text format of a matrix file:
//!
//! ```text
//! label <word>
//! dim <D>
//! <D space-separated numbers>   (D lines)
//! ```
//!
//! Numbers are written with the shortest decimal representation that parses
//! back to the identical `f64`, so write-then-read is bit-exact. An ensemble
//! directory holds one matrix file per word plus `manifest.txt` listing the
//! file names in ensemble order (blank lines and `#` comments are ignored).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, Error, Result};

pub const MANIFEST: &str = "manifest.txt";

/// A labeled `D x D` real matrix, stored row-major. Entry `(i, j)` is `M_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordMatrix {
    label: String,
    dim: usize,
    values: Vec<f64>,
}

impl WordMatrix {
    pub fn new(label: impl Into<String>, dim: usize, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if dim == 0 {
            return Err(Error::InvalidMatrix("dim must be at least 1".into()));
        }
        if values.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        if label.contains('\n') {
            return Err(Error::InvalidMatrix("label contains a newline".into()));
        }
        Ok(Self { label, dim, values })
    }

    pub fn from_rows(label: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(label, dim, rows.concat())
    }

    pub fn zeros(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(label, dim, vec![0.0; dim * dim])
    }

    pub fn identity(label: impl Into<String>, dim: usize) -> Result<Self> {
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        Self::new(label, dim, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn transpose(&self) -> WordMatrix {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.values[i * d + j];
            }
        }
        Self {
            label: self.label.clone(),
            dim: d,
            values: out,
        }
    }

    /// Entrywise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<WordMatrix> {
        Self::new(
            self.label.clone(),
            self.dim,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// `S = (M + M^T) / 2`.
pub fn symmetric_part(m: &WordMatrix) -> WordMatrix {
    combine_with_transpose(m, |x, y| (x + y) / 2.0)
}

/// `A = (M - M^T) / 2`.
pub fn antisymmetric_part(m: &WordMatrix) -> WordMatrix {
    combine_with_transpose(m, |x, y| (x - y) / 2.0)
}

fn combine_with_transpose(m: &WordMatrix, f: impl Fn(f64, f64) -> f64) -> WordMatrix {
    let d = m.dim;
    let mut values = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            values[i * d + j] = f(m.get(i, j), m.get(j, i));
        }
    }
    WordMatrix {
        label: m.label.clone(),
        dim: d,
        values,
    }
}

/// A bijection on `{0, .., D-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMap {
    image: Vec<usize>,
}

impl PermutationMap {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::InvalidMatrix(format!(
                    "permutation image {image:?} is not a bijection on 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &s) in self.image.iter().enumerate() {
            inv[s] = i;
        }
        Self { image: inv }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &PermutationMap) -> Result<Self> {
        if self.len() != first.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: first.len(),
            });
        }
        Ok(Self {
            image: first.image.iter().map(|&i| self.image[i]).collect(),
        })
    }
}

/// Relabels basis indices: the result satisfies `M'[σ(i), σ(j)] = M[i, j]`.
pub fn apply_permutation(m: &WordMatrix, sigma: &PermutationMap) -> Result<WordMatrix> {
    let d = m.dim;
    if sigma.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sigma.len(),
        });
    }
    let mut values = vec![0.0; d * d];
    for i in 0..d {
        let si = sigma.apply(i);
        for j in 0..d {
            values[si * d + sigma.apply(j)] = m.get(i, j);
        }
    }
    Ok(WordMatrix {
        label: m.label.clone(),
        dim: d,
        values,
    })
}

/// A nonempty, ordered collection of word matrices sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<WordMatrix>,
    dim: usize,
}

impl Ensemble {
    pub fn new(members: Vec<WordMatrix>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidMatrix("ensemble must be nonempty".into()))?;
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { members, dim })
    }

    pub fn members(&self) -> &[WordMatrix] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn format_matrix(m: &WordMatrix) -> String {
    let mut out = String::with_capacity(m.dim * m.dim * 20 + 32);
    let _ = writeln!(out, "label {}", m.label);
    let _ = writeln!(out, "dim {}", m.dim);
    for i in 0..m.dim {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Parses the matrix text format. `origin` only labels error messages.
pub fn parse_matrix(text: &str, origin: &Path) -> Result<WordMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();

    let header = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected `label <word>`".into()))?;
    let label = header
        .strip_prefix("label ")
        .filter(|l| !l.is_empty())
        .ok_or_else(|| err(1, format!("expected `label <word>`, found {header:?}")))?;

    let dim_line = lines
        .next()
        .ok_or_else(|| err(2, "missing `dim <D>` line".into()))?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| err(2, format!("expected `dim <D>` with D >= 1, found {dim_line:?}")))?;

    let mut values = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let line_no = row + 3;
        let line = lines
            .next()
            .ok_or_else(|| err(line_no, format!("missing row {row} of {dim}")))?;
        let mut count = 0;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(line_no, format!("non-numeric entry {tok:?}")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("non-finite entry {tok:?}")));
            }
            values.push(v);
            count += 1;
        }
        if count != dim {
            return Err(err(line_no, format!("row has {count} entries, expected {dim}")));
        }
    }
    if let Some((k, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(dim + 3 + k, format!("unexpected trailing content {extra:?}")));
    }
    WordMatrix::new(label, dim, values)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<WordMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix(&text, path)
}

pub fn write_matrix(m: &WordMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(io_err(path))
}

fn file_stem_for(label: &str) -> String {
    let stem: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if stem.is_empty() {
        "matrix".into()
    } else {
        stem
    }
}

/// Writes one file per member plus `manifest.txt`. `comment`, if given, is
/// written as `#` lines at the top of the manifest.
pub fn write_ensemble(e: &Ensemble, dir: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(manifest, "# {line}");
        }
    }
    for (k, m) in e.members().iter().enumerate() {
        let name = format!("{k:05}_{}.mat", file_stem_for(m.label()));
        write_matrix(m, dir.join(&name))?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(io_err(path))
}

pub fn read_ensemble(dir: impl AsRef<Path>) -> Result<Ensemble> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST);
    let manifest = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let files: Vec<PathBuf> = manifest
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| dir.join(l))
        .collect();
    if files.is_empty() {
        return Err(Error::Parse {
            path: manifest_path,
            line: 1,
            message: "manifest lists no matrices".into(),
        });
    }
    let members = files.iter().map(read_matrix).collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> WordMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        WordMatrix::from_rows("w", &rows).unwrap()
    }

    #[test]
    fn symmetric_and_antisymmetric_parts() {
        let a = m(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert_eq!(symmetric_part(&a), m(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(antisymmetric_part(&a), m(&[&[0.0, 1.0], &[-1.0, 0.0]]));

        let b = m(&[&[1.0, 3.0], &[-1.0, 2.0]]);
        assert_eq!(symmetric_part(&b), m(&[&[1.0, 1.0], &[1.0, 2.0]]));
        assert_eq!(antisymmetric_part(&b), m(&[&[0.0, 2.0], &[-2.0, 0.0]]));

        let s = m(&[&[1.0, 5.0, -2.0], &[5.0, 0.5, 3.0], &[-2.0, 3.0, 7.0]]);
        assert_eq!(symmetric_part(&s), s);
        assert!(antisymmetric_part(&s).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn swap_relabels_both_indices() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let swap = PermutationMap::new(vec![1, 0]).unwrap();
        assert_eq!(apply_permutation(&a, &swap).unwrap(), m(&[&[4.0, 3.0], &[2.0, 1.0]]));
        assert_eq!(apply_permutation(&a, &PermutationMap::identity(2)).unwrap(), a);
    }

    #[test]
    fn permutation_dimension_mismatch() {
        let a = WordMatrix::identity("i", 3).unwrap();
        assert!(matches!(
            apply_permutation(&a, &PermutationMap::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(PermutationMap::new(vec![0, 0, 1]).is_err());
        assert!(PermutationMap::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(WordMatrix::new("x", 1, vec![f64::NAN]).is_err());
        assert!(WordMatrix::new("x", 1, vec![f64::INFINITY]).is_err());
        assert!(WordMatrix::new("x", 0, vec![]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
        let e = Ensemble::new(vec![
            WordMatrix::identity("a", 2).unwrap(),
            WordMatrix::identity("b", 3).unwrap(),
        ]);
        assert!(matches!(e, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let p = Path::new("t.mat");
        match parse_matrix("label x\ndim 3\n1 2 3\n4 5\n7 8 9\n", p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_matrix("", p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_matrix("label x\ndim 2\n1 a\n3 4\n", p) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("non-numeric"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_matrix("lbl x\ndim 1\n1\n", p).is_err());
        assert!(parse_matrix("label x\ndim 0\n", p).is_err());
        assert!(parse_matrix("label x\ndim 1\n1\n2\n", p).is_err());
    }

    #[test]
    fn ensemble_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let e = Ensemble::new(vec![
            m(&[&[0.1, -2.5], &[1e-300, 3.0]]).with_label("big red"),
            m(&[&[1.0 / 3.0, 0.0], &[-0.0, f64::MAX]]).with_label("x"),
        ])
        .unwrap();
        write_ensemble(&e, dir.path(), Some("generated for a test")).unwrap();
        let back = read_ensemble(dir.path()).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.members()[0].label(), "big red");
    }

    fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = WordMatrix> {
        (1..=max_dim).prop_flat_map(|d| {
            proptest::collection::vec(
                prop_oneof![-1e6f64..1e6, -1e-8f64..1e-8, any::<i32>().prop_map(f64::from)],
                d * d,
            )
            .prop_map(move |v| WordMatrix::new("p", d, v).unwrap())
        })
    }

    fn perm_strategy(d: usize) -> impl Strategy<Value = PermutationMap> {
        Just((0..d).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| PermutationMap::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(a in matrix_strategy(6)) {
            let back = parse_matrix(&format_matrix(&a), Path::new("mem")).unwrap();
            prop_assert_eq!(
                back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(back.label(), a.label());
        }

        #[test]
        fn decomposition_sums_back(a in matrix_strategy(6)) {
            let s = symmetric_part(&a);
            let n = antisymmetric_part(&a);
            prop_assert_eq!(&s.transpose(), &s);
            let d = a.dim();
            for i in 0..d {
                for j in 0..d {
                    let scale = a.get(i, j).abs().max(a.get(j, i).abs());
                    let err = (s.get(i, j) + n.get(i, j) - a.get(i, j)).abs();
                    prop_assert!(err <= 2.0 * f64::EPSILON * scale);
                }
            }
            let nt = n.transpose();
            for k in 0..a.values().len() {
                prop_assert_eq!(nt.values()[k], -n.values()[k]);
            }
        }

        #[test]
        fn permutation_is_a_group_action(
            (a, s, t) in (2usize..7).prop_flat_map(|d| {
                (
                    proptest::collection::vec(-10.0f64..10.0, d * d)
                        .prop_map(move |v| WordMatrix::new("g", d, v).unwrap()),
                    perm_strategy(d),
                    perm_strategy(d),
                )
            })
        ) {
            let lhs = apply_permutation(&apply_permutation(&a, &s).unwrap(), &t).unwrap();
            let rhs = apply_permutation(&a, &t.after(&s).unwrap()).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            let back = apply_permutation(&apply_permutation(&a, &s).unwrap(), &s.inverse()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
