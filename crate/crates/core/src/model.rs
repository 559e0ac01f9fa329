//! The five-parameter permutation-symmetric Gaussian matrix model.
//!
//! Diagonal entries are independent normals with mean `J⁰/Λ` and variance
//! `1/Λ`. For each pair `i < j`, `(M_ij, M_ji)` is a bivariate normal
//! independent of everything else, with common mean `2Jˢ/a`, variances
//! `1/a + 1/b` and covariance `1/a - 1/b`. Every moment of an invariant then
//! follows from Wick's theorem: distinct index pairs are independent, so a
//! restricted sum over `n` distinct indices factorizes into a falling
//! factorial `D(D-1)..(D-n+1)` times a product of one- and two-point data.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{averages_from_values, member_values, EnsembleAverages, InvariantId};
use crate::matrix::Ensemble;

use InvariantId::*;

#[derive(Debug, Clone, Copy, Deserialize)]
struct RawParams {
    dim: usize,
    lambda: f64,
    a: f64,
    b: f64,
    j0: f64,
    js: f64,
}

/// Model parameters: `Λ` (diagonal quadratic), `a`/`b` (off-diagonal
/// symmetric/antisymmetric quadratic), `J⁰`/`Jˢ` (diagonal/off-diagonal sources).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct GaussParams {
    dim: usize,
    lambda: f64,
    a: f64,
    b: f64,
    j0: f64,
    js: f64,
}

impl TryFrom<RawParams> for GaussParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        GaussParams::new(r.dim, r.lambda, r.a, r.b, r.j0, r.js)
    }
}

/// Parameters divided by the powers of `D` under which they stabilize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParams {
    pub j0_over_d: f64,
    pub lambda_over_d2: f64,
    pub js_over_d: f64,
    pub a_over_d2: f64,
    pub b_over_d2: f64,
}

impl NormalizedParams {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.j0_over_d,
            self.lambda_over_d2,
            self.js_over_d,
            self.a_over_d2,
            self.b_over_d2,
        ]
    }

    pub const NAMES: [&'static str; 5] =
        ["j0_over_d", "lambda_over_d2", "js_over_d", "a_over_d2", "b_over_d2"];
}

impl GaussParams {
    pub fn new(dim: usize, lambda: f64, a: f64, b: f64, j0: f64, js: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dim must be at least 1".into()));
        }
        for (name, v) in [("lambda", lambda), ("a", a), ("b", b), ("j0", j0), ("js", js)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        for (name, v) in [("lambda", lambda), ("a", a), ("b", b)] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            dim,
            lambda,
            a,
            b,
            j0,
            js,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn j0(&self) -> f64 {
        self.j0
    }
    pub fn js(&self) -> f64 {
        self.js
    }

    pub fn with_dim(self, dim: usize) -> Result<Self> {
        Self::new(dim, self.lambda, self.a, self.b, self.j0, self.js)
    }

    /// `⟨M_ii⟩ = J⁰/Λ`
    pub fn diag_mean(&self) -> f64 {
        self.j0 / self.lambda
    }

    /// `⟨M_ii M_ii⟩_c = 1/Λ`
    pub fn diag_var(&self) -> f64 {
        1.0 / self.lambda
    }

    /// `⟨M_ij⟩ = 2Jˢ/a` for `i ≠ j`
    pub fn off_mean(&self) -> f64 {
        2.0 * self.js / self.a
    }

    /// `⟨M_ij M_ij⟩_c = 1/a + 1/b`
    pub fn off_var(&self) -> f64 {
        1.0 / self.a + 1.0 / self.b
    }

    /// `⟨M_ij M_ji⟩_c = 1/a - 1/b`
    pub fn off_transpose_cov(&self) -> f64 {
        1.0 / self.a - 1.0 / self.b
    }

    pub fn normalized(&self) -> NormalizedParams {
        let d = self.dim as f64;
        NormalizedParams {
            j0_over_d: self.j0 / d,
            lambda_over_d2: self.lambda / (d * d),
            js_over_d: self.js / d,
            a_over_d2: self.a / (d * d),
            b_over_d2: self.b / (d * d),
        }
    }
}

/// `D (D-1) .. (D-n+1)`, zero when `n > D`.
fn falling(dim: usize, n: usize) -> f64 {
    (0..n).map(|k| dim as f64 - k as f64).product::<f64>().max(0.0)
}

/// Model expectation of a catalog invariant.
pub fn predict_moment(p: &GaussParams, id: InvariantId) -> f64 {
    let d1 = falling(p.dim, 1);
    let d2 = falling(p.dim, 2);
    let d3 = falling(p.dim, 3);
    let d4 = falling(p.dim, 4);
    let (md, vd) = (p.diag_mean(), p.diag_var());
    let (mo, vp, vm) = (p.off_mean(), p.off_var(), p.off_transpose_cov());
    match id {
        Md1 => d1 * md,
        Mo1 => d2 * mo,
        Md2 => d1 * (md * md + vd),
        Mo21 => d2 * (mo * mo + vp),
        Mo22 => d2 * (mo * mo + vm),
        Qdd => d2 * md * md,
        Qdio | Qoid => d2 * md * mo,
        Qchain | Qout | Qin => d3 * mo * mo,
        Qodiag => d3 * mo * md,
        Qdisc => d4 * mo * mo,
        Md3 => d1 * (md.powi(3) + 3.0 * md * vd),
        Mo31 => d2 * (mo.powi(3) + 3.0 * mo * vp),
        Mo32 => d3 * mo.powi(3),
        Md4 => d1 * (md.powi(4) + 6.0 * md * md * vd + 3.0 * vd * vd),
        Mo41 => d2 * (mo.powi(4) + 6.0 * mo * mo * vp + 3.0 * vp * vp),
        Mo42 => d4 * mo.powi(4),
    }
}

/// Solves for the parameters reproducing `Md1, Mo1, Md2, Mo21, Mo22` exactly.
pub fn fit(avgs: &EnsembleAverages, dim: usize) -> Result<GaussParams> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!(
            "fitting needs dim >= 2, got {dim}"
        )));
    }
    if avgs.dim != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: avgs.dim,
        });
    }
    let d = dim as f64;
    let pairs = d * (d - 1.0);

    let diag_mean = avgs.require(Md1)? / d;
    let diag_var = avgs.require(Md2)? / d - diag_mean * diag_mean;
    if !(diag_var > 0.0) {
        return Err(Error::IncompatibleAverages(format!(
            "implied diagonal variance Md2/D - (Md1/D)^2 = {diag_var} must be > 0"
        )));
    }
    let lambda = 1.0 / diag_var;
    let j0 = diag_mean * lambda;

    let off_mean = avgs.require(Mo1)? / pairs;
    let v_plus = avgs.require(Mo21)? / pairs - off_mean * off_mean;
    let v_minus = avgs.require(Mo22)? / pairs - off_mean * off_mean;
    if !(v_plus + v_minus > 0.0) {
        return Err(Error::IncompatibleAverages(format!(
            "implied symmetric variance v+ + v- = {} must be > 0",
            v_plus + v_minus
        )));
    }
    if !(v_plus - v_minus > 0.0) {
        return Err(Error::IncompatibleAverages(format!(
            "implied antisymmetric variance v+ - v- = {} must be > 0",
            v_plus - v_minus
        )));
    }
    let a = 2.0 / (v_plus + v_minus);
    let b = 2.0 / (v_plus - v_minus);
    let js = off_mean * a / 2.0;
    GaussParams::new(dim, lambda, a, b, j0, js)
}

/// Predicted values for a list of invariants.
pub fn predict_all(p: &GaussParams, ids: &[InvariantId]) -> EnsembleAverages {
    EnsembleAverages {
        dim: p.dim,
        count: 0,
        values: ids.iter().map(|&id| (id, predict_moment(p, id))).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsBlock {
    #[serde(flatten)]
    pub raw: GaussParams,
    pub normalized: NormalizedParams,
}

impl From<GaussParams> for ParamsBlock {
    fn from(p: GaussParams) -> Self {
        Self {
            raw: p,
            normalized: p.normalized(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub id: InvariantId,
    pub theory: f64,
    pub experiment: f64,
    /// Standard error of the ensemble mean; absent for a single-member ensemble.
    pub experiment_stderr: Option<f64>,
    /// `theory / experiment`; absent when the experiment value is zero.
    pub ratio: Option<f64>,
    /// `(experiment - theory) / experiment_stderr`.
    pub z_score: Option<f64>,
    pub flag: Option<String>,
}

/// Published five-parameter values for adjective and verb matrices at
/// `D = 300..2000`; shown for orientation only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedReference {
    pub note: String,
    pub adjective_params: NormalizedParams,
    pub adjective_ratios: BTreeMap<InvariantId, f64>,
    pub verb_params: NormalizedParams,
    pub verb_ratios: BTreeMap<InvariantId, f64>,
}

impl PublishedReference {
    pub fn values() -> Self {
        Self {
            note: "published values from a 2.8-billion-token corpus; not reproducible at this scale"
                .into(),
            adjective_params: NormalizedParams {
                j0_over_d: 1.31e-2,
                lambda_over_d2: 2.86e-3,
                js_over_d: 4.51e-4,
                a_over_d2: 1.95e-3,
                b_over_d2: 2.01e-3,
            },
            adjective_ratios: [
                (Md3, 0.57),
                (Md4, 0.33),
                (Mo31, 0.32),
                (Mo41, 0.47),
                (Mo32, 0.013),
                (Mo42, 0.0084),
            ]
            .into_iter()
            .collect(),
            verb_params: NormalizedParams {
                j0_over_d: 1.16e-3,
                lambda_over_d2: 2.42e-3,
                js_over_d: 3.19e-4,
                a_over_d2: 1.58e-3,
                b_over_d2: 1.62e-3,
            },
            verb_ratios: [
                (Md3, 0.54),
                (Md4, 0.30),
                (Mo31, 0.25),
                (Mo41, 0.48),
                (Mo32, 0.010),
                (Mo42, 0.006),
            ]
            .into_iter()
            .collect(),
        }
    }
}

/// Theory against ensemble averages for the fit and higher-order invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub dim: usize,
    pub ensemble_size: usize,
    pub params: ParamsBlock,
    pub rows: Vec<MomentRow>,
    pub published_reference: PublishedReference,
}

/// The ids a report covers: the five fit ids, then the six higher ones.
pub const REPORT_IDS: [InvariantId; 11] = [
    Md1, Mo1, Md2, Mo21, Mo22, Md3, Mo31, Mo32, Md4, Mo41, Mo42,
];

pub fn moment_report(p: &GaussParams, e: &Ensemble) -> Result<MomentReport> {
    if p.dim != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: e.dim(),
        });
    }
    let values = member_values(e);
    let means = averages_from_values(e.dim(), &values, &REPORT_IDS);
    let n = values.len();
    let rows = REPORT_IDS
        .iter()
        .map(|&id| {
            let theory = predict_moment(p, id);
            let experiment = means.values[&id];
            let experiment_stderr = (n > 1).then(|| {
                let mut ss = 0.0;
                for v in &values {
                    let dev = v.get(id) - experiment;
                    ss += dev * dev;
                }
                (ss / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
            });
            let ratio = (experiment != 0.0).then(|| theory / experiment);
            let z_score = experiment_stderr
                .filter(|&s| s > 0.0)
                .map(|s| (experiment - theory) / s);
            let flag = ratio
                .is_none()
                .then(|| "experiment value is zero; ratio omitted".to_string());
            MomentRow {
                id,
                theory,
                experiment,
                experiment_stderr,
                ratio,
                z_score,
                flag,
            }
        })
        .collect();
    Ok(MomentReport {
        dim: p.dim,
        ensemble_size: n,
        params: (*p).into(),
        rows,
        published_reference: PublishedReference::values(),
    })
}

impl MomentReport {
    pub fn row(&self, id: InvariantId) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let p = &self.params.raw;
        let n = &self.params.normalized;
        let _ = writeln!(out, "D = {}, ensemble size = {}", self.dim, self.ensemble_size);
        let _ = writeln!(
            out,
            "lambda = {:.6e}  a = {:.6e}  b = {:.6e}  j0 = {:.6e}  js = {:.6e}",
            p.lambda, p.a, p.b, p.j0, p.js
        );
        let _ = writeln!(
            out,
            "lambda/D^2 = {:.4e}  a/D^2 = {:.4e}  b/D^2 = {:.4e}  j0/D = {:.4e}  js/D = {:.4e}",
            n.lambda_over_d2, n.a_over_d2, n.b_over_d2, n.j0_over_d, n.js_over_d
        );
        let _ = writeln!(
            out,
            "{:<8} {:>14} {:>14} {:>12} {:>10}",
            "id", "theory", "experiment", "stderr", "ratio"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>14.6e} {:>14.6e} {:>12} {:>10}",
                r.id.tag(),
                r.theory,
                r.experiment,
                r.experiment_stderr
                    .map_or("-".to_string(), |s| format!("{s:.3e}")),
                r.ratio.map_or("-".to_string(), |x| format!("{x:.4}")),
            );
        }
        let _ = writeln!(out, "\nreference ({})", self.published_reference.note);
        for (label, ratios) in [
            ("adjectives", &self.published_reference.adjective_ratios),
            ("verbs", &self.published_reference.verb_ratios),
        ] {
            let joined: Vec<String> = ratios.iter().map(|(id, r)| format!("{id}={r}")).collect();
            let _ = writeln!(out, "  {label}: {}", joined.join(" "));
        }
        out
    }
}

/// Coupling of the `(S_ij, A_ij)` pair: quadratic form `a S² + b A² + 2c S A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PairCoupling {
    pub fn det(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }
}

/// A general Gaussian with per-index diagonal coefficients, per-pair 2x2
/// couplings and an arbitrary source matrix. Evaluation only.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralGaussSpec {
    dim: usize,
    lambda: Vec<f64>,
    pairs: Vec<PairCoupling>,
    sources: Vec<f64>,
}

impl GeneralGaussSpec {
    /// `pairs` lists the `(i, j)`, `i < j`, couplings in row-major upper-triangle order.
    pub fn new(
        dim: usize,
        lambda: Vec<f64>,
        pairs: Vec<PairCoupling>,
        sources: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dim must be at least 1".into()));
        }
        let npairs = dim * (dim - 1) / 2;
        if lambda.len() != dim || pairs.len() != npairs || sources.len() != dim * dim {
            return Err(Error::InvalidParams(format!(
                "expected {dim} diagonal coefficients, {npairs} pair couplings and {} sources",
                dim * dim
            )));
        }
        if let Some((i, l)) = lambda.iter().enumerate().find(|(_, l)| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda_{i} = {l} must be > 0")));
        }
        if let Some((k, p)) = pairs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.det() > 0.0) || !(p.a > 0.0) || !p.det().is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "pair coupling #{k} has det = {} (needs a > 0 and ab - c^2 > 0)",
                p.det()
            )));
        }
        if sources.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParams("non-finite source".into()));
        }
        Ok(Self {
            dim,
            lambda,
            pairs,
            sources,
        })
    }

    /// The general Gaussian equivalent to a five-parameter model: `Λ_i = Λ`, `(a, b, 0)`
    /// on every pair, `J_ii = J⁰` and `J_ij = Jˢ` off the diagonal.
    pub fn uniform(p: &GaussParams) -> Self {
        let d = p.dim;
        let mut sources = vec![p.js; d * d];
        for i in 0..d {
            sources[i * d + i] = p.j0;
        }
        Self {
            dim: d,
            lambda: vec![p.lambda; d],
            pairs: vec![
                PairCoupling {
                    a: p.a,
                    b: p.b,
                    c: 0.0
                };
                d * (d - 1) / 2
            ],
            sources,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self, i: usize, j: usize) -> f64 {
        self.sources[i * self.dim + j]
    }

    pub fn set_source(&mut self, i: usize, j: usize, value: f64) {
        self.sources[i * self.dim + j] = value;
    }

    fn pair(&self, i: usize, j: usize) -> &PairCoupling {
        debug_assert!(i < j);
        let d = self.dim;
        &self.pairs[i * d - i * (i + 1) / 2 + (j - i - 1)]
    }
}

/// `log Z` of the general Gaussian with sources, measure `Π dS_ii Π dS_ij dA_ij`.
pub fn log_partition(spec: &GeneralGaussSpec) -> f64 {
    let d = spec.dim;
    let mut out = 0.5 * (d * d) as f64 * (2.0 * std::f64::consts::PI).ln();
    for i in 0..d {
        let l = spec.lambda[i];
        let j = spec.source(i, i);
        out += -0.5 * l.ln() + 0.5 * j * j / l;
    }
    for i in 0..d {
        for k in i + 1..d {
            let p = spec.pair(i, k);
            let det = p.det();
            let js = 0.5 * (spec.source(i, k) + spec.source(k, i));
            let ja = 0.5 * (spec.source(i, k) - spec.source(k, i));
            out += -0.5 * det.ln() + 2.0 / det * (p.b * js * js + p.a * ja * ja - 2.0 * p.c * ja * js);
        }
    }
    out
}
