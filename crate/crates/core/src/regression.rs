//! Ridge regression of a word matrix from (argument vector, compound vector)
//! pairs.
//!
//! With argument vectors as the rows of `X` (`m x D`) and compound vectors as
//! the rows of `Y`, the objective is
//!
//! ```text
//! L(M) = (‖M Xᵀ - Yᵀ‖² + λ‖M‖²) / 2m
//! ```
//!
//! whose gradient is `((M Xᵀ - Yᵀ) X + λ M) / m` and whose unique minimizer
//! for `λ > 0` solves `M (XᵀX + λI) = YᵀX`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::WordMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    label: String,
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl TrainingSet {
    pub fn new(label: impl Into<String>, x_rows: &[Vec<f64>], y_rows: &[Vec<f64>]) -> Result<Self> {
        let m = x_rows.len();
        if m == 0 {
            return Err(Error::Config("training set needs at least one row".into()));
        }
        if y_rows.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: y_rows.len(),
            });
        }
        let d = x_rows[0].len();
        if d == 0 {
            return Err(Error::Config("training vectors are empty".into()));
        }
        for r in x_rows.iter().chain(y_rows) {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("training data contains non-finite values".into()));
            }
        }
        Ok(Self {
            label: label.into(),
            x: DMatrix::from_row_iterator(m, d, x_rows.iter().flatten().copied()),
            y: DMatrix::from_row_iterator(m, d, y_rows.iter().flatten().copied()),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn subset(&self, rows: &[usize]) -> Self {
        Self {
            label: self.label.clone(),
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
        }
    }

    /// Relabels the basis: column `i` moves to column `sigma[i]` in both `X` and `Y`.
    pub fn permute_basis(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: sigma.len(),
            });
        }
        let mut x = self.x.clone();
        let mut y = self.y.clone();
        for (i, &s) in sigma.iter().enumerate() {
            x.set_column(s, &self.x.column(i));
            y.set_column(s, &self.y.column(i));
        }
        Ok(Self {
            label: self.label.clone(),
            x,
            y,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressionConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the relative loss change between epochs drops below this.
    pub convergence_tol: f64,
    /// Seeds the holdout split used when choosing λ automatically.
    pub seed: u64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            learning_rate: 0.01,
            max_epochs: 5000,
            convergence_tol: 1e-8,
            seed: 0,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config(format!(
                "convergence_tol must be > 0, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

fn to_dmatrix(m: &WordMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.values())
}

fn to_word_matrix(label: &str, m: &DMatrix<f64>) -> Result<WordMatrix> {
    let d = m.nrows();
    let values = (0..d).flat_map(|i| (0..d).map(move |j| m[(i, j)])).collect();
    WordMatrix::new(label, d, values)
}

fn check_dim(m: &WordMatrix, ts: &TrainingSet) -> Result<()> {
    if m.dim() != ts.dim() {
        return Err(Error::DimensionMismatch {
            expected: ts.dim(),
            found: m.dim(),
        });
    }
    Ok(())
}

fn loss_of(m: &DMatrix<f64>, ts: &TrainingSet, lambda: f64) -> f64 {
    let residual = &ts.x * m.transpose() - &ts.y;
    (residual.norm_squared() + lambda * m.norm_squared()) / (2.0 * ts.rows() as f64)
}

fn gradient_of(m: &DMatrix<f64>, ts: &TrainingSet, lambda: f64) -> DMatrix<f64> {
    let residual = &ts.x * m.transpose() - &ts.y;
    (residual.transpose() * &ts.x + m * lambda) / ts.rows() as f64
}

pub fn loss(m: &WordMatrix, ts: &TrainingSet, lambda: f64) -> Result<f64> {
    check_dim(m, ts)?;
    Ok(loss_of(&to_dmatrix(m), ts, lambda))
}

/// Analytic gradient of [`loss`] with respect to `M`, row-major.
pub fn gradient(m: &WordMatrix, ts: &TrainingSet, lambda: f64) -> Result<WordMatrix> {
    check_dim(m, ts)?;
    to_word_matrix(m.label(), &gradient_of(&to_dmatrix(m), ts, lambda))
}

/// The exact minimizer of the ridge objective.
pub fn fit_closed_form(ts: &TrainingSet, lambda: f64) -> Result<WordMatrix> {
    if !(lambda >= 0.0) {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let d = ts.dim();
    let gram = ts.x.transpose() * &ts.x + DMatrix::identity(d, d) * lambda;
    let rhs = ts.x.transpose() * &ts.y;
    let chol = gram.clone().cholesky().ok_or(Error::Singular)?;
    if lambda == 0.0 {
        let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
        let l = chol.l();
        if (0..d).any(|i| l[(i, i)] * l[(i, i)] <= scale * 1e-12) {
            return Err(Error::Singular);
        }
    }
    // Solves (XᵀX + λI) Mᵀ = XᵀY.
    let mt = chol.solve(&rhs);
    to_word_matrix(ts.label(), &mt.transpose())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdOutcome {
    #[serde(skip)]
    pub matrix: Option<WordMatrix>,
    pub epochs: usize,
    pub final_loss: f64,
    pub converged: bool,
    /// Loss after each epoch, starting with the loss at the zero initialization.
    #[serde(skip)]
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from the zero matrix.
pub fn fit_gradient_descent(ts: &TrainingSet, cfg: &RegressionConfig) -> Result<GdOutcome> {
    cfg.validate()?;
    let d = ts.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    let mut prev = loss_of(&m, ts, cfg.lambda);
    let mut losses = vec![prev];
    let mut rising = 0;
    let mut converged = false;
    let mut epochs = 0;
    while epochs < cfg.max_epochs {
        let g = gradient_of(&m, ts, cfg.lambda);
        m -= g * cfg.learning_rate;
        epochs += 1;
        let cur = loss_of(&m, ts, cfg.lambda);
        losses.push(cur);
        if !cur.is_finite() {
            return Err(Error::Diverged { epoch: epochs, loss: cur });
        }
        if cur > prev {
            rising += 1;
            if rising >= 10 {
                return Err(Error::Diverged { epoch: epochs, loss: cur });
            }
        } else {
            rising = 0;
        }
        let change = (prev - cur).abs() / prev.abs().max(f64::MIN_POSITIVE);
        prev = cur;
        if change < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(GdOutcome {
        matrix: Some(to_word_matrix(ts.label(), &m)?),
        epochs,
        final_loss: prev,
        converged,
        losses,
    })
}

/// Candidate ridge coefficients tried when none is given.
pub const LAMBDA_GRID: [f64; 3] = [0.01, 0.1, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub lambda: f64,
    /// Mean squared holdout error per grid entry.
    pub holdout_errors: Vec<f64>,
}

/// Picks λ from `grid` by an 80/20 holdout split of the rows, shuffled with `seed`.
/// With fewer than two rows the middle grid value is returned.
pub fn select_lambda(ts: &TrainingSet, grid: &[f64], seed: u64) -> Result<LambdaChoice> {
    if grid.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let m = ts.rows();
    if m < 2 {
        return Ok(LambdaChoice {
            lambda: grid[grid.len() / 2],
            holdout_errors: vec![],
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_hold = ((m as f64 * 0.2).round() as usize).clamp(1, m - 1);
    let (hold, train) = order.split_at(n_hold);
    let train_set = ts.subset(train);
    let hold_set = ts.subset(hold);
    let mut errors = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let fitted = fit_closed_form(&train_set, lambda)?;
        let resid = &hold_set.x * to_dmatrix(&fitted).transpose() - &hold_set.y;
        errors.push(resid.norm_squared() / hold.len() as f64);
    }
    let best = errors
        .iter()
        .enumerate()
        .fold(0, |best, (k, e)| if *e < errors[best] { k } else { best });
    Ok(LambdaChoice {
        lambda: grid[best],
        holdout_errors: errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{apply_permutation, PermutationMap};
    use rand::Rng;

    fn random_rows(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> WordMatrix {
        WordMatrix::new(
            "m",
            d,
            (0..d * d).map(|_| rng.random_range(-scale..scale)).collect(),
        )
        .unwrap()
    }

    fn apply(m: &WordMatrix, x: &[f64]) -> Vec<f64> {
        (0..m.dim())
            .map(|i| m.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn zero_and_exact_fit_losses() {
        let zero = WordMatrix::zeros("z", 2).unwrap();
        let ts = TrainingSet::new("t", &[vec![0.0, 0.0]], &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(loss(&zero, &ts, 1.0).unwrap(), 0.0);
        let rows = vec![vec![1.0, 2.0], vec![3.0, -1.0]];
        let ts = TrainingSet::new("t", &rows, &rows).unwrap();
        let id = WordMatrix::identity("i", 2).unwrap();
        assert_eq!(loss(&id, &ts, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_loss() {
        // M = [[1,2],[0,1]], X rows (1,0),(0,1), Y rows (1,1),(0,0), λ = 0.5.
        // MXᵀ - Yᵀ = [[0,2],[-1,1]] -> 6; ‖M‖² = 6; (6 + 3) / 4 = 2.25.
        let m = WordMatrix::from_rows("m", &[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let ts = TrainingSet::new(
            "t",
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1.0, 1.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert!((loss(&m, &ts, 0.5).unwrap() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn training_set_validation() {
        assert!(TrainingSet::new("t", &[], &[]).is_err());
        assert!(TrainingSet::new("t", &[vec![1.0]], &[vec![1.0], vec![2.0]]).is_err());
        assert!(TrainingSet::new("t", &[vec![1.0, 2.0]], &[vec![1.0]]).is_err());
        assert!(TrainingSet::new("t", &[vec![f64::NAN]], &[vec![1.0]]).is_err());
    }

    #[test]
    fn identity_is_recovered_without_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = random_rows(&mut rng, 12, 5);
        let ts = TrainingSet::new("same", &rows, &rows).unwrap();
        let m = fit_closed_form(&ts, 0.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m.get(i, j) - want).abs() < 1e-10);
            }
        }
        assert_eq!(m.label(), "same");
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = random_rows(&mut rng, 3, 6);
        let ts = TrainingSet::new("t", &rows, &rows).unwrap();
        assert!(matches!(fit_closed_form(&ts, 0.0), Err(Error::Singular)));
        assert!(fit_closed_form(&ts, 0.1).is_ok());
    }

    #[test]
    fn ridge_shrinks_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_rows(&mut rng, 20, 4);
        let y = random_rows(&mut rng, 20, 4);
        let ts = TrainingSet::new("t", &x, &y).unwrap();
        let norms: Vec<f64> = [1.0, 10.0, 100.0, 1e6]
            .iter()
            .map(|&l| {
                fit_closed_form(&ts, l)
                    .unwrap()
                    .values()
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
            })
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
        assert!(norms[3] < 1e-8);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 9, 4), &random_rows(&mut rng, 9, 4))
            .unwrap();
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 4, 1.0);
            let g = gradient(&m, &ts, 0.3).unwrap();
            let h = 1e-5;
            for k in 0..16 {
                let mut plus = m.values().to_vec();
                let mut minus = m.values().to_vec();
                plus[k] += h;
                minus[k] -= h;
                let lp = loss(&WordMatrix::new("p", 4, plus).unwrap(), &ts, 0.3).unwrap();
                let lm = loss(&WordMatrix::new("m", 4, minus).unwrap(), &ts, 0.3).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                let an = g.values()[k];
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
            }
        }
    }

    #[test]
    fn closed_form_is_the_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 20, 5), &random_rows(&mut rng, 20, 5))
            .unwrap();
        let best = fit_closed_form(&ts, 0.5).unwrap();
        let l0 = loss(&best, &ts, 0.5).unwrap();
        for _ in 0..100 {
            let delta = random_matrix(&mut rng, 5, 0.05);
            let moved = WordMatrix::new(
                "p",
                5,
                best.values().iter().zip(delta.values()).map(|(a, b)| a + b).collect(),
            )
            .unwrap();
            assert!(loss(&moved, &ts, 0.5).unwrap() >= l0);
        }
    }

    #[test]
    fn gradient_descent_reaches_closed_form_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 30, 5), &random_rows(&mut rng, 30, 5))
            .unwrap();
        let cfg = RegressionConfig {
            lambda: 0.2,
            learning_rate: 0.5,
            max_epochs: 20_000,
            convergence_tol: 1e-14,
            seed: 0,
        };
        let out = fit_gradient_descent(&ts, &cfg).unwrap();
        let exact = loss(&fit_closed_form(&ts, 0.2).unwrap(), &ts, 0.2).unwrap();
        assert!((out.final_loss - exact).abs() <= 1e-4 * exact, "{} vs {exact}", out.final_loss);
        assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn gradient_descent_fits_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows = random_rows(&mut rng, 15, 4);
        let ts = TrainingSet::new("t", &rows, &rows).unwrap();
        let cfg = RegressionConfig {
            lambda: 0.0,
            learning_rate: 0.5,
            max_epochs: 50_000,
            convergence_tol: 1e-12,
            seed: 0,
        };
        let out = fit_gradient_descent(&ts, &cfg).unwrap();
        assert!(out.final_loss < 1e-8, "{}", out.final_loss);
    }

    #[test]
    fn loss_decreases_with_default_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 10, 6), &random_rows(&mut rng, 10, 6))
            .unwrap();
        let cfg = RegressionConfig {
            max_epochs: 300,
            ..RegressionConfig::default()
        };
        let out = fit_gradient_descent(&ts, &cfg).unwrap();
        assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(out.epochs, 300);
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 10, 4), &random_rows(&mut rng, 10, 4))
            .unwrap();
        let cfg = RegressionConfig {
            learning_rate: 50.0,
            ..RegressionConfig::default()
        };
        assert!(matches!(fit_gradient_descent(&ts, &cfg), Err(Error::Diverged { .. })));
        let bad = RegressionConfig {
            convergence_tol: 0.0,
            ..RegressionConfig::default()
        };
        assert!(fit_gradient_descent(&ts, &bad).is_err());
    }

    #[test]
    fn planted_matrix_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let d = 6;
        let planted = random_matrix(&mut rng, d, 1.0);
        let x = random_rows(&mut rng, 200, d);
        let noise = 1e-3;
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|r| {
                apply(&planted, r)
                    .into_iter()
                    .map(|v| v + rng.random_range(-noise..noise))
                    .collect()
            })
            .collect();
        let ts = TrainingSet::new("t", &x, &y).unwrap();
        let dist = |m: &WordMatrix| {
            m.values()
                .iter()
                .zip(planted.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let closed = fit_closed_form(&ts, 1e-6).unwrap();
        assert!(dist(&closed) < 10.0 * noise, "{}", dist(&closed));
        let cfg = RegressionConfig {
            lambda: 1e-6,
            learning_rate: 1.0,
            max_epochs: 20_000,
            convergence_tol: 1e-15,
            seed: 0,
        };
        let gd = fit_gradient_descent(&ts, &cfg).unwrap().matrix.unwrap();
        assert!(dist(&gd) < 10.0 * noise, "{}", dist(&gd));
    }

    #[test]
    fn relabeling_the_basis_conjugates_the_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 8, 5), &random_rows(&mut rng, 8, 5))
            .unwrap();
        let sigma = vec![3, 0, 4, 1, 2];
        let m = fit_closed_form(&ts, 0.3).unwrap();
        let mp = fit_closed_form(&ts.permute_basis(&sigma).unwrap(), 0.3).unwrap();
        let want = apply_permutation(&m, &PermutationMap::new(sigma).unwrap()).unwrap();
        for (a, b) in mp.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_selection_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ts = TrainingSet::new("t", &random_rows(&mut rng, 25, 4), &random_rows(&mut rng, 25, 4))
            .unwrap();
        let a = select_lambda(&ts, &LAMBDA_GRID, 5).unwrap();
        let b = select_lambda(&ts, &LAMBDA_GRID, 5).unwrap();
        assert_eq!(a, b);
        assert!(LAMBDA_GRID.contains(&a.lambda));
        assert_eq!(a.holdout_errors.len(), 3);
        let one = TrainingSet::new("t", &[vec![1.0]], &[vec![2.0]]).unwrap();
        assert_eq!(select_lambda(&one, &LAMBDA_GRID, 0).unwrap().lambda, 0.1);
    }
}
