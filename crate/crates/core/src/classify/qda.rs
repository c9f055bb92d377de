use serde::{Deserialize, Serialize};

use super::{argmax, regularized_cholesky, TrainingData};
use crate::error::{Error, Result};

/// Quadratic discriminant analysis: one Gaussian per class with its own
/// ridge-regularized covariance, weighted by the empirical class prior.
///
/// Scores are full log joint densities `ln N(x; μ_k, Σ_k) + ln π_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaModel {
    pub classes: Vec<usize>,
    pub dim: usize,
    pub means: Vec<Vec<f64>>,
    /// Row-major `L⁻¹` where `Σ_k = L Lᵀ`; only the lower triangle is used.
    pub whiteners: Vec<Vec<f64>>,
    /// Everything in the score that does not depend on `x`:
    /// `-½(p ln 2π + ln|Σ_k|) + ln π_k`.
    pub offsets: Vec<f64>,
}

impl QdaModel {
    pub(crate) fn fit(data: &TrainingData<'_>, ridge: f64) -> Result<Self> {
        let p = data.dim;
        let n = data.rows.len() as f64;
        let log_2pi = (2.0 * std::f64::consts::PI).ln();
        if let Some(c) = (0..data.classes.len()).find(|&c| data.by_class[c].len() < 2) {
            return Err(Error::Training(format!(
                "class {} needs at least 2 samples for a covariance estimate",
                data.classes[c]
            )));
        }
        let mut means = Vec::new();
        let mut whiteners = Vec::new();
        let mut offsets = Vec::new();
        for c in 0..data.classes.len() {
            let mean = data.class_mean(c);
            let count = data.by_class[c].len();
            let mut cov = data.class_scatter(c, &mean);
            cov.iter_mut().for_each(|v| *v /= (count - 1) as f64);
            let chol = regularized_cholesky(&cov, p, ridge);
            let l = chol.l();
            let log_det: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let l_inv = l
                .solve_lower_triangular(&nalgebra::DMatrix::identity(p, p))
                .expect("Cholesky factor has a positive diagonal");
            let mut whitener = vec![0.0; p * p];
            for i in 0..p {
                for j in 0..=i {
                    whitener[i * p + j] = l_inv[(i, j)];
                }
            }
            let prior = count as f64 / n;
            means.push(mean);
            whiteners.push(whitener);
            offsets.push(-0.5 * (p as f64 * log_2pi + log_det) + prior.ln());
        }
        Ok(QdaModel {
            classes: data.classes.clone(),
            dim: p,
            means,
            whiteners,
            offsets,
        })
    }

    /// Log joint density of `x` under every class, in label order.
    pub fn discriminants(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut centered = vec![0.0; p];
        self.means
            .iter()
            .zip(&self.whiteners)
            .zip(&self.offsets)
            .map(|((mean, w), offset)| {
                for ((slot, v), m) in centered.iter_mut().zip(x).zip(mean) {
                    *slot = v - m;
                }
                let mut maha = 0.0;
                for i in 0..p {
                    let row = &w[i * p..i * p + i + 1];
                    let z: f64 = row.iter().zip(&centered[..=i]).map(|(a, b)| a * b).sum();
                    maha += z * z;
                }
                offset - 0.5 * maha
            })
            .collect()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> usize {
        self.classes[argmax(self.discriminants(x))]
    }
}

#[cfg(test)]
mod tests {
    use crate::classify::{FlatModel, Method, TrainOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Solves `a·x = b` and returns `(x, ln|det a|)` by Gaussian elimination
    /// with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> (Vec<f64>, f64) {
        let n = b.len();
        let mut log_det = 0.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            log_det += a[col][col].abs().ln();
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        (x, log_det)
    }

    fn log_density_oracle(rows: &[Vec<f64>], x: &[f64], prior: f64, ridge: f64) -> f64 {
        let p = x.len();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..p)
            .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n)
            .collect();
        let cov: Vec<Vec<f64>> = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        let s: f64 = rows
                            .iter()
                            .map(|r| (r[i] - mean[i]) * (r[j] - mean[j]))
                            .sum();
                        s / (n - 1.0) + if i == j { ridge } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let diff: Vec<f64> = x.iter().zip(&mean).map(|(a, b)| a - b).collect();
        let (sol, log_det) = gauss_solve(cov, diff.clone());
        let maha: f64 = sol.iter().zip(&diff).map(|(a, b)| a * b).sum();
        -0.5 * (p as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + maha) + prior.ln()
    }

    #[test]
    fn discriminants_match_log_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut class_rows = [Vec::new(), Vec::new()];
        // Class 0: 40 correlated samples; class 1: 60 anisotropic samples.
        for _ in 0..40 {
            let (a, b, c) = (
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            );
            class_rows[0].push(vec![1.0 + a, 2.0 + 0.5 * a + b, -1.0 + 0.3 * c]);
        }
        for _ in 0..60 {
            let (a, b, c) = (
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            );
            class_rows[1].push(vec![-2.0 + 2.0 * a, 0.5 * b, 3.0 + c - 0.4 * a]);
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, rs) in class_rows.iter().enumerate() {
            for r in rs {
                rows.push(r.as_slice());
                labels.push(c);
            }
        }
        let opts = TrainOptions::default();
        let FlatModel::Qda(model) = FlatModel::fit(Method::Qda, &rows, &labels, &opts).unwrap()
        else {
            unreachable!()
        };
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| 3.0 * noise.sample(&mut rng)).collect();
            let got = model.discriminants(&x);
            for c in 0..2 {
                let prior = class_rows[c].len() as f64 / 100.0;
                let expected = log_density_oracle(&class_rows[c], &x, prior, opts.ridge);
                assert!(
                    (got[c] - expected).abs() < 1e-9,
                    "{} vs {}",
                    got[c],
                    expected
                );
            }
        }
    }
}
