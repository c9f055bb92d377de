use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, TrainOptions, TrainingData};
use crate::dataset::derive_seed;
use crate::error::{Error, Result};

/// One-vs-one linear soft-margin SVM.
///
/// Features are standardized with the training mean and standard deviation,
/// then each class pair gets a hyperplane minimizing the soft-margin hinge
/// objective `½‖w‖² + C·Σ max(0, 1 - y·wᵀx)` on rows centered at the pair
/// mean. The solver is dual coordinate
/// descent with a fixed number of epochs and a seeded per-epoch shuffle.
/// The bias is the weight of a constant feature. Prediction is a majority
/// vote over all pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<usize>,
    pub dim: usize,
    /// Class-index pairs `(a, b)` with `a < b`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    /// Per pair, raw-feature weights followed by the bias. A non-negative
    /// decision value votes for `a`.
    pub hyperplanes: Vec<Vec<f64>>,
}

impl SvmModel {
    pub(crate) fn fit(data: &TrainingData<'_>, opts: &TrainOptions) -> Result<Self> {
        if !(opts.svm_c.is_finite() && opts.svm_c > 0.0) || opts.svm_epochs == 0 {
            return Err(Error::Training(
                "SVM needs a positive C and at least one epoch".into(),
            ));
        }
        let p = data.dim;
        let n = data.rows.len() as f64;
        let mean: Vec<f64> = (0..p)
            .map(|i| data.rows.iter().map(|r| r[i]).sum::<f64>() / n)
            .collect();
        let scale: Vec<f64> = (0..p)
            .map(|i| {
                let var = data
                    .rows
                    .iter()
                    .map(|r| (r[i] - mean[i]).powi(2))
                    .sum::<f64>()
                    / n;
                if var.sqrt() > 1e-12 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        // Standardized rows with a trailing constant 1 for the bias.
        let standardized: Vec<Vec<Vec<f64>>> = data
            .by_class
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|r| {
                        let mut z: Vec<f64> = r
                            .iter()
                            .zip(&mean)
                            .zip(&scale)
                            .map(|((v, m), s)| (v - m) / s)
                            .collect();
                        z.push(1.0);
                        z
                    })
                    .collect()
            })
            .collect();

        let k = data.classes.len();
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .collect();
        let hyperplanes = pairs
            .par_iter()
            .map(|&(a, b)| {
                let seed =
                    derive_seed(opts.seed, &[data.classes[a] as u64, data.classes[b] as u64]);
                let w = train_pair(&standardized[a], &standardized[b], opts, seed);
                // Fold the standardization back into raw-feature weights.
                let mut raw = Vec::with_capacity(p + 1);
                let mut bias = w[p];
                for i in 0..p {
                    raw.push(w[i] / scale[i]);
                    bias -= w[i] * mean[i] / scale[i];
                }
                raw.push(bias);
                raw
            })
            .collect();
        Ok(SvmModel {
            classes: data.classes.clone(),
            dim: p,
            pairs,
            hyperplanes,
        })
    }

    pub(crate) fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0.0; self.classes.len()];
        for (&(a, b), w) in self.pairs.iter().zip(&self.hyperplanes) {
            let f: f64 = w[..self.dim].iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + w[self.dim];
            if f >= 0.0 {
                votes[a] += 1.0;
            } else {
                votes[b] += 1.0;
            }
        }
        self.classes[argmax(votes)]
    }
}

/// Dual coordinate descent for one pair; `positive` rows get label +1.
/// Rows end with the constant bias feature.
///
/// The rows are first centered on the pair mean, so the constant feature
/// only has to absorb a class-balance offset. The solver then minimizes
/// `½‖w‖² + C·Σ max(0, 1 - y·wᵀx)` by exact line search on one dual
/// variable `α_i ∈ [0, C]` at a time, keeping `w = Σ α_i y_i x_i` up to
/// date. The returned weights apply to the uncentered rows.
fn train_pair(
    positive: &[Vec<f64>],
    negative: &[Vec<f64>],
    opts: &TrainOptions,
    seed: u64,
) -> Vec<f64> {
    let dim = positive[0].len();
    let p = dim - 1;
    let total = (positive.len() + negative.len()) as f64;
    let mut center = vec![0.0; p];
    for row in positive.iter().chain(negative) {
        for (c, v) in center.iter_mut().zip(row) {
            *c += v / total;
        }
    }
    let samples: Vec<(Vec<f64>, f64)> = positive
        .iter()
        .map(|r| (r, 1.0))
        .chain(negative.iter().map(|r| (r, -1.0)))
        .map(|(r, y)| {
            let mut x: Vec<f64> = r[..p].iter().zip(&center).map(|(v, c)| v - c).collect();
            x.push(r[p]);
            (x, y)
        })
        .collect();
    let sq_norms: Vec<f64> = samples
        .iter()
        .map(|(x, _)| x.iter().map(|v| v * v).sum())
        .collect();
    let c = opts.svm_c;
    let mut alpha = vec![0.0; samples.len()];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; dim];
    for _ in 0..opts.svm_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = (&samples[i].0, samples[i].1);
            let grad = y * w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - 1.0;
            let updated = (alpha[i] - grad / sq_norms[i]).clamp(0.0, c);
            let delta = (updated - alpha[i]) * y;
            if delta != 0.0 {
                alpha[i] = updated;
                for (a, b) in w.iter_mut().zip(x) {
                    *a += delta * b;
                }
            }
        }
    }
    w[p] -= w[..p].iter().zip(&center).map(|(a, b)| a * b).sum::<f64>();
    w
}
