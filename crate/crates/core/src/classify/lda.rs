use serde::{Deserialize, Serialize};

use super::{argmax, regularized_cholesky, TrainingData};
use crate::error::{Error, Result};

/// Linear discriminant analysis with a ridge-regularized pooled covariance
/// and empirical class priors.
///
/// Class `k` scores `xᵀΣ⁻¹μ_k - ½ μ_kᵀΣ⁻¹μ_k + ln π_k`, stored as a weight
/// vector and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub classes: Vec<usize>,
    pub dim: usize,
    pub means: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl LdaModel {
    pub(crate) fn fit(data: &TrainingData<'_>, ridge: f64) -> Result<Self> {
        let p = data.dim;
        let k = data.classes.len();
        let n = data.rows.len();
        if n <= k {
            return Err(Error::Training(format!(
                "{n} samples cannot estimate a covariance pooled over {k} classes"
            )));
        }
        let means: Vec<Vec<f64>> = (0..k).map(|c| data.class_mean(c)).collect();
        let mut pooled = vec![0.0; p * p];
        for (c, mean) in means.iter().enumerate() {
            for (acc, s) in pooled.iter_mut().zip(data.class_scatter(c, mean)) {
                *acc += s;
            }
        }
        let dof = (n - k) as f64;
        pooled.iter_mut().for_each(|v| *v /= dof);
        let chol = regularized_cholesky(&pooled, p, ridge);

        let mut weights = Vec::with_capacity(k);
        let mut biases = Vec::with_capacity(k);
        for (c, mean) in means.iter().enumerate() {
            let w = chol.solve(&nalgebra::DVector::from_column_slice(mean));
            let quad: f64 = w.iter().zip(mean).map(|(a, b)| a * b).sum();
            let prior = data.by_class[c].len() as f64 / n as f64;
            weights.push(w.iter().copied().collect());
            biases.push(-0.5 * quad + prior.ln());
        }
        Ok(LdaModel {
            classes: data.classes.clone(),
            dim: p,
            means,
            weights,
            biases,
        })
    }

    /// Discriminant score of every class, in label order.
    pub fn discriminants(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> usize {
        self.classes[argmax(self.discriminants(x))]
    }
}
