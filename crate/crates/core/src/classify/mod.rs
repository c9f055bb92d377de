//! Classical classifiers over feature vectors (LDA, QDA, one-vs-one linear
//! SVM, k-NN), the two-stage location-then-depth scheme, trial-grouped
//! splitting, cross-validation, and accuracy accounting.
//!
//! Labels are plain `usize` class ids. Every model keeps its label space
//! sorted ascending and breaks ties toward the smallest label.

mod hierarchical;
mod knn;
mod lda;
mod metrics;
mod qda;
mod split;
mod svm;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSample;
use crate::error::{Error, Result};

pub use hierarchical::{predict_hierarchical, train_hierarchical, HierarchicalModel};
pub use knn::KnnModel;
pub use lda::LdaModel;
pub use metrics::{evaluate, evaluate_hierarchical, HierarchicalMetrics, Metrics};
pub use qda::QdaModel;
pub use split::{
    cross_validate, cross_validate_hierarchical, split_by_trial, trial_folds, CvResult,
};
pub use svm::SvmModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lda,
    Qda,
    Svm,
    Knn,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lda, Method::Qda, Method::Svm, Method::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lda => "lda",
            Method::Qda => "qda",
            Method::Svm => "svm",
            Method::Knn => "knn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!("unknown method `{s}` (expected lda|qda|svm|knn)"))
            })
    }
}

/// Hyperparameters shared by all trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    /// Added to covariance diagonals by LDA and QDA.
    pub ridge: f64,
    /// Neighbors consulted by k-NN.
    pub k: usize,
    /// SVM soft-margin penalty.
    pub svm_c: f64,
    /// Passes over each pair's samples in SVM training.
    pub svm_epochs: usize,
    /// Seeds the SVM sample order.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            ridge: 1e-6,
            k: 1,
            svm_c: 1.0,
            svm_epochs: 20,
            seed: 0,
        }
    }
}

/// Which label of a [`LabeledSample`] a model learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    /// The 125-way `(location, depth)` class.
    Flat,
    Location,
    /// Depth level `1..=5`; meant for samples of a single location.
    Depth,
}

impl LabelKind {
    pub fn of(self, s: &LabeledSample) -> usize {
        match self {
            LabelKind::Flat => s.flat_class(),
            LabelKind::Location => s.location,
            LabelKind::Depth => s.depth_level,
        }
    }
}

/// A trained single-stage classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum FlatModel {
    Lda(LdaModel),
    Qda(QdaModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

impl FlatModel {
    /// Trains on arbitrary rows; every row must have the same length.
    pub fn fit(
        method: Method,
        rows: &[&[f64]],
        labels: &[usize],
        opts: &TrainOptions,
    ) -> Result<Self> {
        let data = TrainingData::new(rows, labels)?;
        Ok(match method {
            Method::Lda => FlatModel::Lda(LdaModel::fit(&data, opts.ridge)?),
            Method::Qda => FlatModel::Qda(QdaModel::fit(&data, opts.ridge)?),
            Method::Svm => FlatModel::Svm(SvmModel::fit(&data, opts)?),
            Method::Knn => FlatModel::Knn(KnnModel::fit(&data, opts.k)?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            FlatModel::Lda(_) => Method::Lda,
            FlatModel::Qda(_) => Method::Qda,
            FlatModel::Svm(_) => Method::Svm,
            FlatModel::Knn(_) => Method::Knn,
        }
    }

    pub fn classes(&self) -> &[usize] {
        match self {
            FlatModel::Lda(m) => &m.classes,
            FlatModel::Qda(m) => &m.classes,
            FlatModel::Svm(m) => &m.classes,
            FlatModel::Knn(m) => &m.classes,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FlatModel::Lda(m) => m.dim,
            FlatModel::Qda(m) => m.dim,
            FlatModel::Svm(m) => m.dim,
            FlatModel::Knn(m) => m.dim,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            FlatModel::Lda(m) => m.predict(x),
            FlatModel::Qda(m) => m.predict(x),
            FlatModel::Svm(m) => m.predict(x),
            FlatModel::Knn(m) => m.predict(x),
        })
    }

    pub fn predict_many(&self, rows: &[&[f64]]) -> Result<Vec<usize>> {
        use rayon::prelude::*;
        rows.par_iter().map(|x| self.predict(x)).collect()
    }
}

/// Trains `method` on the chosen label of `samples`.
pub fn train(
    method: Method,
    samples: &[LabeledSample],
    label: LabelKind,
    opts: &TrainOptions,
) -> Result<FlatModel> {
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.features.as_slice()).collect();
    let labels: Vec<usize> = samples.iter().map(|s| label.of(s)).collect();
    FlatModel::fit(method, &rows, &labels, opts)
}

/// Training rows grouped by class, with the label space sorted ascending.
pub(crate) struct TrainingData<'a> {
    pub dim: usize,
    pub classes: Vec<usize>,
    /// `by_class[i]` holds the rows labeled `classes[i]`.
    pub by_class: Vec<Vec<&'a [f64]>>,
    pub rows: &'a [&'a [f64]],
    /// Index into `classes` for each row.
    pub class_of_row: Vec<usize>,
}

impl<'a> TrainingData<'a> {
    fn new(rows: &'a [&'a [f64]], labels: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Training("no training samples".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Training(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Training("rows have no features".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: r.len(),
            });
        }
        if rows.iter().flat_map(|r| r.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Training("non-finite feature value".into()));
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let class_of_row: Vec<usize> = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label is in class list"))
            .collect();
        let mut by_class = vec![Vec::new(); classes.len()];
        for (row, &c) in rows.iter().zip(&class_of_row) {
            by_class[c].push(*row);
        }
        Ok(TrainingData {
            dim,
            classes,
            by_class,
            rows,
            class_of_row,
        })
    }

    pub fn class_mean(&self, c: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in &self.by_class[c] {
            for (m, v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        let n = self.by_class[c].len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Scatter matrix `Σ (x - mean)(x - mean)ᵀ` of class `c`, row-major.
    pub fn class_scatter(&self, c: usize, mean: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut s = vec![0.0; p * p];
        let mut centered = vec![0.0; p];
        for row in &self.by_class[c] {
            for (slot, (v, m)) in centered.iter_mut().zip(row.iter().zip(mean)) {
                *slot = v - m;
            }
            for i in 0..p {
                let ci = centered[i];
                for j in i..p {
                    s[i * p + j] += ci * centered[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                s[i * p + j] = s[j * p + i];
            }
        }
        s
    }
}

/// Index of the largest score; ties go to the earliest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.into_iter().enumerate() {
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Cholesky factor of `a + ridge·I`, growing the ridge tenfold until the
/// matrix factors.
pub(crate) fn regularized_cholesky(
    a: &[f64],
    p: usize,
    ridge: f64,
) -> nalgebra::Cholesky<f64, nalgebra::Dyn> {
    let base = nalgebra::DMatrix::from_row_slice(p, p, a);
    let mut r = ridge.max(0.0);
    loop {
        let m = &base + nalgebra::DMatrix::identity(p, p) * r;
        if let Some(ch) = m.cholesky() {
            return ch;
        }
        r = if r == 0.0 { 1e-12 } else { r * 10.0 };
    }
}

/// Provenance stored alongside a serialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub method: Method,
    pub seed: u64,
    pub dataset_hash: String,
    pub options: TrainOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Flat(FlatModel),
    Hierarchical(HierarchicalModel),
}

impl TrainedModel {
    /// `(location, depth_level)` for a feature vector. Flat models must be
    /// trained on flat class labels.
    pub fn predict_contact(&self, x: &[f64]) -> Result<(usize, usize)> {
        match self {
            TrainedModel::Flat(m) => crate::geometry::split_class_index(m.predict(x)?),
            TrainedModel::Hierarchical(m) => predict_hierarchical(m, x),
        }
    }
}

/// JSON model file: the model plus how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub metadata: ModelMetadata,
    #[serde(flatten)]
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}
