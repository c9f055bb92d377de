use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_hierarchical, FlatModel, HierarchicalModel, LabelKind};
use crate::dataset::LabeledSample;
use crate::error::{Error, Result};

/// Accuracy and confusion counts of one labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Sorted union of true and predicted labels.
    pub classes: Vec<usize>,
    /// `confusion[i][j]` counts samples of `classes[i]` predicted as `classes[j]`.
    pub confusion: Vec<Vec<usize>>,
    /// Recall of each class; `None` for classes absent from the truth.
    pub per_class_accuracy: Vec<Option<f64>>,
}

impl Metrics {
    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Domain("cannot evaluate an empty test set".into()));
        }
        if truth.len() != predicted.len() {
            return Err(Error::Domain(format!(
                "{} labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut classes: Vec<usize> = truth.iter().chain(predicted).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        let idx = |c: &usize| classes.binary_search(c).expect("class present");
        let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[idx(t)][idx(p)] += 1;
        }
        let correct = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
        let per_class_accuracy = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: usize = row.iter().sum();
                (total > 0).then(|| row[i] as f64 / total as f64)
            })
            .collect();
        Ok(Metrics {
            n: truth.len(),
            correct,
            accuracy: correct as f64 / truth.len() as f64,
            classes,
            confusion,
            per_class_accuracy,
        })
    }
}

/// Evaluates a flat model against the `label` of every test sample.
pub fn evaluate(model: &FlatModel, test: &[LabeledSample], label: LabelKind) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::Domain("cannot evaluate an empty test set".into()));
    }
    let rows: Vec<&[f64]> = test.iter().map(|s| s.features.as_slice()).collect();
    let predicted = model.predict_many(&rows)?;
    let truth: Vec<usize> = test.iter().map(|s| label.of(s)).collect();
    Metrics::from_predictions(&truth, &predicted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalMetrics {
    pub n: usize,
    pub location_correct: usize,
    /// Samples with both the location and the depth level right.
    pub both_correct: usize,
    pub location_accuracy: f64,
    /// Depth accuracy among samples whose location was right; zero when no
    /// location was right.
    pub depth_accuracy: f64,
    pub combined_accuracy: f64,
    /// The combined prediction scored as a 125-way flat class.
    pub flat: Metrics,
}

pub fn evaluate_hierarchical(
    model: &HierarchicalModel,
    test: &[LabeledSample],
) -> Result<HierarchicalMetrics> {
    if test.is_empty() {
        return Err(Error::Domain("cannot evaluate an empty test set".into()));
    }
    let predicted = test
        .par_iter()
        .map(|s| predict_hierarchical(model, s.features.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let mut location_correct = 0;
    let mut both_correct = 0;
    for (s, &(loc, lvl)) in test.iter().zip(&predicted) {
        if loc == s.location {
            location_correct += 1;
            if lvl == s.depth_level {
                both_correct += 1;
            }
        }
    }
    let truth: Vec<usize> = test.iter().map(|s| s.flat_class()).collect();
    let flat_pred: Vec<usize> = predicted
        .iter()
        .map(|&(loc, lvl)| loc * crate::geometry::N_DEPTH_LEVELS + lvl - 1)
        .collect();
    let n = test.len();
    Ok(HierarchicalMetrics {
        n,
        location_correct,
        both_correct,
        location_accuracy: location_correct as f64 / n as f64,
        depth_accuracy: if location_correct == 0 {
            0.0
        } else {
            both_correct as f64 / location_correct as f64
        },
        combined_accuracy: both_correct as f64 / n as f64,
        flat: Metrics::from_predictions(&truth, &flat_pred)?,
    })
}
