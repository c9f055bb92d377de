use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, evaluate_hierarchical, train, train_hierarchical, LabelKind, Method, TrainOptions,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Draws `n_train` trials uniformly without replacement for training; the
/// remaining trials form the test set. Samples keep their original order.
pub fn split_by_trial(dataset: &Dataset, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut trials = dataset.trials();
    if n_train == 0 || n_train >= trials.len() {
        return Err(Error::Domain(format!(
            "n_train = {n_train} must be in 1..{} (the trial count)",
            trials.len()
        )));
    }
    trials.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_trials, test_trials) = trials.split_at(n_train);
    Ok((
        dataset.select_trials(train_trials),
        dataset.select_trials(test_trials),
    ))
}

/// Partitions the sorted trial ids into `n_folds` contiguous groups whose
/// sizes differ by at most one.
pub fn trial_folds(dataset: &Dataset, n_folds: usize) -> Result<Vec<Vec<usize>>> {
    let trials = dataset.trials();
    if n_folds < 2 || n_folds > trials.len() {
        return Err(Error::Domain(format!(
            "{n_folds} folds need between 2 and {} trials",
            trials.len()
        )));
    }
    let base = trials.len() / n_folds;
    let extra = trials.len() % n_folds;
    let mut folds = Vec::with_capacity(n_folds);
    let mut start = 0;
    for f in 0..n_folds {
        let size = base + usize::from(f < extra);
        folds.push(trials[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_trials: Vec<Vec<usize>>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

fn run_folds(
    dataset: &Dataset,
    n_folds: usize,
    mut score: impl FnMut(&Dataset, &Dataset) -> Result<f64>,
) -> Result<CvResult> {
    let folds = trial_folds(dataset, n_folds)?;
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    for held_out in &folds {
        let train_trials: Vec<usize> = folds
            .iter()
            .filter(|f| *f != held_out)
            .flatten()
            .copied()
            .collect();
        let fit = dataset.select_trials(&train_trials);
        let val = dataset.select_trials(held_out);
        fold_accuracies.push(score(&fit, &val)?);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CvResult {
        fold_trials: folds,
        fold_accuracies,
        mean_accuracy,
    })
}

/// Trial-grouped k-fold cross-validation of a flat 125-class model.
pub fn cross_validate(
    dataset: &Dataset,
    method: Method,
    n_folds: usize,
    opts: &TrainOptions,
) -> Result<CvResult> {
    run_folds(dataset, n_folds, |fit, val| {
        let model = train(method, &fit.samples, LabelKind::Flat, opts)?;
        Ok(evaluate(&model, &val.samples, LabelKind::Flat)?.accuracy)
    })
}

/// Trial-grouped k-fold cross-validation of the two-stage model, scored by
/// combined accuracy.
pub fn cross_validate_hierarchical(
    dataset: &Dataset,
    method: Method,
    n_folds: usize,
    opts: &TrainOptions,
) -> Result<CvResult> {
    run_folds(dataset, n_folds, |fit, val| {
        let model = train_hierarchical(method, &fit.samples, opts)?;
        Ok(evaluate_hierarchical(&model, &val.samples)?.combined_accuracy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_sweep, SweepSpec};
    use crate::geometry::{ContactGrid, SensorGeometry};
    use crate::optics::OpticsParams;
    use std::collections::HashSet;

    fn sweep(n_trials: usize) -> Dataset {
        let spec = SweepSpec {
            n_trials,
            samples_per_state: 1,
            ..Default::default()
        };
        generate_sweep(
            &SensorGeometry::default(),
            &ContactGrid::default(),
            &OpticsParams::default(),
            &spec,
            0,
        )
        .unwrap()
    }

    #[test]
    fn split_partitions_trials() {
        let d = sweep(27);
        let (train, test) = split_by_trial(&d, 20, 5).unwrap();
        assert_eq!(train.len(), 20 * 125);
        assert_eq!(test.len(), 7 * 125);
        let a: HashSet<usize> = train.trials().into_iter().collect();
        let b: HashSet<usize> = test.trials().into_iter().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), 27);
        let again = split_by_trial(&d, 20, 5).unwrap();
        assert_eq!(again.0, train);
        assert_ne!(
            split_by_trial(&d, 20, 6).unwrap().0.trials(),
            train.trials()
        );
        assert!(matches!(split_by_trial(&d, 27, 0), Err(Error::Domain(_))));
        assert!(split_by_trial(&d, 0, 0).is_err());
    }

    #[test]
    fn folds_partition_trials() {
        let d = sweep(20);
        let folds = trial_folds(&d, 5).unwrap();
        assert!(folds.iter().all(|f| f.len() == 4));
        let all: Vec<usize> = folds.iter().flatten().copied().collect();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        let uneven = trial_folds(&sweep(7), 3).unwrap();
        assert_eq!(
            uneven.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![3, 2, 2]
        );
        assert!(trial_folds(&sweep(3), 5).is_err());
        assert!(trial_folds(&d, 1).is_err());
    }

    #[test]
    fn cv_folds_hold_out_whole_trials() {
        let d = sweep(6);
        let cv = cross_validate(&d, Method::Knn, 3, &TrainOptions::default()).unwrap();
        assert_eq!(cv.fold_accuracies.len(), 3);
        let mut seen = HashSet::new();
        for fold in &cv.fold_trials {
            for t in fold {
                assert!(seen.insert(*t));
            }
        }
        assert_eq!(seen.len(), 6);
        let mean = cv.fold_accuracies.iter().sum::<f64>() / 3.0;
        assert_eq!(cv.mean_accuracy, mean);
    }
}
