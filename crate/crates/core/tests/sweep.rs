use std::collections::BTreeMap;

use colortouch::classify::{
    cross_validate, evaluate_hierarchical, predict_hierarchical, split_by_trial,
    train_hierarchical, Method, TrainOptions,
};
use colortouch::dataset::{generate_sweep, Dataset, SweepSpec};
use colortouch::descriptor::features_from_response;
use colortouch::geometry::{ContactGrid, ContactState, SensorGeometry, N_CLASSES};
use colortouch::optics::{deformed_response, OpticsParams};

fn sweep(sigma: f64, spec: SweepSpec, seed: u64) -> Dataset {
    let optics = OpticsParams {
        noise_sigma: sigma,
        ..Default::default()
    };
    generate_sweep(
        &SensorGeometry::default(),
        &ContactGrid::default(),
        &optics,
        &spec,
        seed,
    )
    .unwrap()
}

fn small(n_trials: usize, samples_per_state: usize) -> SweepSpec {
    SweepSpec {
        n_trials,
        samples_per_state,
        ..Default::default()
    }
}

#[test]
fn per_class_spread_matches_noise_level() {
    let sigma = 0.01;
    let data = sweep(sigma, SweepSpec::default(), 3);
    let clean = sweep(0.0, small(1, 1), 0);
    let clean: BTreeMap<usize, [f64; 27]> = clean
        .samples
        .iter()
        .map(|s| (s.flat_class(), s.features.0))
        .collect();
    let mut checked = 0;
    let mut groups: BTreeMap<usize, Vec<[f64; 27]>> = BTreeMap::new();
    for s in &data.samples {
        groups.entry(s.flat_class()).or_default().push(s.features.0);
    }
    assert_eq!(groups.len(), N_CLASSES);
    for (class, rows) in &groups {
        assert_eq!(rows.len(), 270);
        for ch in 0..27 {
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r[ch]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[ch] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            let level = clean[class][ch];
            if (3.0 * sigma..=1.0 - 3.0 * sigma).contains(&level) {
                assert!(
                    (sd - sigma).abs() <= 0.2 * sigma,
                    "class {class} channel {ch}: sd {sd}"
                );
                checked += 1;
            } else {
                // Clamping at the [0, 1] bounds can only shrink the spread.
                assert!(sd <= 1.2 * sigma, "class {class} channel {ch}: sd {sd}");
            }
        }
    }
    assert!(checked > 3000, "only {checked} unclamped cells");
}

#[test]
fn noiseless_samples_equal_the_forward_model() {
    let data = sweep(0.0, small(3, 2), 11);
    let grid = ContactGrid::default();
    let geometry = SensorGeometry::default();
    let optics = OpticsParams {
        noise_sigma: 0.0,
        ..Default::default()
    };
    for s in &data.samples {
        let contact = ContactState::new(&grid, s.location, s.depth_level).unwrap();
        let clean =
            features_from_response(&deformed_response(&geometry, &optics, &contact).unwrap());
        let stored = clean.0.map(|v| v as f32 as f64);
        assert_eq!(s.features.0, stored);
    }
}

#[test]
fn noiseless_sweep_is_separable() {
    let data = sweep(0.0, small(6, 2), 5);
    let opts = TrainOptions::default();
    let (train, test) = split_by_trial(&data, 4, 0).unwrap();
    for method in Method::ALL {
        let cv = cross_validate(&train, method, 2, &opts).unwrap();
        assert_eq!(cv.mean_accuracy, 1.0, "{method} CV");
    }
    // Stage 1 pools five depth levels into each location class. Only the
    // nearest-neighbor rule is guaranteed to separate such unions.
    let model = train_hierarchical(Method::Knn, &train.samples, &opts).unwrap();
    assert_eq!(model.depth.len(), 25);
    let m = evaluate_hierarchical(&model, &test.samples).unwrap();
    assert_eq!(m.combined_accuracy, 1.0);
}

#[test]
fn hierarchical_accounting_on_noisy_data() {
    let data = sweep(0.004, small(5, 2), 8);
    let (train, test) = split_by_trial(&data, 3, 1).unwrap();
    for method in [Method::Lda, Method::Knn] {
        let model = train_hierarchical(method, &train.samples, &TrainOptions::default()).unwrap();
        let m = evaluate_hierarchical(&model, &test.samples).unwrap();
        let both = test
            .samples
            .iter()
            .filter(|s| {
                predict_hierarchical(&model, s.features.as_slice()).unwrap()
                    == (s.location, s.depth_level)
            })
            .count();
        assert_eq!(m.both_correct, both);
        assert_eq!(m.flat.correct, both);
        assert_eq!(m.combined_accuracy, both as f64 / test.len() as f64);
        assert!(m.combined_accuracy <= m.location_accuracy);
    }
}
