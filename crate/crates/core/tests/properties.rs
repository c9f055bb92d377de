use colortouch::classify::{FlatModel, Method, TrainOptions};
use colortouch::descriptor::{extract_roi_means, features_from_response, RoiSpec};
use colortouch::geometry::{Color, ContactState, Emitter, Point, SensorGeometry};
use colortouch::mechanics::{hysteresis_area, ForceCurve, MechanicsParams};
use colortouch::optics::{
    deformed_response, render_frame, FrameSpec, OpticsParams, ReceiverResponse,
};
use proptest::prelude::*;

fn response_strategy() -> impl Strategy<Value = ReceiverResponse> {
    prop::collection::vec(0.0..=1.0f64, 27).prop_map(|v| ReceiverResponse::from_slice(&v).unwrap())
}

/// Pixel bounds of a ROI, `(x0, y0, x1, y1)` half-open.
fn roi_bounds(spec: &RoiSpec, i: usize) -> (u32, u32, u32, u32) {
    let roi = &spec.rois[i];
    let x0 = roi.center[0] - roi.width / 2;
    let y0 = roi.center[1] - roi.height / 2;
    (x0, y0, x0 + roi.width, y0 + roi.height)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn render_then_extract_is_within_one_level(resp in response_strategy()) {
        // A channel rounding to zero everywhere in a disc could make the ROI
        // black, so keep at least one channel visible per receiver.
        let mut resp = resp;
        for r in resp.0.iter_mut() {
            r[0] = r[0].max(0.1);
        }
        let frame = render_frame(&resp, &FrameSpec::default()).unwrap();
        let got = extract_roi_means(&frame, &RoiSpec::default()).unwrap();
        let expected = features_from_response(&resp);
        for (a, b) in got.0.iter().zip(expected.0) {
            prop_assert!((a - b).abs() <= 1.0 / 255.0, "{a} vs {b}");
        }
    }

    #[test]
    fn black_pixels_and_permutations_do_not_change_features(
        resp in response_strategy(),
        seed in any::<u64>(),
        extra_black in prop::collection::vec((0u32..40, 0u32..40, 0u8..=10), 0..200),
    ) {
        let mut resp = resp;
        for r in resp.0.iter_mut() {
            r[1] = r[1].max(0.2);
        }
        let spec = RoiSpec::default();
        let frame = render_frame(&resp, &FrameSpec::default()).unwrap();
        let reference = extract_roi_means(&frame, &spec).unwrap();

        // Shuffle the pixels inside every ROI.
        let mut shuffled = frame.clone();
        let mut state = seed | 1;
        for i in 0..9 {
            let (x0, y0, x1, y1) = roi_bounds(&spec, i);
            let coords: Vec<(u32, u32)> = (y0..y1).flat_map(|y| (x0..x1).map(move |x| (x, y))).collect();
            let mut pixels: Vec<_> = coords.iter().map(|&(x, y)| *frame.image.get_pixel(x, y)).collect();
            for k in (1..pixels.len()).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                pixels.swap(k, (state % (k as u64 + 1)) as usize);
            }
            for (&(x, y), p) in coords.iter().zip(pixels) {
                shuffled.image.put_pixel(x, y, p);
            }
        }
        prop_assert_eq!(extract_roi_means(&shuffled, &spec).unwrap(), reference);

        // Darken pixels that were already black to other near-black values
        // (anything with max channel at most the threshold).
        let mut darkened = frame.clone();
        for (i, &(dx, dy, level)) in extra_black.iter().enumerate() {
            let (x0, y0, _, _) = roi_bounds(&spec, i % 9);
            let (x, y) = (x0 + dx, y0 + dy);
            let px = darkened.image.get_pixel(x, y).0;
            if px.iter().copied().max().unwrap() <= spec.black_threshold {
                darkened.image.put_pixel(x, y, image::Rgb([level, level / 2, 0]));
            }
        }
        prop_assert_eq!(extract_roi_means(&darkened, &spec).unwrap(), reference);
    }

    #[test]
    fn force_is_additive_and_monotone(d1 in 0.0..=1.5f64, d2 in 0.0..=1.5f64) {
        let m = MechanicsParams::default();
        let sum = m.force_from_depth(d1 + d2).unwrap();
        let parts = m.force_from_depth(d1).unwrap() + m.force_from_depth(d2).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-12 * sum.max(1.0));
        if d1 < d2 {
            prop_assert!(m.force_from_depth(d1).unwrap() < m.force_from_depth(d2).unwrap());
        }
    }

    #[test]
    fn a_curve_has_no_hysteresis_with_itself(
        forces in prop::collection::vec(0.0..20.0f64, 2..40),
    ) {
        let depths: Vec<f64> = (0..forces.len()).map(|i| 3.0 * i as f64 / (forces.len() - 1) as f64).collect();
        let curve = ForceCurve::new(depths.into_iter().zip(forces).collect()).unwrap();
        prop_assert_eq!(hysteresis_area(&curve, &curve).unwrap(), 0.0);
    }

    #[test]
    fn mirrored_contacts_give_mirrored_responses(
        x in -18.0..18.0f64,
        y in -18.0..18.0f64,
        depth in 0.0..=3.0f64,
    ) {
        // All emitters on the x axis, so reflecting y maps each emitter to
        // itself and receiver row r to row 2 - r.
        let e = |x, color| Emitter { position: Point::new(x, 0.0), color };
        let geometry = SensorGeometry::new(
            40.0, 40.0, 5.0, 5.0,
            [e(-20.0, Color::Red), e(-2.5, Color::Green), e(20.0, Color::Blue)],
        ).unwrap();
        let optics = OpticsParams { noise_sigma: 0.0, ..Default::default() };
        let up = deformed_response(&geometry, &optics, &ContactState::at(Point::new(x, y), depth, 0, 1).unwrap()).unwrap();
        let down = deformed_response(&geometry, &optics, &ContactState::at(Point::new(x, -y), depth, 0, 1).unwrap()).unwrap();
        for j in 0..9 {
            let mirrored = (2 - j / 3) * 3 + j % 3;
            prop_assert_eq!(up.0[j], down.0[mirrored]);
        }
    }
}

/// Random labelled data: `k` classes, `n` rows each, `dim` features.
fn labelled(seed: u64, k: usize, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..k {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        for _ in 0..n {
            rows.push(
                center
                    .iter()
                    .map(|m| m + rng.random_range(-1.0..1.0))
                    .collect(),
            );
            labels.push(c);
        }
    }
    (rows, labels)
}

fn fit(method: Method, rows: &[Vec<f64>], labels: &[usize]) -> FlatModel {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    FlatModel::fit(method, &refs, labels, &TrainOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discriminant_analysis_ignores_translation(
        seed in any::<u64>(),
        shift in prop::collection::vec(-5.0..5.0f64, 4),
    ) {
        let (rows, labels) = labelled(seed, 4, 15, 4);
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        let (queries, _) = labelled(seed ^ 1, 5, 8, 4);
        for method in [Method::Lda, Method::Qda] {
            let a = fit(method, &rows, &labels);
            let b = fit(method, &moved, &labels);
            for q in &queries {
                let qm: Vec<f64> = q.iter().zip(&shift).map(|(a, b)| a + b).collect();
                prop_assert_eq!(a.predict(q).unwrap(), b.predict(&qm).unwrap());
            }
        }
    }

    #[test]
    fn nearest_neighbor_ignores_rotation(seed in any::<u64>(), angles in prop::collection::vec(0.0..std::f64::consts::TAU, 3)) {
        let (rows, labels) = labelled(seed, 5, 10, 3);
        let (queries, _) = labelled(seed ^ 7, 4, 10, 3);
        // Compose three plane rotations into an orthogonal 3×3 transform.
        let rotate = |v: &[f64]| -> Vec<f64> {
            let mut v = v.to_vec();
            for (k, &t) in angles.iter().enumerate() {
                let (i, j) = [(0, 1), (1, 2), (0, 2)][k];
                let (s, c) = t.sin_cos();
                let (a, b) = (v[i], v[j]);
                v[i] = c * a - s * b;
                v[j] = s * a + c * b;
            }
            v
        };
        let rotated: Vec<Vec<f64>> = rows.iter().map(|r| rotate(r)).collect();
        let a = fit(Method::Knn, &rows, &labels);
        let b = fit(Method::Knn, &rotated, &labels);
        for q in &queries {
            // Skip queries whose two nearest distances are too close for
            // rounding in the rotation to be harmless.
            let mut d: Vec<f64> = rows.iter().map(|r| r.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum()).collect();
            d.sort_by(f64::total_cmp);
            if d[1] - d[0] < 1e-9 {
                continue;
            }
            prop_assert_eq!(a.predict(q).unwrap(), b.predict(&rotate(q)).unwrap());
        }
    }
}
