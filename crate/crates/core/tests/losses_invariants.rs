//! Loss invariants: monotonicity and translation invariance of the
//! smoothness loss, distillation loss properties, affinity softmax
//! bounds, and convex-combination outputs of peer regularization.

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lgg_core::{
    affinity_loss, gkd_loss, graph_smoothness_loss, peer_regularize, AffinitySimilarity,
    AffinityTarget, FeatureMatrix, LabelVector, LayerFeatureSet, Metric, PeerBank,
};

#[test]
fn smoothness_loss_decreases_with_inter_class_distance() {
    let labels = LabelVector::new(vec![0, 1], 2).unwrap();
    let mut last = f64::INFINITY;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let f = FeatureMatrix::from_rows(&[vec![0.0], vec![t]]).unwrap();
        let loss = graph_smoothness_loss(&f, &labels, 1.0, 1, Metric::Euclidean).unwrap();
        assert!(loss < last, "loss must strictly decrease as t grows");
        last = loss;
    }
}

#[test]
fn smoothness_loss_is_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..3).map(|_| rng.gen::<f64>() * 2.0).collect())
        .collect();
    let shifted: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip([10.0, -7.0, 3.0]).map(|(v, t)| v + t).collect())
        .collect();
    let labels = LabelVector::new(vec![0, 1, 0, 1, 0, 1], 2).unwrap();
    let a = graph_smoothness_loss(
        &FeatureMatrix::from_rows(&rows).unwrap(),
        &labels,
        1.0,
        2,
        Metric::Euclidean,
    )
    .unwrap();
    let b = graph_smoothness_loss(
        &FeatureMatrix::from_rows(&shifted).unwrap(),
        &labels,
        1.0,
        2,
        Metric::Euclidean,
    )
    .unwrap();
    assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
}

proptest! {
    #[test]
    fn gkd_loss_is_nonnegative_and_symmetric(
        flat_t in proptest::collection::vec(-2.0f64..2.0, 12),
        flat_s in proptest::collection::vec(-2.0f64..2.0, 12),
    ) {
        let t = LayerFeatureSet::new(vec![
            FeatureMatrix::new(Array2::from_shape_vec((4, 3), flat_t).unwrap()).unwrap(),
        ])
        .unwrap();
        let s = LayerFeatureSet::new(vec![
            FeatureMatrix::new(Array2::from_shape_vec((4, 3), flat_s).unwrap()).unwrap(),
        ])
        .unwrap();
        let forward = gkd_loss(&t, &s, false, None).unwrap();
        let backward = gkd_loss(&s, &t, false, None).unwrap();
        prop_assert!(forward >= 0.0);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn affinity_outcome_is_bounded(
        flat in proptest::collection::vec(-3.0f64..3.0, 15),
        pair_bits in proptest::collection::vec(proptest::bool::ANY, 20),
    ) {
        let f = FeatureMatrix::new(Array2::from_shape_vec((5, 3), flat).unwrap()).unwrap();
        let mut pairs = Vec::new();
        let mut bit = 0;
        for i in 0..5usize {
            for j in 0..5usize {
                if i != j && bit < pair_bits.len() {
                    if pair_bits[bit] {
                        pairs.push((i, j));
                    }
                    bit += 1;
                }
            }
        }
        let target = AffinityTarget::new(5, pairs).unwrap();
        let out = affinity_loss(&f, &target, AffinitySimilarity::ScaledDot).unwrap();
        prop_assert!(out.mass >= 0.0 && out.mass <= 5.0 + 1e-10);
        prop_assert!(out.loss >= -1e-10 && out.loss <= 1.0 + 1e-10);
    }
}

#[test]
fn affinity_rows_sum_to_one() {
    // With S = all off-diagonal pairs the captured mass is the sum of all
    // softmax rows, which must equal n within 1e-10 each.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = FeatureMatrix::new(Array2::from_shape_fn((7, 4), |_| rng.gen::<f64>() - 0.5))
        .unwrap();
    let mut pairs = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    let target = AffinityTarget::new(7, pairs).unwrap();
    let out = affinity_loss(&f, &target, AffinitySimilarity::Cosine).unwrap();
    assert!((out.mass - 7.0).abs() <= 7.0 * 1e-10);
}

#[test]
fn peer_output_stays_in_candidate_bounding_box() {
    // Convex combinations stay inside the bounding box of the selected
    // neighbors; with k = all candidates, that is the whole bank.
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let input = Array2::from_shape_fn((5, 3), |_| rng.gen::<f64>() * 2.0 - 1.0);
    let peers: Vec<Array2<f64>> = (0..3)
        .map(|_| Array2::from_shape_fn((4, 3), |_| rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let weights = Array1::from_shape_fn(6, |_| rng.gen::<f64>() - 0.5);
    let bank = PeerBank::new(peers.clone(), weights, 0.2, 0.01).unwrap();
    let out = peer_regularize(&input, &bank, 12).unwrap();

    for c in 0..3 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &peers {
            for &v in p.column(c).iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        for &v in out.column(c).iter() {
            assert!(v >= lo - 1e-10 && v <= hi + 1e-10);
        }
    }
}

#[test]
fn gkd_zero_iff_equal_normalized_graphs() {
    // Scaling all rows of one layer by positive constants preserves
    // cosine similarities, so the normalized graphs coincide and the
    // loss is exactly zero even though the features differ.
    let base = FeatureMatrix::from_rows(&[
        vec![1.0, 0.5],
        vec![0.2, 1.0],
        vec![0.8, 0.8],
    ])
    .unwrap();
    let scaled = FeatureMatrix::from_rows(&[
        vec![2.0, 1.0],
        vec![0.1, 0.5],
        vec![3.2, 3.2],
    ])
    .unwrap();
    let t = LayerFeatureSet::new(vec![base]).unwrap();
    let s = LayerFeatureSet::new(vec![scaled]).unwrap();
    let loss = gkd_loss(&t, &s, false, None).unwrap();
    assert!(loss <= 1e-28, "cosine graphs should match, loss = {loss}");

    // And a genuinely different geometry gives a strictly positive loss.
    let other = LayerFeatureSet::new(vec![FeatureMatrix::from_rows(&[
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-1.0, 0.0],
    ])
    .unwrap()])
    .unwrap();
    assert!(gkd_loss(&t, &other, false, None).unwrap() > 1e-3);
}
