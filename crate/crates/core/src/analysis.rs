//! Smoothness-based diagnostics over latent geometry graphs.
//!
//! Smoothness here is always the Laplacian quadratic form `s^T L s`,
//! which for a graph stored with each undirected edge once equals
//! `sum_{(i,j) in E} w_ij (s_i - s_j)^2`. For binary class indicators it
//! reduces to the weight of the boundary between a class and the rest,
//! which is what the label-smoothness report and the layer-gap
//! regularizer build on.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::features::LabelVector;
use crate::graph::SparseGraph;
use crate::spectral::{estimate_lambda_max, eigendecompose, GraphSignal, ResponseShape};

/// Per-class label smoothness with the balanced normalization
/// `total_raw / (M^2 C (C-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    /// `s_c^T L s_c` for each class indicator.
    pub per_class: Vec<f64>,
    /// Sum of the per-class values; twice the total inter-class edge weight.
    pub total_raw: f64,
    /// `total_raw / (M^2 C (C-1))`; defined as 0 when `C = 1`.
    pub normalized: f64,
    /// `M`, the per-class sample count used in the normalization.
    pub samples_per_class: usize,
    /// `C`, the number of classes.
    pub num_classes: usize,
    /// Set when the classes are not balanced and `M` was rounded from `n/C`.
    pub unbalanced: bool,
}

/// Per-vertex influence amplitudes from a high-pass filtered signal.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceScores {
    pub scores: Array1<f64>,
    /// Human-readable description of the high-pass that was applied.
    pub filter_used: String,
}

/// High-pass choices for [`margin_influence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HighPass {
    /// Apply the symmetric normalized Laplacian (no eigendecomposition).
    LaplacianNormalized,
    /// Exact spectral filter with response `1 - simoncelli_tau(lambda)`.
    SpectralComplement { tau: f64 },
}

/// Smoothness `s^T L s` of a single-channel signal.
pub fn smoothness(graph: &SparseGraph, signal: &GraphSignal) -> Result<f64> {
    if signal.channels() != 1 {
        return Err(Error::input(format!(
            "smoothness expects a single-channel signal, got {} channels",
            signal.channels()
        )));
    }
    if signal.n() != graph.n() {
        return Err(Error::input(format!(
            "signal has {} vertices but the graph has {}",
            signal.n(),
            graph.n()
        )));
    }
    Ok(edge_sum_smoothness(graph, &signal.column(0).to_owned()))
}

/// Sum of per-channel smoothness values of a multi-channel signal.
pub fn smoothness_sum(graph: &SparseGraph, signal: &GraphSignal) -> Result<f64> {
    if signal.n() != graph.n() {
        return Err(Error::input(format!(
            "signal has {} vertices but the graph has {}",
            signal.n(),
            graph.n()
        )));
    }
    let mut total = 0.0;
    for c in 0..signal.channels() {
        total += edge_sum_smoothness(graph, &signal.column(c).to_owned());
    }
    Ok(total)
}

fn edge_sum_smoothness(graph: &SparseGraph, s: &Array1<f64>) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let d = s[e.i] - s[e.j];
            e.weight * d * d
        })
        .sum()
}

/// Per-class boundary weight `s_c^T L s_c`; exact (no cancellation) since
/// indicator differences are 0 or 1.
fn class_smoothness(graph: &SparseGraph, labels: &LabelVector) -> Vec<f64> {
    let mut per_class = vec![0.0; labels.num_classes()];
    let l = labels.labels();
    for e in graph.edges() {
        if l[e.i] != l[e.j] {
            per_class[l[e.i]] += e.weight;
            per_class[l[e.j]] += e.weight;
        }
    }
    per_class
}

/// Label smoothness of a fully labeled graph.
///
/// Requires every class to be present. Balanced classes give
/// `M = n / C`; unbalanced label sets round `n / C` and set the
/// `unbalanced` flag.
pub fn label_smoothness(graph: &SparseGraph, labels: &LabelVector) -> Result<SmoothnessReport> {
    if labels.len() != graph.n() {
        return Err(Error::input(format!(
            "{} labels for a graph with {} vertices",
            labels.len(),
            graph.n()
        )));
    }
    let counts = labels.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::input(format!(
            "class {missing} has no samples; every class must be present"
        )));
    }
    let c = labels.num_classes();
    let n = labels.len();
    let balanced = counts.iter().all(|&k| k == counts[0]);
    let m = if balanced {
        counts[0]
    } else {
        (n as f64 / c as f64).round().max(1.0) as usize
    };
    let per_class = class_smoothness(graph, labels);
    let total_raw: f64 = per_class.iter().sum();
    let normalized = if c > 1 {
        total_raw / ((m * m * c * (c - 1)) as f64)
    } else {
        0.0
    };
    Ok(SmoothnessReport {
        per_class,
        total_raw,
        normalized,
        samples_per_class: m,
        num_classes: c,
        unbalanced: !balanced,
    })
}

/// Total absolute change in per-class smoothness between two graphs over
/// the same vertex set: `sum_c |sigma_after(s_c) - sigma_before(s_c)|`.
pub fn smoothness_gap(
    graph_before: &SparseGraph,
    graph_after: &SparseGraph,
    labels: &LabelVector,
) -> Result<f64> {
    if graph_before.n() != graph_after.n() {
        return Err(Error::input(format!(
            "graphs have different vertex counts: {} vs {}",
            graph_before.n(),
            graph_after.n()
        )));
    }
    if labels.len() != graph_before.n() {
        return Err(Error::input(format!(
            "{} labels for graphs with {} vertices",
            labels.len(),
            graph_before.n()
        )));
    }
    let before = class_smoothness(graph_before, labels);
    let after = class_smoothness(graph_after, labels);
    Ok(before
        .iter()
        .zip(after.iter())
        .map(|(b, a)| (a - b).abs())
        .sum())
}

/// Influence scores: amplitude of a high-pass filtered signal per vertex.
pub fn margin_influence(
    graph: &SparseGraph,
    signal: &GraphSignal,
    highpass: HighPass,
) -> Result<InfluenceScores> {
    if signal.channels() != 1 {
        return Err(Error::input(format!(
            "influence expects a single-channel signal, got {} channels",
            signal.channels()
        )));
    }
    if signal.n() != graph.n() {
        return Err(Error::input(format!(
            "signal has {} vertices but the graph has {}",
            signal.n(),
            graph.n()
        )));
    }
    let (filtered, description) = match highpass {
        HighPass::LaplacianNormalized => (
            graph.normalized_laplacian_apply(signal.values()),
            "normalized-laplacian".to_string(),
        ),
        HighPass::SpectralComplement { tau } => {
            let shape = ResponseShape::Simoncelli { tau };
            shape.validate()?;
            let lambda_max = estimate_lambda_max(graph);
            let spectrum = eigendecompose(&graph.combinatorial_laplacian())?;
            let mut coeffs = spectrum.eigenvectors().t().dot(signal.values());
            for (mut row, &l) in coeffs.rows_mut().into_iter().zip(spectrum.eigenvalues()) {
                let gain = 1.0 - shape.evaluate(l, lambda_max);
                row.mapv_inplace(|v| v * gain);
            }
            (
                spectrum.eigenvectors().dot(&coeffs),
                format!("spectral-complement(tau={tau})"),
            )
        }
    };
    let scores = Array1::from_iter(filtered.column(0).iter().map(|v| v.abs()));
    Ok(InfluenceScores {
        scores,
        filter_used: description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn signal(v: Vec<f64>) -> GraphSignal {
        GraphSignal::from_vector(Array1::from_vec(v)).unwrap()
    }

    #[test]
    fn constant_signal_is_perfectly_smooth() {
        let g = SparseGraph::new(3, [(0, 1, 0.7), (1, 2, 0.3)]).unwrap();
        assert_eq!(smoothness(&g, &signal(vec![2.5, 2.5, 2.5])).unwrap(), 0.0);
    }

    #[test]
    fn unit_edge_indicator_quadratic_form() {
        let g = SparseGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_abs_diff_eq!(
            smoothness(&g, &signal(vec![1.0, 0.0])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn path_spike_counts_both_edges() {
        let g = SparseGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_abs_diff_eq!(
            smoothness(&g, &signal(vec![0.0, 1.0, 0.0])).unwrap(),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn smoothness_rejects_mismatch() {
        let g = SparseGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            smoothness(&g, &signal(vec![1.0, 0.0, 0.0])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn disjoint_cliques_have_zero_label_smoothness() {
        let g = SparseGraph::new(
            4,
            [(0, 1, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        let labels = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let report = label_smoothness(&g, &labels).unwrap();
        assert_eq!(report.total_raw, 0.0);
        assert_eq!(report.normalized, 0.0);
        assert!(!report.unbalanced);
    }

    #[test]
    fn single_inter_class_edge_counts_once_per_class() {
        // Brute-force oracle: s_c^T L s_c = 1 for each of the two
        // indicator signals, so total_raw = 2 and the normalization
        // denominator is M^2 C (C-1) = 8.
        let g = SparseGraph::new(4, [(0, 2, 1.0)]).unwrap();
        let labels = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let report = label_smoothness(&g, &labels).unwrap();
        assert_eq!(report.per_class, vec![1.0, 1.0]);
        assert_abs_diff_eq!(report.total_raw, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.normalized, 2.0 / 8.0, epsilon = 1e-15);
        assert_eq!(report.samples_per_class, 2);
    }

    #[test]
    fn two_vertex_complete_graph_per_class() {
        let g = SparseGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let labels = LabelVector::new(vec![0, 1], 2).unwrap();
        let report = label_smoothness(&g, &labels).unwrap();
        assert_eq!(report.per_class, vec![1.0, 1.0]);
        assert_abs_diff_eq!(report.normalized, 2.0 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn label_smoothness_requires_all_classes() {
        let g = SparseGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let labels = LabelVector::new(vec![0, 0], 2).unwrap();
        assert!(matches!(
            label_smoothness(&g, &labels),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn unbalanced_labels_round_m() {
        let g = SparseGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let labels = LabelVector::new(vec![0, 0, 1], 2).unwrap();
        let report = label_smoothness(&g, &labels).unwrap();
        assert!(report.unbalanced);
        // round(3 / 2) = 2
        assert_eq!(report.samples_per_class, 2);
    }

    #[test]
    fn gap_is_zero_for_identical_graphs() {
        let g = SparseGraph::new(3, [(0, 1, 0.4), (1, 2, 0.6)]).unwrap();
        let labels = LabelVector::new(vec![0, 1, 0], 2).unwrap();
        assert_eq!(smoothness_gap(&g, &g, &labels).unwrap(), 0.0);
    }

    #[test]
    fn doubling_weights_doubles_smoothness() {
        let g = SparseGraph::new(3, [(0, 1, 0.4), (1, 2, 0.6)]).unwrap();
        let doubled = SparseGraph::new(3, [(0, 1, 0.8), (1, 2, 1.2)]).unwrap();
        let labels = LabelVector::new(vec![0, 1, 0], 2).unwrap();
        let before = label_smoothness(&g, &labels).unwrap().total_raw;
        let gap = smoothness_gap(&g, &doubled, &labels).unwrap();
        assert_abs_diff_eq!(gap, before, epsilon = 1e-12);
    }

    #[test]
    fn dropping_all_edges_gaps_by_total() {
        let g = SparseGraph::new(4, [(0, 2, 1.0)]).unwrap();
        let labels = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let before = label_smoothness(&g, &labels).unwrap().total_raw;
        let gap = smoothness_gap(&g, &SparseGraph::edgeless(4), &labels).unwrap();
        assert_abs_diff_eq!(gap, before, epsilon = 1e-15);
    }

    #[test]
    fn gap_rejects_vertex_count_mismatch() {
        let a = SparseGraph::edgeless(3);
        let b = SparseGraph::edgeless(4);
        let labels = LabelVector::new(vec![0, 1, 0], 2).unwrap();
        assert!(matches!(
            smoothness_gap(&a, &b, &labels),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn constant_signal_has_no_influence_on_regular_graph() {
        let g = SparseGraph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let scores = margin_influence(
            &g,
            &signal(vec![1.0, 1.0, 1.0]),
            HighPass::LaplacianNormalized,
        )
        .unwrap();
        for &s in scores.scores.iter() {
            assert!(s <= 1e-10);
        }
    }

    #[test]
    fn bridge_endpoints_dominate_influence() {
        // Two 4-cliques joined by a single edge (3, 4); the signal is the
        // indicator of the first clique.
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((i, j, 1.0));
                edges.push((i + 4, j + 4, 1.0));
            }
        }
        edges.push((3, 4, 1.0));
        let g = SparseGraph::new(8, edges).unwrap();
        let s = signal(vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);

        // Dense oracle for the filtered amplitudes.
        let dense = g.normalized_laplacian().dot(&s.values().column(0).to_owned());
        let scores = margin_influence(&g, &s, HighPass::LaplacianNormalized).unwrap();
        for (a, b) in scores.scores.iter().zip(dense.iter()) {
            assert_abs_diff_eq!(a, &b.abs(), epsilon = 1e-12);
        }

        let mut order: Vec<usize> = (0..8).collect();
        order.sort_by(|&a, &b| scores.scores[b].total_cmp(&scores.scores[a]));
        let top2 = [order[0].min(order[1]), order[0].max(order[1])];
        assert_eq!(top2, [3, 4]);
        assert!(scores.scores[order[1]] > scores.scores[order[2]]);
    }

    #[test]
    fn zero_signal_zero_scores() {
        let g = SparseGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let scores =
            margin_influence(&g, &signal(vec![0.0, 0.0]), HighPass::LaplacianNormalized).unwrap();
        assert_eq!(scores.scores, array![0.0, 0.0]);
    }

    #[test]
    fn influence_scales_homogeneously() {
        let g = SparseGraph::new(4, [(0, 1, 0.3), (1, 2, 0.9), (2, 3, 0.5)]).unwrap();
        let base = signal(vec![0.2, -1.0, 0.7, 0.1]);
        // Power-of-two scale keeps floating point exact.
        let scaled = signal(vec![0.8, -4.0, 2.8, 0.4]);
        for hp in [
            HighPass::LaplacianNormalized,
            HighPass::SpectralComplement { tau: 0.5 },
        ] {
            let a = margin_influence(&g, &base, hp).unwrap();
            let b = margin_influence(&g, &scaled, hp).unwrap();
            for (x, y) in a.scores.iter().zip(b.scores.iter()) {
                assert_eq!(*y, 4.0 * *x);
            }
        }
    }
}
