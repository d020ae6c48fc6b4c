//! Semi-supervised machinery: feature diffusion over a similarity graph
//! for few-label tasks, closed-form/iterative label propagation with
//! pseudo-labels, certainty weights, class-balance weights, and the
//! weighted loss combiner they feed.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::{knn_graph, Similarity, SparseGraph};
use crate::spectral::{estimate_normalized_adjacency_radius, sgc_diffuse};

/// A partially labeled sample set: `labeled` holds `(index, class)`
/// pairs, every other index in `[0, n)` is unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabels {
    n: usize,
    labeled: Vec<(usize, usize)>,
    num_classes: usize,
}

impl PartialLabels {
    pub fn new(
        n: usize,
        labeled: impl IntoIterator<Item = (usize, usize)>,
        num_classes: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("sample count must be at least 1"));
        }
        if num_classes == 0 {
            return Err(Error::input("number of classes must be at least 1"));
        }
        let mut labeled: Vec<(usize, usize)> = labeled.into_iter().collect();
        labeled.sort_unstable();
        if labeled.is_empty() {
            return Err(Error::input("at least one sample must be labeled"));
        }
        if labeled.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::input("labeled indices must be distinct"));
        }
        for &(i, y) in &labeled {
            if i >= n {
                return Err(Error::input(format!(
                    "labeled index {i} out of range for {n} samples"
                )));
            }
            if y >= num_classes {
                return Err(Error::input(format!(
                    "label {y} out of range for {num_classes} classes"
                )));
            }
        }
        Ok(Self {
            n,
            labeled,
            num_classes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// `(index, class)` pairs sorted by index.
    pub fn labeled(&self) -> &[(usize, usize)] {
        &self.labeled
    }

    pub fn num_labeled(&self) -> usize {
        self.labeled.len()
    }

    /// Ground-truth label per index, `None` for unlabeled samples.
    pub fn assignments(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n];
        for &(i, y) in &self.labeled {
            out[i] = Some(y);
        }
        out
    }

    /// The `n x c` label matrix with a one at `(i, y_i)` for labeled rows.
    pub fn label_matrix(&self) -> Array2<f64> {
        let mut y = Array2::zeros((self.n, self.num_classes));
        for &(i, c) in &self.labeled {
            y[[i, c]] = 1.0;
        }
        y
    }
}

/// How the label diffusion system is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod {
    /// Direct solve of `(I - alpha E) Z = Y`.
    ClosedForm,
    /// Fixed-point iteration `Z <- alpha E Z + Y` until the largest
    /// entry change drops below `tol`.
    Iterative { max_iter: usize, tol: f64 },
}

/// Output of [`propagate_labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelResult {
    /// Diffused label matrix `Z`, one row per sample.
    pub z: Array2<f64>,
    /// Argmax pseudo-labels; labeled rows keep their ground truth.
    pub pseudo_labels: Vec<usize>,
    /// Per-sample certainty in `[0, 1]`: one minus the normalized
    /// entropy of the sample's normalized `z` row.
    pub omega: Vec<f64>,
    /// Per-class balance weights: reciprocal of the number of samples
    /// assigned to the class (0 for empty classes).
    pub zeta: Vec<f64>,
    /// Rule used to compute `omega`, recorded for reporting.
    pub omega_rule: &'static str,
    pub warnings: Vec<String>,
}

/// Diffuses features with `(alpha I + E)^m` over a cosine k-NN graph
/// built on all rows, labeled and unlabeled alike.
pub fn transfer_sgc(
    features: &FeatureMatrix,
    labels: &PartialLabels,
    k: usize,
    alpha: f64,
    m: usize,
) -> Result<FeatureMatrix> {
    if labels.n() != features.n() {
        return Err(Error::input(format!(
            "label set covers {} samples but features have {} rows",
            labels.n(),
            features.n()
        )));
    }
    let graph = knn_graph(features, k, Similarity::Cosine)?;
    sgc_diffuse(features, &graph, alpha, m)
}

/// Spreads known labels over the graph by solving `Z = (I - alpha E)^{-1} Y`
/// and derives pseudo-labels, certainty weights and class-balance weights.
///
/// Convergence needs `alpha * rho(E) < 1`, checked against a
/// power-iteration estimate of the spectral radius.
pub fn propagate_labels(
    graph: &SparseGraph,
    labels: &PartialLabels,
    alpha: f64,
    method: PropagationMethod,
) -> Result<PseudoLabelResult> {
    if labels.n() != graph.n() {
        return Err(Error::input(format!(
            "label set covers {} samples but the graph has {} vertices",
            labels.n(),
            graph.n()
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::parameter(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    let rho = estimate_normalized_adjacency_radius(graph);
    if alpha * rho >= 1.0 {
        return Err(Error::parameter(format!(
            "alpha = {alpha} is too large: alpha * rho(E) = {:.6} must stay below 1",
            alpha * rho
        )));
    }

    let mut warnings = Vec::new();
    let mut class_has_seed = vec![false; labels.num_classes()];
    for &(_, y) in labels.labeled() {
        class_has_seed[y] = true;
    }
    for (c, has) in class_has_seed.iter().enumerate() {
        if !has {
            warnings.push(format!("class-without-labeled-sample:{c}"));
        }
    }

    let y = labels.label_matrix();
    let z = match method {
        PropagationMethod::ClosedForm => closed_form_solve(graph, alpha, &y)?,
        PropagationMethod::Iterative { max_iter, tol } => {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::parameter(format!(
                    "iteration tolerance must be > 0, got {tol}"
                )));
            }
            let mut z = y.clone();
            for _ in 0..max_iter {
                let next = &(graph.normalized_adjacency_apply(&z) * alpha) + &y;
                let delta = next
                    .iter()
                    .zip(z.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                z = next;
                if delta < tol {
                    break;
                }
            }
            z
        }
    };

    let assignments = labels.assignments();
    let mut pseudo_labels = Vec::with_capacity(labels.n());
    for (i, known) in assignments.iter().enumerate() {
        match known {
            Some(y) => pseudo_labels.push(*y),
            None => {
                let row = z.row(i);
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                pseudo_labels.push(best);
            }
        }
    }

    let mut zero_row = false;
    let omega: Vec<f64> = (0..labels.n())
        .map(|i| {
            let w = row_certainty(z.row(i), labels.num_classes());
            if w.is_none() {
                zero_row = true;
            }
            w.unwrap_or(0.0)
        })
        .collect();
    if zero_row {
        warnings.push("zero-z-row".to_string());
    }

    let mut counts = vec![0usize; labels.num_classes()];
    for &p in &pseudo_labels {
        counts[p] += 1;
    }
    let mut zeta = Vec::with_capacity(counts.len());
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            warnings.push(format!("empty-class-assignment:{c}"));
            zeta.push(0.0);
        } else {
            zeta.push(1.0 / count as f64);
        }
    }

    Ok(PseudoLabelResult {
        z,
        pseudo_labels,
        omega,
        zeta,
        omega_rule: "one-minus-normalized-entropy",
        warnings,
    })
}

/// Certainty of one `z` row: `1 - H(p) / ln(c)` where `p` is the row
/// normalized to a distribution. `None` marks rows with no positive mass.
fn row_certainty(row: ndarray::ArrayView1<'_, f64>, num_classes: usize) -> Option<f64> {
    let total: f64 = row.iter().map(|&v| v.max(0.0)).sum();
    if total <= 0.0 {
        return None;
    }
    if num_classes == 1 {
        return Some(1.0);
    }
    let mut entropy = 0.0;
    for &v in row.iter() {
        let p = v.max(0.0) / total;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    Some((1.0 - entropy / (num_classes as f64).ln()).clamp(0.0, 1.0))
}

fn closed_form_solve(graph: &SparseGraph, alpha: f64, y: &Array2<f64>) -> Result<Array2<f64>> {
    let n = graph.n();
    let e = graph.normalized_adjacency();
    let system = DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - alpha * e[[i, j]]
    });
    let rhs = DMatrix::from_fn(n, y.ncols(), |i, j| y[[i, j]]);
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("label diffusion system is singular".into()))?;
    Ok(Array2::from_shape_fn((n, y.ncols()), |(i, j)| {
        solution[(i, j)]
    }))
}

/// Weighted loss `sum_labeled zeta_{y_i} l_i + sum_unlabeled omega_i zeta_{y^_i} l_i`.
pub fn weighted_loss_combine(
    per_sample_losses: &[f64],
    labels: &PartialLabels,
    pseudo: &PseudoLabelResult,
) -> Result<f64> {
    if per_sample_losses.len() != labels.n() {
        return Err(Error::input(format!(
            "{} losses for {} samples",
            per_sample_losses.len(),
            labels.n()
        )));
    }
    if pseudo.pseudo_labels.len() != labels.n() || pseudo.omega.len() != labels.n() {
        return Err(Error::input(
            "pseudo-label result does not cover the sample set",
        ));
    }
    if per_sample_losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::input("per-sample losses must be finite"));
    }
    let assignments = labels.assignments();
    let mut total = 0.0;
    for (i, &loss) in per_sample_losses.iter().enumerate() {
        match assignments[i] {
            Some(y) => total += pseudo.zeta[y] * loss,
            None => total += pseudo.omega[i] * pseudo.zeta[pseudo.pseudo_labels[i]] * loss,
        }
    }
    Ok(total)
}
