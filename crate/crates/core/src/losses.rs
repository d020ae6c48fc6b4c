//! Batch-level graph losses and regularizers.
//!
//! Everything here is a pure forward evaluation over feature batches:
//! the smoothness loss over a top-k RBF graph, knowledge distillation
//! between per-layer similarity graphs, the affinity mass loss, the
//! layer-to-layer smoothness-gap regularizer, and the peer
//! regularization forward pass. Gradients belong to the caller.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};

use crate::analysis::smoothness_gap;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, LabelVector};
use crate::graph::{
    cosine_similarity, similarity_matrix, threshold_topk, Metric, Similarity, SparseGraph,
    SymmetrizeMode,
};

/// Intermediate representations of one batch after several layers; all
/// layers share the batch size, dimensions may differ.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerFeatureSet {
    layers: Vec<FeatureMatrix>,
}

impl LayerFeatureSet {
    pub fn new(layers: Vec<FeatureMatrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::input("layer set must contain at least one layer"));
        }
        let b = layers[0].n();
        if layers.iter().any(|l| l.n() != b) {
            return Err(Error::input("all layers must share the batch size"));
        }
        Ok(Self { layers })
    }

    pub fn batch_size(&self) -> usize {
        self.layers[0].n()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[FeatureMatrix] {
        &self.layers
    }
}

/// The set `S` of ordered pairs whose affinity should be maximized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinityTarget {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl AffinityTarget {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        for &(i, j) in &pairs {
            if i == j {
                return Err(Error::input(format!("pair ({i}, {j}) is a self-pair")));
            }
            if i >= n || j >= n {
                return Err(Error::input(format!(
                    "pair ({i}, {j}) out of range for batch size {n}"
                )));
            }
        }
        Ok(Self { n, pairs })
    }

    /// All pairs of same-class samples, the usual classification target.
    pub fn same_class(labels: &LabelVector) -> Self {
        let n = labels.len();
        let l = labels.labels();
        let mut pairs = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && l[i] == l[j] {
                    pairs.insert((i, j));
                }
            }
        }
        Self { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }
}

/// Similarity used by the affinity loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffinitySimilarity {
    /// Dot product scaled by `1/sqrt(d)`.
    ScaledDot,
    /// Cosine similarity.
    Cosine,
}

/// Result of [`affinity_loss`]: the loss `1 - mass/n` and the captured
/// mass `sum_{(i,j) in S} softmax(A)_{ij}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityOutcome {
    pub loss: f64,
    pub mass: f64,
}

/// A bank of peer feature maps plus the attention parameters of the
/// scoring function `a(v) = w^T v + bias` on concatenated pixel pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerBank {
    peers: Vec<Array2<f64>>,
    attention_weights: Array1<f64>,
    attention_bias: f64,
    leaky_slope: f64,
}

impl PeerBank {
    pub fn new(
        peers: Vec<Array2<f64>>,
        attention_weights: Array1<f64>,
        attention_bias: f64,
        leaky_slope: f64,
    ) -> Result<Self> {
        if peers.is_empty() {
            return Err(Error::input("peer bank must contain at least one map"));
        }
        let (p, d) = (peers[0].nrows(), peers[0].ncols());
        if p == 0 || d == 0 {
            return Err(Error::input("peer maps must be non-empty"));
        }
        for map in &peers {
            if map.nrows() != p || map.ncols() != d {
                return Err(Error::input(format!(
                    "all peer maps must be {p}x{d}, found {}x{}",
                    map.nrows(),
                    map.ncols()
                )));
            }
            if map.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("peer maps must be finite"));
            }
        }
        if attention_weights.len() != 2 * d {
            return Err(Error::input(format!(
                "attention weights must have length 2d = {}, got {}",
                2 * d,
                attention_weights.len()
            )));
        }
        if attention_weights.iter().any(|v| !v.is_finite()) || !attention_bias.is_finite() {
            return Err(Error::input("attention parameters must be finite"));
        }
        if !leaky_slope.is_finite() {
            return Err(Error::input("leaky slope must be finite"));
        }
        Ok(Self {
            peers,
            attention_weights,
            attention_bias,
            leaky_slope,
        })
    }

    pub fn num_peers(&self) -> usize {
        self.peers.len()
    }

    pub fn pixels_per_peer(&self) -> usize {
        self.peers[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.peers[0].ncols()
    }
}

/// Smoothness loss over a top-k RBF similarity graph built from the
/// batch outputs: `sum_c s_c^T L s_c`, which is twice the total weight
/// of retained edges joining samples of distinct classes.
pub fn graph_smoothness_loss(
    outputs: &FeatureMatrix,
    labels: &LabelVector,
    alpha: f64,
    k: usize,
    metric: Metric,
) -> Result<f64> {
    if labels.len() != outputs.n() {
        return Err(Error::input(format!(
            "{} labels for {} outputs",
            labels.len(),
            outputs.n()
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::parameter(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    if k == 0 || k >= outputs.n() {
        return Err(Error::parameter(format!(
            "k = {k} must satisfy 1 <= k < n = {}",
            outputs.n()
        )));
    }
    let sim = similarity_matrix(outputs, Similarity::Rbf { alpha, metric })?;
    let n = outputs.n();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, sim[[i, j]]));
        }
    }
    let complete = SparseGraph::new(n, edges)?;
    let graph = threshold_topk(&complete, k, SymmetrizeMode::Union)?;
    let l = labels.labels();
    let boundary: f64 = graph
        .edges()
        .iter()
        .filter(|e| l[e.i] != l[e.j])
        .map(|e| e.weight)
        .sum();
    Ok(2.0 * boundary)
}

/// Normalized cosine similarity graph of one batch, as a dense matrix
/// `D^{-1/2} A D^{-1/2}` with zero diagonal.
fn normalized_batch_adjacency(features: &FeatureMatrix) -> Result<Array2<f64>> {
    let n = features.n();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = cosine_similarity(features.row(i), features.row(j)).max(0.0);
            if w > 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    Ok(SparseGraph::new(n, edges)?.normalized_adjacency())
}

/// Knowledge distillation loss: per layer, the squared Frobenius
/// distance between the normalized cosine similarity graphs of teacher
/// and student batches, summed over layers.
///
/// With `task_specific`, entries joining same-class samples are removed
/// from both normalized matrices before differencing.
pub fn gkd_loss(
    teacher: &LayerFeatureSet,
    student: &LayerFeatureSet,
    task_specific: bool,
    labels: Option<&LabelVector>,
) -> Result<f64> {
    if teacher.num_layers() != student.num_layers() {
        return Err(Error::input(format!(
            "teacher has {} layers, student has {}",
            teacher.num_layers(),
            student.num_layers()
        )));
    }
    if teacher.batch_size() != student.batch_size() {
        return Err(Error::input(format!(
            "teacher batch size {} differs from student batch size {}",
            teacher.batch_size(),
            student.batch_size()
        )));
    }
    let mask = if task_specific {
        let labels = labels.ok_or_else(|| {
            Error::parameter("task-specific distillation requires labels")
        })?;
        if labels.len() != teacher.batch_size() {
            return Err(Error::input(format!(
                "{} labels for batch size {}",
                labels.len(),
                teacher.batch_size()
            )));
        }
        Some(labels.labels().to_vec())
    } else {
        None
    };
    let mut total = 0.0;
    for (t, s) in teacher.layers().iter().zip(student.layers()) {
        let mut at = normalized_batch_adjacency(t)?;
        let mut as_ = normalized_batch_adjacency(s)?;
        if let Some(l) = &mask {
            for i in 0..l.len() {
                for j in 0..l.len() {
                    if l[i] == l[j] {
                        at[[i, j]] = 0.0;
                        as_[[i, j]] = 0.0;
                    }
                }
            }
        }
        total += at
            .iter()
            .zip(as_.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total)
}

/// `task_loss + lambda_kd * kd_loss`.
pub fn combined_distill_loss(task_loss: f64, kd_loss: f64, lambda_kd: f64) -> f64 {
    task_loss + lambda_kd * kd_loss
}

/// Affinity loss: row-wise softmax of the pairwise affinity matrix
/// (diagonal excluded), mass captured by the target pairs, loss
/// `1 - mass / n`.
pub fn affinity_loss(
    features: &FeatureMatrix,
    target: &AffinityTarget,
    similarity: AffinitySimilarity,
) -> Result<AffinityOutcome> {
    let n = features.n();
    if target.n() != n {
        return Err(Error::input(format!(
            "target is over {} samples but the batch has {n}",
            target.n()
        )));
    }
    if n < 2 {
        return Err(Error::parameter(
            "affinity loss needs a batch of at least 2 samples",
        ));
    }
    let d = features.dim() as f64;
    let mut affinity = Array2::from_elem((n, n), f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            affinity[[i, j]] = match similarity {
                AffinitySimilarity::ScaledDot => features.row(i).dot(&features.row(j)) / d.sqrt(),
                AffinitySimilarity::Cosine => cosine_similarity(features.row(i), features.row(j)),
            };
        }
    }
    // Row-wise softmax over the off-diagonal support.
    let mut soft = Array2::zeros((n, n));
    for i in 0..n {
        let row_max = affinity
            .row(i)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for j in 0..n {
            if i != j {
                denom += (affinity[[i, j]] - row_max).exp();
            }
        }
        for j in 0..n {
            if i != j {
                soft[[i, j]] = (affinity[[i, j]] - row_max).exp() / denom;
            }
        }
    }
    let mass: f64 = target.pairs().iter().map(|&(i, j)| soft[[i, j]]).sum();
    Ok(AffinityOutcome {
        loss: 1.0 - mass / n as f64,
        mass,
    })
}

/// Total smoothness gap across consecutive layer graphs:
/// `sum_l gap(G_l, G_{l+1})`.
pub fn smoothness_gap_regularizer(
    layer_graphs: &[SparseGraph],
    labels: &LabelVector,
) -> Result<f64> {
    if layer_graphs.len() < 2 {
        return Err(Error::parameter(
            "smoothness-gap regularizer needs at least two layer graphs",
        ));
    }
    let mut total = 0.0;
    for pair in layer_graphs.windows(2) {
        total += smoothness_gap(&pair[0], &pair[1], labels)?;
    }
    Ok(total)
}

/// Peer regularization forward pass: every pixel of the input map is
/// replaced by an attention-weighted combination of its `k` most
/// cosine-similar pixels drawn from the peer maps (the input map itself
/// is never a candidate). Ties rank by (peer index, pixel index).
pub fn peer_regularize(
    input_map: &Array2<f64>,
    bank: &PeerBank,
    k: usize,
) -> Result<Array2<f64>> {
    if input_map.ncols() != bank.dim() {
        return Err(Error::input(format!(
            "input pixels have {} channels but the bank holds {}",
            input_map.ncols(),
            bank.dim()
        )));
    }
    if input_map.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("input map must be finite"));
    }
    let candidates = bank.num_peers() * bank.pixels_per_peer();
    if k == 0 || k > candidates {
        return Err(Error::parameter(format!(
            "k = {k} must satisfy 1 <= k <= {candidates} candidate pixels"
        )));
    }
    let d = bank.dim();
    let mut output = Array2::zeros(input_map.raw_dim());
    for (p, pixel) in input_map.rows().into_iter().enumerate() {
        // Rank all peer pixels by similarity, ties by (peer, pixel).
        let mut ranked: Vec<(f64, usize, usize)> = Vec::with_capacity(candidates);
        for (peer_idx, peer) in bank.peers.iter().enumerate() {
            for (q, candidate) in peer.rows().into_iter().enumerate() {
                ranked.push((cosine_similarity(pixel, candidate), peer_idx, q));
            }
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        ranked.truncate(k);

        // Attention scores a(x (+) q) = w^T [x; q] + bias. The exp/leaky
        // composition is invariant to subtracting the max score, which
        // keeps the normalization finite.
        let w_self = bank.attention_weights.slice(ndarray::s![..d]);
        let w_peer = bank.attention_weights.slice(ndarray::s![d..]);
        let base = pixel.dot(&w_self) + bank.attention_bias;
        let scores: Vec<f64> = ranked
            .iter()
            .map(|&(_, peer_idx, q)| base + bank.peers[peer_idx].row(q).dot(&w_peer))
            .collect();
        let max_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = scores
            .iter()
            .map(|s| leaky_relu((s - max_score).exp(), bank.leaky_slope))
            .collect();
        let denom: f64 = weights.iter().sum();

        let mut out_row = output.row_mut(p);
        for (&(_, peer_idx, q), &wgt) in ranked.iter().zip(weights.iter()) {
            let coeff = wgt / denom;
            out_row.scaled_add(coeff, &bank.peers[peer_idx].row(q));
        }
    }
    Ok(output)
}

fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}
