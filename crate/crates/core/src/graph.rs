//! Sparse symmetric similarity graphs and their matrix forms.
//!
//! A [`SparseGraph`] stores each undirected edge exactly once as
//! `(i, j, w)` with `i < j` and `w > 0`. The adjacency it represents is
//! symmetric with a zero diagonal. Dense Laplacians are built on demand;
//! the `*_apply` methods run the corresponding operator against a signal
//! in `O(|E|)` without materializing a matrix, which is what the
//! polynomial filters and diffusions use.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// One undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Symmetric nonnegative weighted adjacency over `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    edges: Vec<Edge>,
}

/// How pairwise similarities are computed from feature rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Similarity {
    /// Cosine similarity, clamped into `[0, 1]` (negative similarities
    /// are treated as no relation; zero rows have similarity 0).
    Cosine,
    /// `exp(-alpha * dist)` with the chosen distance metric.
    Rbf { alpha: f64, metric: Metric },
}

/// Distance metric for RBF weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// `1 - cosine_similarity`, in `[0, 2]`.
    CosineDistance,
}

/// How a directed per-vertex top-k selection is folded back into an
/// undirected graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetrizeMode {
    /// Keep an edge if either endpoint selected it, with its weight once.
    Union,
    /// `A + A^T` on the selection matrix: mutually selected edges get
    /// twice the weight, one-sided selections keep it once.
    AddTranspose,
}

/// Parameters of the three-source adjacency used for localization
/// graphs: GPS proximity, frame adjacency and gated feature similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct VblParams {
    gamma: f64,
    dist_max: f64,
    betas: Vec<f64>,
    alpha_sim: f64,
}

impl VblParams {
    /// `gamma` is the decay rate of the GPS term (1/meters), `dist_max`
    /// the cutoff distance in meters, `betas[k-1]` the weight of frame
    /// gaps of exactly `k`, and `alpha_sim` the scale of the gated
    /// cosine term.
    pub fn new(gamma: f64, dist_max: f64, betas: Vec<f64>, alpha_sim: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::parameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !(dist_max.is_finite() && dist_max > 0.0) {
            return Err(Error::parameter(format!(
                "dist_max must be > 0, got {dist_max}"
            )));
        }
        if !(alpha_sim.is_finite() && alpha_sim >= 0.0) {
            return Err(Error::parameter(format!(
                "alpha_sim must be >= 0, got {alpha_sim}"
            )));
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::parameter("betas must all be finite and >= 0"));
        }
        Ok(Self {
            gamma,
            dist_max,
            betas,
            alpha_sim,
        })
    }

    pub fn k_max(&self) -> usize {
        self.betas.len()
    }
}

impl SparseGraph {
    /// Builds a graph from undirected edges. Endpoint order inside each
    /// tuple is irrelevant; duplicate pairs have their weights summed;
    /// zero-weight edges are dropped (they are indistinguishable from
    /// absent edges).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("graph must have at least one vertex"));
        }
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::input(format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            let key = (a.min(b), a.max(b));
            *acc.entry(key).or_insert(0.0) += w;
        }
        let edges = acc
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|((i, j), weight)| Edge { i, j, weight })
            .collect();
        Ok(Self { n, edges })
    }

    /// A graph with `n` vertices and no edges.
    pub fn edgeless(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges sorted by `(i, j)`, each undirected edge once.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex strengths `d_i = sum_j A_ij`; zero for isolated vertices.
    pub fn degrees(&self) -> Array1<f64> {
        let mut deg = Array1::zeros(self.n);
        // Edges are sorted by (i, j), so each vertex accumulates its
        // incident weights in ascending neighbor order; the Laplacian
        // diagonal reuses the same fold.
        for e in &self.edges {
            deg[e.i] += e.weight;
            deg[e.j] += e.weight;
        }
        deg
    }

    /// Dense symmetric adjacency with zero diagonal.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            a[[e.i, e.j]] = e.weight;
            a[[e.j, e.i]] = e.weight;
        }
        a
    }

    /// Combinatorial Laplacian `L = D - A`.
    pub fn combinatorial_laplacian(&self) -> Array2<f64> {
        let deg = self.degrees();
        let mut l = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            l[[e.i, e.j]] = -e.weight;
            l[[e.j, e.i]] = -e.weight;
        }
        for i in 0..self.n {
            l[[i, i]] = deg[i];
        }
        l
    }

    /// Symmetric normalized Laplacian `D^{-1/2} L D^{-1/2}`.
    ///
    /// Zero-degree vertices use the convention `(D^{-1/2})_ii = 0`, so
    /// their row and column are identically zero.
    pub fn normalized_laplacian(&self) -> Array2<f64> {
        let dinv = self.degree_inv_sqrt();
        let deg = self.degrees();
        let mut l = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            let v = -e.weight * dinv[e.i] * dinv[e.j];
            l[[e.i, e.j]] = v;
            l[[e.j, e.i]] = v;
        }
        for i in 0..self.n {
            // d_i * d_i^{-1/2} * d_i^{-1/2}; exactly 0 for isolated vertices.
            l[[i, i]] = deg[i] * dinv[i] * dinv[i];
        }
        l
    }

    /// Symmetric normalized adjacency `E = D^{-1/2} A D^{-1/2}`, with the
    /// same zero-degree convention. Spectral radius is at most 1.
    pub fn normalized_adjacency(&self) -> Array2<f64> {
        let dinv = self.degree_inv_sqrt();
        let mut a = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            let v = e.weight * dinv[e.i] * dinv[e.j];
            a[[e.i, e.j]] = v;
            a[[e.j, e.i]] = v;
        }
        a
    }

    pub(crate) fn degree_inv_sqrt(&self) -> Array1<f64> {
        self.degrees()
            .mapv(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
    }

    /// `A . X` without materializing the dense adjacency.
    pub fn adjacency_apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros(x.raw_dim());
        for e in &self.edges {
            for c in 0..x.ncols() {
                y[[e.i, c]] += e.weight * x[[e.j, c]];
                y[[e.j, c]] += e.weight * x[[e.i, c]];
            }
        }
        y
    }

    /// `L . X` for the combinatorial Laplacian.
    pub fn laplacian_apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros(x.raw_dim());
        for e in &self.edges {
            for c in 0..x.ncols() {
                let diff = x[[e.i, c]] - x[[e.j, c]];
                y[[e.i, c]] += e.weight * diff;
                y[[e.j, c]] -= e.weight * diff;
            }
        }
        y
    }

    /// `L_norm . X` for the symmetric normalized Laplacian.
    pub fn normalized_laplacian_apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let dinv = self.degree_inv_sqrt();
        let u = scale_rows(x, &dinv);
        let v = self.laplacian_apply(&u);
        scale_rows(&v, &dinv)
    }

    /// `E . X` for the symmetric normalized adjacency.
    pub fn normalized_adjacency_apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let dinv = self.degree_inv_sqrt();
        let u = scale_rows(x, &dinv);
        let v = self.adjacency_apply(&u);
        scale_rows(&v, &dinv)
    }
}

fn scale_rows(x: &Array2<f64>, s: &Array1<f64>) -> Array2<f64> {
    let mut y = x.clone();
    for (mut row, &f) in y.rows_mut().into_iter().zip(s.iter()) {
        row.mapv_inplace(|v| v * f);
    }
    y
}

/// Cosine similarity of two rows; 0 if either has zero norm.
///
/// The raw value (possibly negative) is returned; graph builders clamp
/// it into `[0, 1]` before using it as a weight.
pub fn cosine_similarity(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    let dot = a.dot(&b);
    let na = a.dot(&a);
    let nb = b.dot(&b);
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).min(1.0)
}

fn pair_similarity(features: &FeatureMatrix, kind: Similarity, i: usize, j: usize) -> f64 {
    match kind {
        Similarity::Cosine => cosine_similarity(features.row(i), features.row(j)).max(0.0),
        Similarity::Rbf { alpha, metric } => {
            let dist = match metric {
                Metric::Euclidean => {
                    let diff = &features.row(i) - &features.row(j);
                    diff.dot(&diff).sqrt()
                }
                Metric::CosineDistance => {
                    1.0 - cosine_similarity(features.row(i), features.row(j))
                }
            };
            (-alpha * dist).exp()
        }
    }
}

fn validate_similarity(kind: Similarity) -> Result<()> {
    if let Similarity::Rbf { alpha, .. } = kind {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::parameter(format!(
                "rbf alpha must be finite and > 0, got {alpha}"
            )));
        }
    }
    Ok(())
}

/// Full pairwise similarity matrix (zero diagonal).
pub fn similarity_matrix(features: &FeatureMatrix, kind: Similarity) -> Result<Array2<f64>> {
    validate_similarity(kind)?;
    let n = features.n();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = pair_similarity(features, kind, i, j);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    Ok(s)
}

/// Builds the k-nearest-neighbor similarity graph.
///
/// Every vertex contributes its `k` most similar other vertices
/// (candidates tied with the k-th ranked similarity are all kept, which
/// makes the selection a pure function of the values) and the union of
/// those selections becomes the edge set, each edge weighted by the
/// pairwise similarity. Zero-similarity selections contribute no edge.
pub fn knn_graph(features: &FeatureMatrix, k: usize, kind: Similarity) -> Result<SparseGraph> {
    let sim = similarity_matrix(features, kind)?;
    let selections = top_k_selections(&sim, k)?;
    let mut edges = Vec::new();
    for (i, selected) in selections.iter().enumerate() {
        for &j in selected {
            if i < j || !selections[j].contains(&i) {
                edges.push((i, j, sim[[i, j]]));
            }
        }
    }
    SparseGraph::new(features.n(), edges)
}

/// Per-vertex top-k retention on an existing graph, then symmetrization.
pub fn threshold_topk(graph: &SparseGraph, k: usize, mode: SymmetrizeMode) -> Result<SparseGraph> {
    if k == 0 {
        return Err(Error::parameter("top-k threshold requires k >= 1"));
    }
    // Incident lists in ascending neighbor order.
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); graph.n()];
    for e in graph.edges() {
        incident[e.i].push((e.j, e.weight));
        incident[e.j].push((e.i, e.weight));
    }
    let mut edges = Vec::new();
    let mut selected: Vec<Vec<usize>> = vec![Vec::new(); graph.n()];
    for (i, list) in incident.iter_mut().enumerate() {
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut picks: Vec<(usize, f64)> = list.clone();
        truncate_keeping_ties(&mut picks, k, |&(_, w)| w);
        selected[i] = picks.into_iter().map(|(j, _)| j).collect();
    }
    for (i, picks) in selected.iter().enumerate() {
        for &j in picks {
            let w = incident[i]
                .iter()
                .find(|&&(v, _)| v == j)
                .map(|&(_, w)| w)
                .unwrap_or(0.0);
            match mode {
                SymmetrizeMode::Union => {
                    if i < j || !selected[j].contains(&i) {
                        edges.push((i, j, w));
                    }
                }
                SymmetrizeMode::AddTranspose => edges.push((i, j, w)),
            }
        }
    }
    SparseGraph::new(graph.n(), edges)
}

/// Composite localization adjacency from GPS positions, frame indices
/// and feature similarities:
///
/// `A_ij = [dist < dist_max] e^{-gamma dist}
///        + sum_k betas[k-1] [|frame_i - frame_j| = k]
///        + alpha_sim * cos(i, j) * [either of the first two terms > 0]`
pub fn vbl_adjacency(
    gps: &Array2<f64>,
    frame_index: &[u64],
    features: &FeatureMatrix,
    params: &VblParams,
) -> Result<SparseGraph> {
    let n = features.n();
    if gps.nrows() != n || frame_index.len() != n {
        return Err(Error::input(format!(
            "mismatched lengths: {} gps rows, {} frame indices, {} feature rows",
            gps.nrows(),
            frame_index.len(),
            n
        )));
    }
    if gps.ncols() != 2 {
        return Err(Error::input(format!(
            "gps matrix must have 2 columns, got {}",
            gps.ncols()
        )));
    }
    if gps.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("gps coordinates must be finite"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = gps[[i, 0]] - gps[[j, 0]];
            let dy = gps[[i, 1]] - gps[[j, 1]];
            let dist = (dx * dx + dy * dy).sqrt();
            let a_dist = if dist < params.dist_max {
                (-params.gamma * dist).exp()
            } else {
                0.0
            };
            let gap = frame_index[i].abs_diff(frame_index[j]);
            let a_seq = if gap >= 1 && gap as usize <= params.betas.len() {
                params.betas[gap as usize - 1]
            } else {
                0.0
            };
            let a_sim = if a_dist > 0.0 || a_seq > 0.0 {
                params.alpha_sim * cosine_similarity(features.row(i), features.row(j)).max(0.0)
            } else {
                0.0
            };
            let w = a_dist + a_seq + a_sim;
            if w > 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    SparseGraph::new(n, edges)
}

/// Ranks each row's off-diagonal entries by value (descending, ties by
/// ascending column) and returns the top `k` columns per row. Candidates
/// tied with the k-th ranked value are all kept, so the selection is a
/// pure function of the similarity values.
fn top_k_selections(sim: &Array2<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = sim.nrows();
    if k == 0 {
        return Err(Error::parameter("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::parameter(format!(
            "k = {k} must be smaller than the number of samples n = {n}"
        )));
    }
    let mut selections = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| sim[[i, b]].total_cmp(&sim[[i, a]]).then(a.cmp(&b)));
        truncate_keeping_ties(&mut order, k, |&j| sim[[i, j]]);
        selections.push(order);
    }
    Ok(selections)
}

/// Truncates a descending-ranked list to `k` entries, extending past `k`
/// while values tie with the k-th one.
fn truncate_keeping_ties<T>(order: &mut Vec<T>, k: usize, value: impl Fn(&T) -> f64) {
    if order.len() <= k {
        return;
    }
    let kth = value(&order[k - 1]);
    let mut cut = k;
    while cut < order.len() && value(&order[cut]) == kth {
        cut += 1;
    }
    order.truncate(cut);
}
