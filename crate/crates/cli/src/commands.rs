//! Command implementations. Each function reads its inputs, runs the
//! library operation, writes any output files, and returns the
//! [`RunReport`] to print on standard output.

use std::path::{Path, PathBuf};

use lgg_core::denoise::PropagationMethod;
use lgg_core::{
    affinity_loss, apply_filter, gkd_loss, graph_smoothness_loss, knn_graph, label_smoothness,
    peer_regularize, propagate_labels, similarity_matrix, smoothness_gap_regularizer,
    smoothness_sum, threshold_topk, transfer_sgc, vbl_lowpass, AffinitySimilarity, AffinityTarget,
    FeatureMatrix, FilterMethod, FilterSpec, GraphSignal, LabelVector, LayerFeatureSet, Metric,
    PeerBank, ResponseShape, Similarity, SparseGraph, SymmetrizeMode,
};
use ndarray::Array1;

use crate::bench::{few_label_benchmark, BlobsConfig};
use crate::error::{CliError, Result};
use crate::io;
use crate::report::RunReport;

fn load_features(path: &Path) -> Result<FeatureMatrix> {
    Ok(FeatureMatrix::new(io::read_matrix(path)?)?)
}

fn load_labels(path: &Path) -> Result<LabelVector> {
    let raw = io::read_label_column(path)?;
    let num_classes = raw.iter().max().map(|&m| m + 1).unwrap_or(1);
    Ok(LabelVector::new(raw, num_classes)?)
}

/// Builds the graph for `graph`/`smoothness`: k-NN under union
/// symmetrization, or per-vertex top-k of the complete similarity graph
/// with the transpose added.
fn build_similarity_graph(
    features: &FeatureMatrix,
    k: usize,
    kind: Similarity,
    symmetrize: SymmetrizeMode,
) -> Result<SparseGraph> {
    match symmetrize {
        SymmetrizeMode::Union => Ok(knn_graph(features, k, kind)?),
        SymmetrizeMode::AddTranspose => {
            let n = features.n();
            if k == 0 || k >= n {
                return Err(CliError::Parameter(format!(
                    "k = {k} must satisfy 1 <= k < n = {n}"
                )));
            }
            let sim = similarity_matrix(features, kind)?;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if sim[[i, j]] > 0.0 {
                        edges.push((i, j, sim[[i, j]]));
                    }
                }
            }
            let complete = SparseGraph::new(n, edges)?;
            Ok(threshold_topk(&complete, k, SymmetrizeMode::AddTranspose)?)
        }
    }
}

fn describe_similarity(kind: Similarity) -> String {
    match kind {
        Similarity::Cosine => "cosine".to_string(),
        Similarity::Rbf { alpha, metric } => format!(
            "rbf(alpha={alpha},metric={})",
            match metric {
                Metric::Euclidean => "euclidean",
                Metric::CosineDistance => "cosine-distance",
            }
        ),
    }
}

pub fn cmd_graph(
    features_path: &Path,
    k: usize,
    kind: Similarity,
    symmetrize: SymmetrizeMode,
    out: &Path,
) -> Result<RunReport> {
    let features = load_features(features_path)?;
    let graph = build_similarity_graph(&features, k, kind, symmetrize)?;
    io::write_edge_csv(out, &graph)?;

    let mut report = RunReport::new("graph");
    report
        .parameter("features", features_path.display())
        .parameter("k", k)
        .parameter("similarity", describe_similarity(kind))
        .parameter(
            "symmetrize",
            match symmetrize {
                SymmetrizeMode::Union => "union",
                SymmetrizeMode::AddTranspose => "add-transpose",
            },
        )
        .parameter("out", out.display())
        .metric("vertices", graph.n() as f64)
        .metric("edges", graph.edge_count() as f64)
        .metric(
            "total_weight",
            graph.edges().iter().map(|e| e.weight).sum(),
        );
    Ok(report)
}

pub fn cmd_smoothness(
    features_path: &Path,
    labels_path: &Path,
    k: usize,
    kind: Similarity,
) -> Result<RunReport> {
    let features = load_features(features_path)?;
    let labels = load_labels(labels_path)?;
    let graph = knn_graph(&features, k, kind)?;
    let smooth = label_smoothness(&graph, &labels)?;

    let mut report = RunReport::new("smoothness");
    report
        .parameter("features", features_path.display())
        .parameter("labels", labels_path.display())
        .parameter("k", k)
        .parameter("similarity", describe_similarity(kind))
        .parameter("symmetrize", "union")
        .metric("normalized", smooth.normalized)
        .metric("total_raw", smooth.total_raw)
        .metric("samples_per_class", smooth.samples_per_class as f64)
        .metric("num_classes", smooth.num_classes as f64)
        .metric("edges", graph.edge_count() as f64);
    for (c, v) in smooth.per_class.iter().enumerate() {
        report.metric(format!("per_class_{c}"), *v);
    }
    if smooth.unbalanced {
        report.warning("unbalanced-classes");
    }
    Ok(report)
}

/// Where the filtering graph comes from.
pub enum GraphSource {
    EdgeList(PathBuf),
    Features { path: PathBuf, k: usize },
}

/// Which filter `cmd_filter` applies.
pub enum FilterChoice {
    Simoncelli { tau: f64 },
    Diffusion { a: f64, m: usize },
    Table { path: PathBuf },
}

pub fn cmd_filter(
    signal_path: &Path,
    source: GraphSource,
    choice: FilterChoice,
    chebyshev_order: Option<usize>,
    out: &Path,
) -> Result<RunReport> {
    let signal = GraphSignal::new(io::read_matrix(signal_path)?)?;
    let mut report = RunReport::new("filter");
    report
        .parameter("signal", signal_path.display())
        .parameter("out", out.display());

    let graph = match &source {
        GraphSource::EdgeList(path) => {
            report.parameter("graph", path.display());
            io::read_edge_csv(path, signal.n())?
        }
        GraphSource::Features { path, k } => {
            report
                .parameter("features", path.display())
                .parameter("k", *k)
                .parameter("similarity", "cosine");
            knn_graph(&load_features(path)?, *k, Similarity::Cosine)?
        }
    };

    let before = smoothness_sum(&graph, &signal)?;
    let filtered = match &choice {
        FilterChoice::Simoncelli { tau } => {
            let method = match chebyshev_order {
                Some(order) => {
                    report.parameter("method", "chebyshev").parameter("order", order);
                    FilterMethod::Chebyshev { order }
                }
                None => {
                    report.parameter("method", "exact");
                    FilterMethod::Exact
                }
            };
            report.parameter("filter", "simoncelli").parameter("tau", tau);
            apply_filter(
                &graph,
                &FilterSpec::SpectralResponse(ResponseShape::Simoncelli { tau: *tau }),
                &signal,
                method,
            )?
        }
        FilterChoice::Diffusion { a, m } => {
            report
                .parameter("filter", "diffusion")
                .parameter("a", a)
                .parameter("m", m);
            vbl_lowpass(&graph, *a, *m, &signal)?
        }
        FilterChoice::Table { path } => {
            report
                .parameter("filter", "table")
                .parameter("table", path.display());
            let table = io::read_vector(path)?;
            let method = match chebyshev_order {
                Some(order) => {
                    report.parameter("order", order);
                    FilterMethod::Chebyshev { order }
                }
                None => FilterMethod::Exact,
            };
            apply_filter(&graph, &FilterSpec::SpectralTable(table), &signal, method)?
        }
    };
    let after = smoothness_sum(&graph, &filtered)?;
    io::write_matrix(out, filtered.values())?;

    report
        .metric("smoothness_before", before)
        .metric("smoothness_after", after)
        .metric("vertices", graph.n() as f64)
        .metric("channels", signal.channels() as f64);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_denoise(
    features_path: &Path,
    labels_path: &Path,
    k: usize,
    alpha: f64,
    m: usize,
    propagate: Option<f64>,
    iterative: bool,
    classes: Option<usize>,
    out: Option<&Path>,
    pseudo_out: Option<&Path>,
) -> Result<RunReport> {
    let features = load_features(features_path)?;
    let labels = io::read_partial_labels(labels_path, features.n(), classes)?;

    let mut report = RunReport::new("denoise");
    report
        .parameter("features", features_path.display())
        .parameter("labels", labels_path.display())
        .parameter("k", k)
        .parameter("alpha", alpha)
        .parameter("m", m)
        .metric("samples", features.n() as f64)
        .metric("labeled", labels.num_labeled() as f64)
        .metric("num_classes", labels.num_classes() as f64);

    let diffused = transfer_sgc(&features, &labels, k, alpha, m)?;
    if let Some(path) = out {
        io::write_matrix(path, diffused.values())?;
        report.parameter("out", path.display());
    }

    if let Some(prop_alpha) = propagate {
        // Per-vertex top-k of the cosine similarities over the diffused
        // features, transpose added, as the propagation support.
        let graph = build_similarity_graph(
            &diffused,
            k,
            Similarity::Cosine,
            SymmetrizeMode::AddTranspose,
        )?;
        let method = if iterative {
            PropagationMethod::Iterative {
                max_iter: 10_000,
                tol: 1e-9,
            }
        } else {
            PropagationMethod::ClosedForm
        };
        let result = propagate_labels(&graph, &labels, prop_alpha, method)?;
        report
            .parameter("propagate-alpha", prop_alpha)
            .parameter(
                "propagate-method",
                if iterative { "iterative" } else { "closed-form" },
            )
            .parameter("propagate-symmetrize", "add-transpose")
            .parameter("omega-rule", result.omega_rule)
            .metric(
                "mean_omega",
                result.omega.iter().sum::<f64>() / result.omega.len() as f64,
            );
        for w in &result.warnings {
            report.warning(w.clone());
        }
        if let Some(path) = pseudo_out {
            io::write_pseudo_csv(path, &result)?;
            report.parameter("pseudo-out", path.display());
        }
    }
    Ok(report)
}

pub fn cmd_loss_smoothness(
    outputs_path: &Path,
    labels_path: &Path,
    alpha: f64,
    k: usize,
    metric: Metric,
) -> Result<RunReport> {
    let outputs = load_features(outputs_path)?;
    let labels = load_labels(labels_path)?;
    let loss = graph_smoothness_loss(&outputs, &labels, alpha, k, metric)?;
    let mut report = RunReport::new("losses smoothness-loss");
    report
        .parameter("outputs", outputs_path.display())
        .parameter("labels", labels_path.display())
        .parameter("alpha", alpha)
        .parameter("k", k)
        .parameter(
            "metric",
            match metric {
                Metric::Euclidean => "euclidean",
                Metric::CosineDistance => "cosine-distance",
            },
        )
        .metric("loss", loss);
    Ok(report)
}

pub fn cmd_loss_gkd(
    teacher_paths: &[PathBuf],
    student_paths: &[PathBuf],
    task_specific: bool,
    labels_path: Option<&Path>,
    lambda_kd: f64,
    task_loss: f64,
) -> Result<RunReport> {
    let load_set = |paths: &[PathBuf]| -> Result<LayerFeatureSet> {
        let layers: Result<Vec<FeatureMatrix>> = paths.iter().map(|p| load_features(p)).collect();
        Ok(LayerFeatureSet::new(layers?)?)
    };
    let teacher = load_set(teacher_paths)?;
    let student = load_set(student_paths)?;
    let labels = labels_path.map(load_labels).transpose()?;
    let kd = gkd_loss(&teacher, &student, task_specific, labels.as_ref())?;
    let combined = lgg_core::combined_distill_loss(task_loss, kd, lambda_kd);

    let mut report = RunReport::new("losses gkd");
    report
        .parameter("teacher-layers", teacher_paths.len())
        .parameter("student-layers", student_paths.len())
        .parameter("task-specific", task_specific)
        .parameter("lambda-kd", lambda_kd)
        .parameter("task-loss", task_loss)
        .metric("kd_loss", kd)
        .metric("combined_loss", combined);
    if let Some(path) = labels_path {
        report.parameter("labels", path.display());
    }
    Ok(report)
}

pub fn cmd_loss_affinity(
    features_path: &Path,
    pairs_path: &Path,
    similarity: AffinitySimilarity,
) -> Result<RunReport> {
    let features = load_features(features_path)?;
    let pairs = io::read_pairs_csv(pairs_path)?;
    let target = AffinityTarget::new(features.n(), pairs)?;
    let outcome = affinity_loss(&features, &target, similarity)?;

    let mut report = RunReport::new("losses affinity");
    report
        .parameter("features", features_path.display())
        .parameter("pairs", pairs_path.display())
        .parameter(
            "similarity",
            match similarity {
                AffinitySimilarity::ScaledDot => "scaled-dot",
                AffinitySimilarity::Cosine => "cosine",
            },
        )
        .metric("loss", outcome.loss)
        .metric("mass", outcome.mass)
        .metric("num_pairs", target.pairs().len() as f64);
    Ok(report)
}

pub fn cmd_loss_reggap(graph_paths: &[PathBuf], labels_path: &Path) -> Result<RunReport> {
    let labels = load_labels(labels_path)?;
    let graphs: Result<Vec<SparseGraph>> = graph_paths
        .iter()
        .map(|p| io::read_edge_csv(p, labels.len()))
        .collect();
    let graphs = graphs?;
    let value = smoothness_gap_regularizer(&graphs, &labels)?;

    let mut report = RunReport::new("losses reg-gap");
    report
        .parameter("labels", labels_path.display())
        .parameter("layers", graph_paths.len())
        .metric("regularizer", value);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_loss_peer(
    input_path: &Path,
    peer_paths: &[PathBuf],
    attention_path: &Path,
    k: usize,
    slope: f64,
    out: Option<&Path>,
) -> Result<RunReport> {
    let input = io::read_matrix(input_path)?;
    let peers: Result<Vec<_>> = peer_paths.iter().map(|p| io::read_matrix(p)).collect();
    let peers = peers?;
    let attention = io::read_vector(attention_path)?;
    let d = input.ncols();
    if attention.len() != 2 * d + 1 {
        return Err(CliError::input(format!(
            "attention file must hold 2d+1 = {} values (weights then bias), got {}",
            2 * d + 1,
            attention.len()
        )));
    }
    let weights = Array1::from_vec(attention[..2 * d].to_vec());
    let bias = attention[2 * d];
    let bank = PeerBank::new(peers, weights, bias, slope)?;
    let output = peer_regularize(&input, &bank, k)?;

    let change = output
        .iter()
        .zip(input.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / input.len() as f64;
    if let Some(path) = out {
        io::write_matrix(path, &output)?;
    }

    let mut report = RunReport::new("losses peer");
    report
        .parameter("input", input_path.display())
        .parameter("peers", peer_paths.len())
        .parameter("attention", attention_path.display())
        .parameter("k", k)
        .parameter("slope", slope)
        .metric("mean_abs_change", change)
        .metric("pixels", input.nrows() as f64);
    if let Some(path) = out {
        report.parameter("out", path.display());
    }
    Ok(report)
}

pub fn cmd_bench_fewlabel(
    seed: u64,
    trials: usize,
    shots: usize,
    config_path: Option<&Path>,
) -> Result<RunReport> {
    let cfg: BlobsConfig = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        }
        None => BlobsConfig::default(),
    };
    let summary = few_label_benchmark(&cfg, shots, trials, seed)?;

    let mut report = RunReport::new("bench-fewlabel");
    report
        .parameter("seed", seed)
        .parameter("trials", trials)
        .parameter("shots", shots)
        .parameter("classes", cfg.classes)
        .parameter("dim", cfg.dim)
        .parameter("separation", cfg.separation)
        .parameter("unlabeled-per-class", cfg.unlabeled_per_class)
        .parameter("k", cfg.k)
        .parameter("alpha", cfg.alpha)
        .parameter("m", cfg.m)
        .metric("accuracy_raw_mean", summary.raw_mean)
        .metric("accuracy_raw_std", summary.raw_std)
        .metric("accuracy_sgc_mean", summary.sgc_mean)
        .metric("accuracy_sgc_std", summary.sgc_std)
        .metric("gain", summary.gain());
    if let Some(path) = config_path {
        report.parameter("blobs-config", path.display());
    }
    Ok(report)
}
