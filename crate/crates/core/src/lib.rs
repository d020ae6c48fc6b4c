//! # lgg-core
//!
//! Latent geometry graphs: build similarity graphs over feature
//! embeddings and run graph-signal-processing tools on top of them.
//!
//! | Module | What it holds |
//! |--------|---------------|
//! | [`graph`] | `SparseGraph`, k-NN and composite graph builders, Laplacians |
//! | [`spectral`] | Eigendecomposition, GFT, spectral/diffusion filters, Chebyshev |
//! | [`analysis`] | Smoothness, label smoothness, layer gaps, influence scores |
//! | [`denoise`] | Feature diffusion and label propagation for few-label tasks |
//! | [`losses`] | Smoothness/distillation/affinity losses, peer regularization |
//! | [`synthetic`] | Seeded blobs, random graphs, paths, grids, sinusoids |
//!
//! Graphs are immutable after construction and every operation is a pure
//! function, so shared inputs can be used concurrently. All randomness
//! is injected through caller-provided RNGs.

pub mod analysis;
pub mod denoise;
pub mod error;
pub mod features;
pub mod graph;
pub mod losses;
pub mod spectral;
pub mod synthetic;

pub use analysis::{
    label_smoothness, margin_influence, smoothness, smoothness_gap, smoothness_sum, HighPass,
    InfluenceScores, SmoothnessReport,
};
pub use denoise::{
    propagate_labels, transfer_sgc, weighted_loss_combine, PartialLabels, PropagationMethod,
    PseudoLabelResult,
};
pub use error::{Error, Result};
pub use features::{FeatureMatrix, LabelVector};
pub use graph::{
    knn_graph, similarity_matrix, threshold_topk, vbl_adjacency, Edge, Metric, Similarity,
    SparseGraph, SymmetrizeMode, VblParams,
};
pub use losses::{
    affinity_loss, combined_distill_loss, gkd_loss, graph_smoothness_loss, peer_regularize,
    smoothness_gap_regularizer, AffinityOutcome, AffinitySimilarity, AffinityTarget,
    LayerFeatureSet, PeerBank,
};
pub use spectral::{
    apply_filter, eigendecompose, estimate_lambda_max, estimate_normalized_adjacency_radius, gft,
    igft, sgc_diffuse, vbl_lowpass, FilterMethod, FilterSpec, GraphSignal, LaplacianSpectrum,
    ResponseShape, ShiftOperator,
};
