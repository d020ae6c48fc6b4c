//! Seeded generators for benchmarks, demos and property tests: Gaussian
//! blobs, random weighted graphs, path/grid graphs and noisy sinusoids.
//!
//! Everything takes an explicit RNG so callers control reproducibility.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, LabelVector};
use crate::graph::SparseGraph;
use crate::spectral::GraphSignal;

/// Isotropic Gaussian blobs, one per class, class-major row order.
///
/// Class `c` is centered at `separation / sqrt(2) * e_c`, which puts
/// every pair of class means exactly `separation` apart. Requires
/// `num_classes <= dim`.
pub fn gaussian_blobs<R: Rng + ?Sized>(
    rng: &mut R,
    num_classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
) -> Result<(FeatureMatrix, LabelVector)> {
    if num_classes == 0 || per_class == 0 || dim == 0 {
        return Err(Error::parameter(
            "blob generation needs at least one class, one sample and one dimension",
        ));
    }
    if num_classes > dim {
        return Err(Error::parameter(format!(
            "equidistant means need num_classes <= dim, got {num_classes} > {dim}"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::parameter(format!(
            "separation must be finite and >= 0, got {separation}"
        )));
    }
    let offset = separation / 2.0_f64.sqrt();
    let n = num_classes * per_class;
    let mut values = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for c in 0..num_classes {
        for s in 0..per_class {
            let row = c * per_class + s;
            for d in 0..dim {
                let noise: f64 = StandardNormal.sample(rng);
                values[[row, d]] = noise + if d == c { offset } else { 0.0 };
            }
            labels.push(c);
        }
    }
    Ok((
        FeatureMatrix::new(values)?,
        LabelVector::new(labels, num_classes)?,
    ))
}

/// Erdos-Renyi style weighted graph: each pair is an edge with
/// probability `edge_prob`, weighted uniformly from `(0, 1)`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_prob: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                let w: f64 = rng.gen();
                if w > 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
    }
    SparseGraph::new(n.max(1), edges).expect("generated edges are valid")
}

/// Standard normal signal with the given number of channels.
pub fn random_signal<R: Rng + ?Sized>(rng: &mut R, n: usize, channels: usize) -> GraphSignal {
    let values = Array2::from_shape_fn((n, channels), |_| StandardNormal.sample(rng));
    GraphSignal::new(values).expect("normal samples are finite")
}

/// Path graph with unit weights: `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> SparseGraph {
    let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0));
    SparseGraph::new(n.max(1), edges).expect("path edges are valid")
}

/// 4-neighbor grid graph with unit weights, row-major vertex order.
pub fn grid_graph(rows: usize, cols: usize) -> SparseGraph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    SparseGraph::new((rows * cols).max(1), edges).expect("grid edges are valid")
}

/// `amplitude * sin(2 pi cycles i / n)` sampled on `n` vertices.
pub fn sinusoid(n: usize, cycles: f64, amplitude: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |i| {
        amplitude * (2.0 * std::f64::consts::PI * cycles * i as f64 / n as f64).sin()
    })
}

/// Adds i.i.d. Gaussian noise with the given standard deviation.
pub fn add_gaussian_noise<R: Rng + ?Sized>(
    rng: &mut R,
    signal: &Array1<f64>,
    sigma: f64,
) -> Array1<f64> {
    signal.mapv(|v| {
        let noise: f64 = StandardNormal.sample(rng);
        v + sigma * noise
    })
}
