//! Spectral machinery: Laplacian eigendecomposition, the graph Fourier
//! transform, and three filter families (per-frequency tables, spectral
//! responses with a Chebyshev fast path, and diffusion operators).
//!
//! Responses are parameterized by a frequency scale `lambda_max` that is
//! always taken from the same power-iteration estimate, so the exact and
//! Chebyshev paths of [`apply_filter`] target the identical response and
//! differ only by polynomial truncation error.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::SparseGraph;

/// Number of power-iteration steps behind every spectral-bound estimate.
const POWER_ITERATION_STEPS: usize = 50;
/// Safety inflation applied to the power-iteration estimate.
const LAMBDA_MAX_INFLATION: f64 = 1.01;

/// Eigendecomposition of a Laplacian: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
}

impl LaplacianSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

/// One or more real-valued signals supported on a graph's vertices,
/// stored as an `n x channels` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    values: Array2<f64>,
}

impl GraphSignal {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::input(format!(
                "signal must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("signal contains non-finite values"));
        }
        Ok(Self { values })
    }

    pub fn from_vector(values: Array1<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values.into_shape((n, 1)).expect("column reshape"))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, c: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.column(c)
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// Spectral response shapes for [`FilterSpec::SpectralResponse`].
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseShape {
    /// Low-pass with pass-band below `tau/2 * lambda_max`, raised-cosine
    /// roll-off up to `tau * lambda_max`, zero beyond.
    Simoncelli { tau: f64 },
    /// `exp(-scale * lambda / lambda_max)`.
    Heat { scale: f64 },
    /// `sum_k coeffs[k] * lambda^k` in the raw eigenvalue.
    Polynomial { coeffs: Vec<f64> },
}

impl ResponseShape {
    pub fn validate(&self) -> Result<()> {
        match self {
            ResponseShape::Simoncelli { tau } => {
                if !(tau.is_finite() && *tau > 0.0 && *tau <= 1.0) {
                    return Err(Error::parameter(format!(
                        "simoncelli tau must be in (0, 1], got {tau}"
                    )));
                }
            }
            ResponseShape::Heat { scale } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::parameter(format!(
                        "heat scale must be finite and >= 0, got {scale}"
                    )));
                }
            }
            ResponseShape::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::parameter("polynomial response needs coefficients"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::parameter("polynomial coefficients must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Response at `lambda`, with `lambda_max` as the frequency scale.
    /// A non-positive `lambda_max` (edgeless graph) behaves as ratio 0.
    pub fn evaluate(&self, lambda: f64, lambda_max: f64) -> f64 {
        let r = if lambda_max > 0.0 {
            lambda / lambda_max
        } else {
            0.0
        };
        match self {
            ResponseShape::Simoncelli { tau } => {
                if r <= tau / 2.0 {
                    1.0
                } else if r <= *tau {
                    (FRAC_PI_2 * (2.0 * r / tau).log2()).cos()
                } else {
                    0.0
                }
            }
            ResponseShape::Heat { scale } => (-scale * r).exp(),
            ResponseShape::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
            }
        }
    }
}

/// Shift operator used by [`FilterSpec::Diffusion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOperator {
    /// `S = I - a L`.
    Combinatorial,
    /// `S = I - a L_norm`.
    Normalized,
    /// `S = a I + E` with `E = D^{-1/2} A D^{-1/2}`.
    AdjacencyNormalized,
}

/// A graph filter, in one of the three representations.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    /// Per-frequency response, one entry per eigenvalue index.
    SpectralTable(Vec<f64>),
    /// Response as a function of frequency.
    SpectralResponse(ResponseShape),
    /// `S^m` products of a shift operator; needs no eigendecomposition.
    Diffusion {
        a: f64,
        m: usize,
        operator: ShiftOperator,
    },
}

/// Execution strategy for [`apply_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMethod {
    /// Full eigendecomposition, `F diag(h) F^T s`.
    Exact,
    /// Chebyshev polynomial approximation of the response, applied with
    /// repeated sparse mat-vecs. Only valid for spectral responses.
    Chebyshev { order: usize },
}

/// Upper bound on the largest eigenvalue of the combinatorial Laplacian:
/// 50 power-iteration steps inflated by 1%. The iteration runs on a
/// block of 4 vectors with Rayleigh-Ritz extraction; a single vector is
/// not reliable when the top of the spectrum clusters.
pub fn estimate_lambda_max(graph: &SparseGraph) -> f64 {
    operator_norm_estimate(graph.n(), POWER_ITERATION_STEPS, |x| {
        graph.laplacian_apply(x)
    }) * LAMBDA_MAX_INFLATION
}

/// Power-iteration estimate of the spectral radius of the normalized
/// adjacency `E`. At most 1 for any graph.
pub fn estimate_normalized_adjacency_radius(graph: &SparseGraph) -> f64 {
    operator_norm_estimate(graph.n(), 2 * POWER_ITERATION_STEPS, |x| {
        graph.normalized_adjacency_apply(x)
    })
}

fn operator_norm_estimate(
    n: usize,
    steps: usize,
    apply: impl Fn(&Array2<f64>) -> Array2<f64>,
) -> f64 {
    let block = n.min(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e_6e09);
    let mut basis = Array2::from_shape_fn((n, block), |_| rng.gen::<f64>() - 0.5);
    if orthonormalize_columns(&mut basis) == 0 {
        return 0.0;
    }
    for _ in 0..steps {
        basis = apply(&basis);
        if !basis.iter().all(|v| v.is_finite()) {
            return f64::INFINITY;
        }
        if orthonormalize_columns(&mut basis) == 0 {
            return 0.0;
        }
    }
    // Largest |eigenvalue| of the projected operator X^T A X.
    let image = apply(&basis);
    let projected = basis.t().dot(&image);
    let m = DMatrix::from_fn(block, block, |i, j| {
        0.5 * (projected[[i, j]] + projected[[j, i]])
    });
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Modified Gram-Schmidt in place; returns the rank. Columns that
/// collapse are zeroed and no longer contribute.
fn orthonormalize_columns(x: &mut Array2<f64>) -> usize {
    let mut rank = 0;
    for j in 0..x.ncols() {
        for i in 0..j {
            let proj = x.column(i).dot(&x.column(j));
            let col_i = x.column(i).to_owned();
            x.column_mut(j).scaled_add(-proj, &col_i);
        }
        let norm = x.column(j).dot(&x.column(j)).sqrt();
        if norm > 1e-12 {
            x.column_mut(j).mapv_inplace(|v| v / norm);
            rank += 1;
        } else {
            x.column_mut(j).fill(0.0);
        }
    }
    rank
}

/// Eigendecomposes a symmetric matrix into a [`LaplacianSpectrum`].
///
/// Eigenvalues come out ascending; each eigenvector is sign-fixed so its
/// entry of largest magnitude (first such entry on ties) is positive.
pub fn eigendecompose(laplacian: &Array2<f64>) -> Result<LaplacianSpectrum> {
    let n = laplacian.nrows();
    if laplacian.ncols() != n {
        return Err(Error::input(format!(
            "matrix must be square, got {}x{}",
            n,
            laplacian.ncols()
        )));
    }
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((laplacian[[i, j]] - laplacian[[j, i]]).abs());
        }
    }
    if asym > 1e-10 {
        return Err(Error::input(format!(
            "matrix is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    if laplacian.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix contains non-finite values"));
    }

    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (laplacian[[i, j]] + laplacian[[j, i]]));
    let decomp = SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));

    let eigenvalues = Array1::from_iter(order.iter().map(|&k| decomp.eigenvalues[k]));
    let mut eigenvectors = Array2::zeros((n, n));
    for (out_col, &k) in order.iter().enumerate() {
        let col = decomp.eigenvectors.column(k);
        let mut anchor = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if col[i].abs() > best {
                best = col[i].abs();
                anchor = i;
            }
        }
        let flip = if col[anchor] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[[i, out_col]] = flip * col[i];
        }
    }

    Ok(LaplacianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Graph Fourier transform: projects a signal onto the eigenbasis,
/// `s_hat = F^T s` per channel.
pub fn gft(spectrum: &LaplacianSpectrum, signal: &GraphSignal) -> Result<GraphSignal> {
    check_signal_len(spectrum.n(), signal)?;
    GraphSignal::new(spectrum.eigenvectors.t().dot(signal.values()))
}

/// Inverse graph Fourier transform, `s = F s_hat`.
pub fn igft(spectrum: &LaplacianSpectrum, coeffs: &GraphSignal) -> Result<GraphSignal> {
    check_signal_len(spectrum.n(), coeffs)?;
    GraphSignal::new(spectrum.eigenvectors.dot(coeffs.values()))
}

fn check_signal_len(n: usize, signal: &GraphSignal) -> Result<()> {
    if signal.n() != n {
        return Err(Error::input(format!(
            "signal has {} vertices but the operator expects {n}",
            signal.n()
        )));
    }
    Ok(())
}

/// Filters a signal on a graph.
///
/// The exact method eigendecomposes the combinatorial Laplacian and
/// multiplies in the spectral domain; the Chebyshev method expands a
/// spectral response over `[0, lambda_max]` and applies it with `order`
/// sparse mat-vecs; diffusion specs run `S^m` products directly.
pub fn apply_filter(
    graph: &SparseGraph,
    spec: &FilterSpec,
    signal: &GraphSignal,
    method: FilterMethod,
) -> Result<GraphSignal> {
    check_signal_len(graph.n(), signal)?;
    match (spec, method) {
        (FilterSpec::SpectralTable(h), FilterMethod::Exact) => {
            if h.len() != graph.n() {
                return Err(Error::parameter(format!(
                    "spectral table has {} entries for {} vertices",
                    h.len(),
                    graph.n()
                )));
            }
            if h.iter().any(|v| !v.is_finite()) {
                return Err(Error::parameter("spectral table must be finite"));
            }
            let spectrum = eigendecompose(&graph.combinatorial_laplacian())?;
            exact_spectral_apply(&spectrum, h, signal)
        }
        (FilterSpec::SpectralResponse(shape), FilterMethod::Exact) => {
            shape.validate()?;
            let lambda_max = estimate_lambda_max(graph);
            let spectrum = eigendecompose(&graph.combinatorial_laplacian())?;
            let h: Vec<f64> = spectrum
                .eigenvalues()
                .iter()
                .map(|&l| shape.evaluate(l, lambda_max))
                .collect();
            exact_spectral_apply(&spectrum, &h, signal)
        }
        (FilterSpec::SpectralResponse(shape), FilterMethod::Chebyshev { order }) => {
            shape.validate()?;
            let lambda_max = estimate_lambda_max(graph);
            chebyshev_apply(graph, shape, signal, order, lambda_max)
        }
        (FilterSpec::Diffusion { a, m, operator }, FilterMethod::Exact) => {
            if !a.is_finite() {
                return Err(Error::parameter(format!("diffusion a must be finite, got {a}")));
            }
            let mut y = signal.values().clone();
            for _ in 0..*m {
                y = match operator {
                    ShiftOperator::Combinatorial => &y - &(graph.laplacian_apply(&y) * *a),
                    ShiftOperator::Normalized => &y - &(graph.normalized_laplacian_apply(&y) * *a),
                    ShiftOperator::AdjacencyNormalized => {
                        &(&y * *a) + &graph.normalized_adjacency_apply(&y)
                    }
                };
            }
            GraphSignal::new(y)
        }
        (FilterSpec::SpectralTable(_), FilterMethod::Chebyshev { .. }) => Err(Error::parameter(
            "chebyshev filtering requires a spectral-response filter, not a table",
        )),
        (FilterSpec::Diffusion { .. }, FilterMethod::Chebyshev { .. }) => Err(Error::parameter(
            "chebyshev filtering requires a spectral-response filter, not a diffusion",
        )),
    }
}

fn exact_spectral_apply(
    spectrum: &LaplacianSpectrum,
    h: &[f64],
    signal: &GraphSignal,
) -> Result<GraphSignal> {
    let mut coeffs = spectrum.eigenvectors.t().dot(signal.values());
    for (mut row, &gain) in coeffs.rows_mut().into_iter().zip(h.iter()) {
        row.mapv_inplace(|v| v * gain);
    }
    GraphSignal::new(spectrum.eigenvectors.dot(&coeffs))
}

/// Chebyshev series coefficients of `shape` over `[0, lambda_max]` up to
/// the given order, by Chebyshev-Gauss quadrature. At least 256 nodes are
/// used so the coefficients are those of the truncated series rather
/// than the aliased interpolant; the first coefficient is halved at
/// evaluation time.
fn chebyshev_coefficients(shape: &ResponseShape, order: usize, lambda_max: f64) -> Vec<f64> {
    let n_pts = (order + 1).max(256);
    let mut coeffs = vec![0.0; order + 1];
    let samples: Vec<f64> = (0..n_pts)
        .map(|p| {
            let theta = std::f64::consts::PI * (p as f64 + 0.5) / n_pts as f64;
            let lambda = lambda_max / 2.0 * (theta.cos() + 1.0);
            shape.evaluate(lambda, lambda_max)
        })
        .collect();
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (p, &f) in samples.iter().enumerate() {
            let theta = std::f64::consts::PI * (p as f64 + 0.5) / n_pts as f64;
            acc += f * (k as f64 * theta).cos();
        }
        *c = 2.0 * acc / n_pts as f64;
    }
    coeffs
}

fn chebyshev_apply(
    graph: &SparseGraph,
    shape: &ResponseShape,
    signal: &GraphSignal,
    order: usize,
    lambda_max: f64,
) -> Result<GraphSignal> {
    if lambda_max <= f64::EPSILON {
        // Edgeless graph: every frequency is 0.
        let gain = shape.evaluate(0.0, 0.0);
        return GraphSignal::new(signal.values() * gain);
    }
    let coeffs = chebyshev_coefficients(shape, order, lambda_max);
    let scale = 2.0 / lambda_max;
    // T_k(L~) s with L~ = (2/lambda_max) L - I, via the three-term recurrence.
    let shifted = |x: &Array2<f64>| -> Array2<f64> { &(graph.laplacian_apply(x) * scale) - x };
    let mut t_prev = signal.values().clone();
    let mut result = &t_prev * (0.5 * coeffs[0]);
    if order == 0 {
        return GraphSignal::new(result);
    }
    let mut t_cur = shifted(&t_prev);
    result = result + &t_cur * coeffs[1];
    for &c in &coeffs[2..] {
        let t_next = &(shifted(&t_cur) * 2.0) - &t_prev;
        result = result + &t_next * c;
        t_prev = t_cur;
        t_cur = t_next;
    }
    GraphSignal::new(result)
}

/// Low-pass `(I - a L_norm)^m s`, applied with `m` sparse mat-vecs.
/// `m = 0` returns the signal unchanged.
pub fn vbl_lowpass(graph: &SparseGraph, a: f64, m: usize, signal: &GraphSignal) -> Result<GraphSignal> {
    check_signal_len(graph.n(), signal)?;
    if !a.is_finite() {
        return Err(Error::parameter(format!("a must be finite, got {a}")));
    }
    let mut y = signal.values().clone();
    for _ in 0..m {
        y = &y - &(graph.normalized_laplacian_apply(&y) * a);
    }
    GraphSignal::new(y)
}

/// Feature diffusion `(alpha I + E)^m F` over the graph's normalized
/// adjacency, by `m` repeated applications.
pub fn sgc_diffuse(
    features: &FeatureMatrix,
    graph: &SparseGraph,
    alpha: f64,
    m: usize,
) -> Result<FeatureMatrix> {
    if features.n() != graph.n() {
        return Err(Error::input(format!(
            "{} feature rows but the graph has {} vertices",
            features.n(),
            graph.n()
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::parameter(format!("alpha must be finite, got {alpha}")));
    }
    let mut y = features.values().clone();
    for _ in 0..m {
        y = &(&y * alpha) + &graph.normalized_adjacency_apply(&y);
    }
    FeatureMatrix::new(y)
        .map_err(|_| Error::NumericalFailure("diffusion produced non-finite values".into()))
}
