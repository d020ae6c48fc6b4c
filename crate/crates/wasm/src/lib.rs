//! Browser bindings for the interactive demo page. Each export takes
//! plain numbers from the UI and returns a JSON string; errors come
//! back as `{"error": "..."}` instead of panics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use lgg_core::synthetic::{add_gaussian_noise, gaussian_blobs, path_graph, sinusoid};
use lgg_core::{
    apply_filter, estimate_lambda_max, knn_graph, propagate_labels, smoothness, threshold_topk,
    FilterMethod, FilterSpec, GraphSignal, PartialLabels, PropagationMethod, ResponseShape,
    Similarity, SymmetrizeMode,
};

fn err_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// Denoises a noisy sinusoid on a path graph with the Simoncelli
/// low-pass. `order = 0` uses exact spectral filtering, anything else
/// the Chebyshev approximation of that order.
#[wasm_bindgen]
pub fn path_denoise(
    n: usize,
    cycles: f64,
    noise_sd: f64,
    tau: f64,
    order: usize,
    seed: u64,
) -> String {
    if !(4..=2000).contains(&n) {
        return err_json("n must be between 4 and 2000");
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return err_json("noise standard deviation must be finite and nonnegative");
    }
    let graph = path_graph(n);
    let clean = sinusoid(n, cycles, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = add_gaussian_noise(&mut rng, &clean, noise_sd);

    let clean_sig = match GraphSignal::from_vector(clean.clone()) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let noisy_sig = match GraphSignal::from_vector(noisy.clone()) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let method = if order == 0 {
        FilterMethod::Exact
    } else {
        FilterMethod::Chebyshev { order }
    };
    let filtered = match apply_filter(
        &graph,
        &FilterSpec::SpectralResponse(ResponseShape::Simoncelli { tau }),
        &noisy_sig,
        method,
    ) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };

    let sigma_clean = smoothness(&graph, &clean_sig).unwrap_or(f64::NAN);
    let sigma_noisy = smoothness(&graph, &noisy_sig).unwrap_or(f64::NAN);
    let sigma_filtered = smoothness(&graph, &filtered).unwrap_or(f64::NAN);

    json!({
        "clean": clean.to_vec(),
        "noisy": noisy.to_vec(),
        "filtered": filtered.column(0).to_vec(),
        "smoothness": {
            "clean": sigma_clean,
            "noisy": sigma_noisy,
            "filtered": sigma_filtered,
        },
        "lambda_max": estimate_lambda_max(&graph),
    })
    .to_string()
}

/// Two Gaussian blobs in the plane with one labeled seed per class:
/// builds the top-k cosine graph (transpose added) and spreads the seeds
/// by label propagation. Returns points, edges, pseudo-labels and
/// certainty weights for plotting.
#[wasm_bindgen]
pub fn propagate_blobs(per_class: usize, separation: f64, k: usize, alpha: f64, seed: u64) -> String {
    if !(2..=400).contains(&per_class) {
        return err_json("points per class must be between 2 and 400");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (features, labels) = match gaussian_blobs(&mut rng, 2, per_class, 2, separation) {
        Ok(v) => v,
        Err(e) => return err_json(e),
    };
    let complete = match knn_graph(&features, features.n() - 1, Similarity::Cosine) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let graph = match threshold_topk(&complete, k, SymmetrizeMode::AddTranspose) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let partial = match PartialLabels::new(features.n(), [(0, 0), (per_class, 1)], 2) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let result = match propagate_labels(&graph, &partial, alpha, PropagationMethod::ClosedForm) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };

    let truth = labels.labels();
    let correct = result
        .pseudo_labels
        .iter()
        .zip(truth)
        .filter(|(a, b)| a == b)
        .count();
    let points: Vec<[f64; 2]> = (0..features.n())
        .map(|i| [features.values()[[i, 0]], features.values()[[i, 1]]])
        .collect();
    let edges: Vec<(usize, usize, f64)> = graph
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.weight))
        .collect();

    json!({
        "points": points,
        "true_class": truth,
        "labeled": [0, per_class],
        "pseudo": result.pseudo_labels,
        "omega": result.omega,
        "edges": edges,
        "accuracy": correct as f64 / features.n() as f64,
        "warnings": result.warnings,
    })
    .to_string()
}

/// Samples the Simoncelli spectral response on `[0, 1.2]` of the
/// normalized frequency, for the response-explorer plot.
#[wasm_bindgen]
pub fn simoncelli_response(tau: f64, samples: usize) -> String {
    if !(2..=10_000).contains(&samples) {
        return err_json("samples must be between 2 and 10000");
    }
    let shape = ResponseShape::Simoncelli { tau };
    if let Err(e) = shape.validate() {
        return err_json(e);
    }
    let ratios: Vec<f64> = (0..samples)
        .map(|i| 1.2 * i as f64 / (samples - 1) as f64)
        .collect();
    let gains: Vec<f64> = ratios.iter().map(|&r| shape.evaluate(r, 1.0)).collect();
    json!({ "ratio": ratios, "gain": gains }).to_string()
}
