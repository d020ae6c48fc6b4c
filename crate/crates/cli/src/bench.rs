//! Synthetic few-label benchmark: Gaussian blobs, a nearest-class-mean
//! classifier on the unlabeled samples, and the accuracy gain from
//! diffusing the features before classification.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use lgg_core::synthetic::gaussian_blobs;
use lgg_core::{transfer_sgc, FeatureMatrix, PartialLabels};

use crate::error::{CliError, Result};

/// Blob geometry and diffusion parameters for the benchmark.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobsConfig {
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub unlabeled_per_class: usize,
    pub k: usize,
    pub alpha: f64,
    pub m: usize,
}

impl Default for BlobsConfig {
    fn default() -> Self {
        BlobsConfig {
            classes: 2,
            dim: 20,
            separation: 2.0,
            unlabeled_per_class: 100,
            k: 10,
            alpha: 0.5,
            m: 2,
        }
    }
}

/// Mean and standard deviation of classification accuracy over the
/// trials, with raw features and with diffused features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSummary {
    pub raw_mean: f64,
    pub raw_std: f64,
    pub sgc_mean: f64,
    pub sgc_std: f64,
}

impl BenchSummary {
    pub fn gain(&self) -> f64 {
        self.sgc_mean - self.raw_mean
    }
}

/// Runs `trials` seeded trials with `shots` labeled samples per class.
pub fn few_label_benchmark(
    cfg: &BlobsConfig,
    shots: usize,
    trials: usize,
    seed: u64,
) -> Result<BenchSummary> {
    if shots == 0 || trials == 0 {
        return Err(CliError::Parameter(
            "shots and trials must both be at least 1".into(),
        ));
    }
    let per_class = shots + cfg.unlabeled_per_class;
    let mut raw_accs = Vec::with_capacity(trials);
    let mut sgc_accs = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let (features, labels) =
            gaussian_blobs(&mut rng, cfg.classes, per_class, cfg.dim, cfg.separation)?;

        // The first `shots` rows of every class block are labeled.
        let mut labeled = Vec::with_capacity(cfg.classes * shots);
        let mut eval = Vec::new();
        for c in 0..cfg.classes {
            for s in 0..per_class {
                let idx = c * per_class + s;
                if s < shots {
                    labeled.push((idx, c));
                } else {
                    eval.push((idx, c));
                }
            }
        }
        let partial = PartialLabels::new(features.n(), labeled.clone(), cfg.classes)?;

        raw_accs.push(ncm_accuracy(&features, &labeled, &eval, cfg.classes));
        let diffused = transfer_sgc(&features, &partial, cfg.k, cfg.alpha, cfg.m)?;
        sgc_accs.push(ncm_accuracy(&diffused, &labeled, &eval, cfg.classes));
        let _ = labels;
    }
    let (raw_mean, raw_std) = mean_std(&raw_accs);
    let (sgc_mean, sgc_std) = mean_std(&sgc_accs);
    Ok(BenchSummary {
        raw_mean,
        raw_std,
        sgc_mean,
        sgc_std,
    })
}

/// Nearest-class-mean accuracy: class prototypes are the means of the
/// labeled rows; evaluation samples take the class of the closest
/// prototype (ties toward the smaller class index).
fn ncm_accuracy(
    features: &FeatureMatrix,
    labeled: &[(usize, usize)],
    eval: &[(usize, usize)],
    classes: usize,
) -> f64 {
    let d = features.dim();
    let mut means = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for &(idx, c) in labeled {
        counts[c] += 1;
        for (acc, &v) in means[c].iter_mut().zip(features.row(idx)) {
            *acc += v;
        }
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        if count > 0 {
            for v in mean.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    let mut correct = 0usize;
    for &(idx, truth) in eval {
        let row = features.row(idx);
        let mut best_class = 0;
        let mut best_dist = f64::INFINITY;
        for (c, mean) in means.iter().enumerate() {
            let dist: f64 = row
                .iter()
                .zip(mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if dist < best_dist {
                best_dist = dist;
                best_class = c;
            }
        }
        if best_class == truth {
            correct += 1;
        }
    }
    correct as f64 / eval.len().max(1) as f64
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
