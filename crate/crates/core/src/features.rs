//! Feature embeddings and class labels, the raw inputs of every pipeline.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// An `n x d` matrix of real-valued embeddings, one row per sample.
///
/// Construction rejects empty matrices and non-finite entries, so
/// downstream code can assume both.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::input(format!(
                "feature matrix must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite feature value {v} at row {i}, column {j}"
            )));
        }
        Ok(Self { values })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("feature matrix must have at least one row"));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("feature rows must all have the same length"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .expect("row-major layout matches shape");
        Self::new(values)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Embedding dimension.
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// Dense class assignments: one label in `[0, num_classes)` per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::input("number of classes must be at least 1"));
        }
        if labels.is_empty() {
            return Err(Error::input("label vector must not be empty"));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::input(format!(
                "label {l} at index {i} is out of range for {num_classes} classes"
            )));
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Binary indicator signal of one class: 1.0 where the sample has
    /// that class, 0.0 elsewhere.
    pub fn indicator(&self, class: usize) -> Array1<f64> {
        Array1::from_iter(
            self.labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { 0.0 }),
        )
    }

    /// Per-class sample counts, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}
