//! Input containers: the observation matrix and two-cluster label vectors.

use crate::error::{Error, Result};

/// An N x d matrix of observations, row-major, with every entry finite.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_obs: usize,
    n_features: usize,
}

impl DataMatrix {
    /// Wraps a row-major buffer, rejecting size mismatches and non-finite entries.
    pub fn new(values: Vec<f64>, n_obs: usize, n_features: usize) -> Result<Self> {
        if n_obs == 0 || n_features == 0 {
            return Err(Error::InvalidParameter(
                "data matrix must have at least one row and one column".into(),
            ));
        }
        if values.len() != n_obs * n_features {
            return Err(Error::InvalidParameter(format!(
                "buffer of length {} does not hold {n_obs} x {n_features} values",
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: idx / n_features,
                    col: idx % n_features,
                });
            }
        }
        Ok(Self { values, n_obs, n_features })
    }

    /// Builds a matrix from per-observation rows of equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_obs = rows.len();
        let n_features = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::RaggedRow { row: i, expected: n_features, got: row.len() });
            }
        }
        Self::new(rows.into_iter().flatten().collect(), n_obs, n_features)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-feature z-scoring; a zero-variance feature becomes all zeros.
    pub fn standardized(&self) -> DataMatrix {
        let (n, d) = (self.n_obs, self.n_features);
        let mut out = self.values.clone();
        for j in 0..d {
            let mean = (0..n).map(|i| self.values[i * d + j]).sum::<f64>() / n as f64;
            let var = (0..n)
                .map(|i| {
                    let c = self.values[i * d + j] - mean;
                    c * c
                })
                .sum::<f64>()
                / n as f64;
            let sd = var.sqrt();
            for i in 0..n {
                let cell = &mut out[i * d + j];
                *cell = if sd > 0.0 { (*cell - mean) / sd } else { 0.0 };
            }
        }
        DataMatrix { values: out, n_obs: n, n_features: d }
    }
}

/// A length-N assignment of observations to cluster 1 or cluster 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<u8>,
    ones: usize,
}

impl LabelVector {
    /// Validates that every entry is 1 or 2.
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        let mut ones = 0;
        for (index, &value) in labels.iter().enumerate() {
            match value {
                1 => ones += 1,
                2 => {}
                _ => return Err(Error::BadLabel { index, value }),
            }
        }
        Ok(Self { labels, ones })
    }

    /// `m` ones followed by `n` twos.
    pub fn from_split(m: usize, n: usize) -> Self {
        let mut labels = vec![1u8; m];
        labels.extend(std::iter::repeat(2u8).take(n));
        Self { labels, ones: m }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of observations labeled 1.
    pub fn m(&self) -> usize {
        self.ones
    }

    /// Number of observations labeled 2.
    pub fn n(&self) -> usize {
        self.labels.len() - self.ones
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// The same partition with the cluster names exchanged.
    pub fn swapped(&self) -> LabelVector {
        let labels = self.labels.iter().map(|&v| 3 - v).collect();
        LabelVector { labels, ones: self.labels.len() - self.ones }
    }

    /// Renames clusters so that observation 0 carries label 1.
    pub fn canonical(&self) -> LabelVector {
        if self.labels.first().copied() == Some(2) {
            self.swapped()
        } else {
            self.clone()
        }
    }

    #[cfg(test)]
    pub(crate) fn flip(&mut self, i: usize) {
        if self.labels[i] == 1 {
            self.ones -= 1;
            self.labels[i] = 2;
        } else {
            self.ones += 1;
            self.labels[i] = 1;
        }
    }
}
