//! Decision fusion: average the per-modality weight vectors and take the
//! best-scoring emotion, breaking exact ties toward the lowest id.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelKind, EmotionId};

/// Row sums may drift this far from one before fusion rejects the matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// One weight vector per modality, each over the eight emotions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodWeightMatrix {
    rows: [[f64; 8]; 3],
}

impl LikelihoodWeightMatrix {
    pub fn new(rows: [[f64; 8]; 3]) -> Self {
        LikelihoodWeightMatrix { rows }
    }

    /// Builds the matrix from per-channel weight slices.
    pub fn from_rows(emg: &[f64], bvp: &[f64], gsr: &[f64]) -> Result<Self> {
        let mut rows = [[0.0; 8]; 3];
        for (kind, src) in ChannelKind::ALL.into_iter().zip([emg, bvp, gsr]) {
            if src.len() != 8 {
                return Err(Error::Contract(format!(
                    "{kind} weight vector has {} entries, expected 8",
                    src.len()
                )));
            }
            rows[kind.index()].copy_from_slice(src);
        }
        Ok(LikelihoodWeightMatrix { rows })
    }

    pub fn rows(&self) -> &[[f64; 8]; 3] {
        &self.rows
    }

    pub fn row(&self, kind: ChannelKind) -> &[f64; 8] {
        &self.rows[kind.index()]
    }
}

/// Fused column means and the resulting prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusedDecision {
    pub mean_weights: [f64; 8],
    pub predicted: EmotionId,
}

/// Validates the matrix rows and averages them into one decision.
///
/// Every row must be a probability-like vector: finite, nonnegative, and
/// summing to one within [`ROW_SUM_TOLERANCE`]. The prediction is the
/// column with the largest mean; an exact tie goes to the lower emotion id.
pub fn fuse(matrix: &LikelihoodWeightMatrix) -> Result<FusedDecision> {
    for (kind, row) in ChannelKind::ALL.into_iter().zip(matrix.rows()) {
        if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Contract(format!(
                "{kind} weight row has a negative or non-finite entry"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Contract(format!(
                "{kind} weight row sums to {sum}, expected 1"
            )));
        }
    }
    let mut mean_weights = [0.0f64; 8];
    for row in matrix.rows() {
        for (acc, v) in mean_weights.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for acc in &mut mean_weights {
        *acc /= 3.0;
    }
    let mut best = 0usize;
    for (i, &w) in mean_weights.iter().enumerate() {
        if w > mean_weights[best] {
            best = i;
        }
    }
    Ok(FusedDecision {
        mean_weights,
        predicted: EmotionId::from_index(best),
    })
}
