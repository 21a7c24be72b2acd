//! Correlation-based feature pruning.
//!
//! Columns are scanned in canonical order; a column is kept only when its
//! absolute Pearson correlation with every previously kept column stays at
//! or below the threshold. Zero-variance columns are dropped up front. The
//! resulting mask must keep at least one column per channel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::model::{ChannelKind, FeatureIndex};

/// Pearson correlation in [-1, 1]; zero when either input has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "correlation needs equal lengths");
    assert!(x.len() >= 2, "correlation needs at least 2 observations");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Which of the 27 feature columns survive pruning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMask {
    kept: Vec<FeatureIndex>,
    threshold: f64,
}

impl FeatureMask {
    /// Mask keeping every column (the no-pruning configuration).
    pub fn full() -> FeatureMask {
        FeatureMask {
            kept: FeatureIndex::all().collect(),
            threshold: 1.0,
        }
    }

    pub fn kept(&self) -> &[FeatureIndex] {
        &self.kept
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn contains(&self, index: FeatureIndex) -> bool {
        self.kept.binary_search(&index).is_ok()
    }

    /// Kept column positions (0..27) in ascending order.
    pub fn kept_columns(&self) -> Vec<usize> {
        self.kept.iter().map(|idx| idx.get()).collect()
    }

    /// Kept column positions belonging to one channel, ascending.
    pub fn channel_columns(&self, kind: ChannelKind) -> Vec<usize> {
        self.kept
            .iter()
            .filter(|idx| idx.channel() == kind)
            .map(|idx| idx.get())
            .collect()
    }
}

/// Greedy correlation pruning over the rows of a feature table.
///
/// Needs at least two rows and a threshold in (0, 1]. Fails if any channel
/// loses all of its columns.
pub fn prune_correlated(rows: &[&FeatureRow], threshold: f64) -> Result<FeatureMask> {
    if !(threshold.is_finite() && threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Parameter {
            name: "threshold",
            detail: format!("must be in (0, 1], got {threshold}"),
        });
    }
    if rows.len() < 2 {
        return Err(Error::Parameter {
            name: "rows",
            detail: format!(
                "need at least 2 rows to estimate correlations, got {}",
                rows.len()
            ),
        });
    }
    let n = rows.len() as f64;
    let columns: Vec<Vec<f64>> = (0..FeatureIndex::COUNT)
        .map(|j| rows.iter().map(|row| row[j]).collect())
        .collect();
    let degenerate: Vec<bool> = columns
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            var < crate::features::DEGENERATE_VARIANCE
        })
        .collect();
    let mut kept: Vec<FeatureIndex> = Vec::new();
    for index in FeatureIndex::all() {
        let j = index.get();
        if degenerate[j] {
            continue;
        }
        let acceptable = kept
            .iter()
            .all(|k| pearson(&columns[j], &columns[k.get()]).abs() <= threshold);
        if acceptable {
            kept.push(index);
        }
    }
    let mask = FeatureMask { kept, threshold };
    for kind in ChannelKind::ALL {
        if mask.channel_columns(kind).is_empty() {
            return Err(Error::EmptyChannelMask {
                channel: kind.name(),
            });
        }
    }
    Ok(mask)
}
