//! Per-segment feature extraction and the session-by-emotion feature table.
//!
//! Each labeled segment yields nine statistics per channel, laid out in the
//! canonical 27-column order of [`FeatureIndex`](crate::model::FeatureIndex):
//! EMG block, BVP block, GSR block. A session contributes one row per
//! emotion; multiple segments of the same emotion are averaged.

use std::collections::BTreeMap;

use crate::dsp::strict_local_maxima;
use crate::error::{Error, Result};
use crate::model::{segments_of, ChannelKind, EmotionId, FeatureIndex, Session};

/// One channel's statistics in slot order (see `FEATURE_SLOT_NAMES`).
pub type FeatureVector = [f64; 9];

/// One session-emotion row across all three channels.
pub type FeatureRow = [f64; 27];

/// Number of strict interior local maxima; a plateau counts once.
pub fn count_peaks(x: &[f64]) -> usize {
    assert!(
        x.len() >= 3,
        "peak counting needs at least 3 samples, got {}",
        x.len()
    );
    strict_local_maxima(x).len()
}

/// Shannon entropy in nats of the histogram over `bins` equal-width bins
/// spanning [min, max]. A constant signal has zero entropy.
pub fn shannon_entropy(x: &[f64], bins: usize) -> f64 {
    assert!(
        !x.is_empty() && bins >= 1,
        "entropy needs samples and at least one bin"
    );
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let span = hi - lo;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let idx = (((v - lo) / span) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let n = x.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Variance below this is treated as zero when forming ratios.
pub(crate) const DEGENERATE_VARIANCE: f64 = 1e-24;

/// Mean, population variance, and Pearson kurtosis `m4 / m2^2`.
/// Kurtosis of a (near-)constant signal is defined as zero.
pub fn moments(x: &[f64]) -> (f64, f64, f64) {
    assert!(!x.is_empty(), "moments need at least one sample");
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    let kurtosis = if m2 < DEGENERATE_VARIANCE {
        0.0
    } else {
        m4 / (m2 * m2)
    };
    (mean, m2, kurtosis)
}

/// Mean square power and its AC part: `(sum(x^2)/n, max(0, power - mean^2))`.
/// The second value is the energy off the zero-frequency bin by Parseval.
pub fn powers(x: &[f64]) -> (f64, f64) {
    assert!(!x.is_empty(), "powers need at least one sample");
    let n = x.len() as f64;
    let signal = x.iter().map(|v| v * v).sum::<f64>() / n;
    let mean = x.iter().sum::<f64>() / n;
    let spectral = (signal - mean * mean).max(0.0);
    (signal, spectral)
}

/// All nine slot statistics for one channel segment.
pub fn extract_features(x: &[f64], entropy_bins: usize) -> FeatureVector {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let peaks = count_peaks(x) as f64;
    let (mean, variance, kurtosis) = moments(x);
    let entropy = shannon_entropy(x, entropy_bins);
    let (signal_power, spectral_power) = powers(x);
    [
        hi,
        lo,
        peaks,
        mean,
        variance,
        kurtosis,
        entropy,
        signal_power,
        spectral_power,
    ]
}

/// Feature rows keyed by `(session id, emotion)`, in deterministic order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    rows: BTreeMap<(String, EmotionId), FeatureRow>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, session_id: &str, emotion: EmotionId) -> Option<&FeatureRow> {
        self.rows.get(&(session_id.to_owned(), emotion))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, EmotionId, &FeatureRow)> {
        self.rows.iter().map(|((s, e), row)| (s.as_str(), *e, row))
    }

    /// Sorted unique session ids.
    pub fn session_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.rows.keys().map(|(s, _)| s.as_str()).collect();
        ids.dedup();
        ids
    }

    /// CSV rendering: `session,emotion,f00..f26` in canonical column order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("session,emotion");
        for idx in FeatureIndex::all() {
            out.push_str(&format!(",f{:02}", idx.get()));
        }
        out.push('\n');
        for (session, emotion, row) in self.rows() {
            out.push_str(session);
            out.push_str(&format!(",{emotion}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the feature table for a set of sessions.
///
/// Every session must contain all eight emotions in segments of at least ten
/// seconds; rows with non-finite features and duplicate session ids are
/// rejected.
pub fn build_feature_table(sessions: &[Session], entropy_bins: usize) -> Result<FeatureTable> {
    if entropy_bins == 0 {
        return Err(Error::Parameter {
            name: "entropy_bins",
            detail: "must be at least 1".into(),
        });
    }
    let mut rows = BTreeMap::new();
    for session in sessions {
        let segments = segments_of(session)?;
        for emotion in EmotionId::ALL {
            let mut row = [0.0f64; 27];
            let mut segment_count = 0.0;
            for segment in segments.iter().filter(|s| s.emotion == emotion) {
                segment_count += 1.0;
                for kind in ChannelKind::ALL {
                    let slice = &session.channel(kind)[segment.start..segment.end];
                    let features = extract_features(slice, entropy_bins);
                    for (slot, value) in features.iter().enumerate() {
                        row[FeatureIndex::PER_CHANNEL * kind.index() + slot] += value;
                    }
                }
            }
            for v in &mut row {
                *v /= segment_count;
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Ingestion {
                    session: session.session_id().to_owned(),
                    detail: format!(
                        "feature {} for emotion {emotion} is not finite",
                        FeatureIndex::new(pos)?
                    ),
                });
            }
            let key = (session.session_id().to_owned(), emotion);
            if rows.insert(key, row).is_some() {
                return Err(Error::Ingestion {
                    session: session.session_id().to_owned(),
                    detail: "duplicate session id in input set".into(),
                });
            }
        }
    }
    Ok(FeatureTable { rows })
}
