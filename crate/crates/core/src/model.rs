//! Core data model: channels, emotion labels, sessions, and feature indexing.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// The three recorded physiological modalities, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ChannelKind {
    Emg,
    Bvp,
    Gsr,
}

impl ChannelKind {
    pub const COUNT: usize = 3;
    pub const ALL: [ChannelKind; 3] = [ChannelKind::Emg, ChannelKind::Bvp, ChannelKind::Gsr];

    /// Position of this channel in sample rows and feature blocks.
    pub fn index(self) -> usize {
        match self {
            ChannelKind::Emg => 0,
            ChannelKind::Bvp => 1,
            ChannelKind::Gsr => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Emg => "EMG",
            ChannelKind::Bvp => "BVP",
            ChannelKind::Gsr => "GSR",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the eight target emotional states, numbered 1 through 8.
///
/// 1 = no-emotion, 2 = anger, 3 = hate, 4 = grief, 5 = platonic love,
/// 6 = romantic love, 7 = joy, 8 = reverence. Label 0 in raw recordings
/// marks unlabeled transition samples and is not a valid `EmotionId`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EmotionId(u8);

impl EmotionId {
    pub const COUNT: usize = 8;
    pub const ALL: [EmotionId; 8] = [
        EmotionId(1),
        EmotionId(2),
        EmotionId(3),
        EmotionId(4),
        EmotionId(5),
        EmotionId(6),
        EmotionId(7),
        EmotionId(8),
    ];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=8).contains(&id) {
            Ok(EmotionId(id))
        } else {
            Err(Error::Parameter {
                name: "emotion_id",
                detail: format!("must be in 1..=8, got {id}"),
            })
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position used for array indexing and tie-breaking.
    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }

    /// Inverse of [`EmotionId::index`]. Panics if `index >= 8`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "emotion index out of range: {index}");
        EmotionId(index as u8 + 1)
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "no-emotion",
            2 => "anger",
            3 => "hate",
            4 => "grief",
            5 => "platonic-love",
            6 => "romantic-love",
            7 => "joy",
            _ => "reverence",
        }
    }
}

impl fmt::Display for EmotionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for EmotionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = u8::deserialize(deserializer)?;
        EmotionId::new(raw).map_err(serde::de::Error::custom)
    }
}

/// One recording day: three equally long sample streams plus a per-sample label.
///
/// Labels are 0 (transition) or 1..=8; all samples are finite. These
/// invariants are checked on construction and hold for the lifetime of the
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    session_id: String,
    fs_hz: f64,
    channels: [Vec<f64>; 3],
    labels: Vec<u8>,
}

impl Session {
    pub fn new(
        session_id: impl Into<String>,
        fs_hz: f64,
        channels: [Vec<f64>; 3],
        labels: Vec<u8>,
    ) -> Result<Self> {
        let session_id = session_id.into();
        let ingestion = |detail: String| Error::Ingestion {
            session: session_id.clone(),
            detail,
        };
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(ingestion(format!(
                "sampling rate must be positive, got {fs_hz}"
            )));
        }
        let n = labels.len();
        if n < 2 {
            return Err(ingestion(format!("need at least 2 samples, got {n}")));
        }
        for kind in ChannelKind::ALL {
            let ch = &channels[kind.index()];
            if ch.len() != n {
                return Err(ingestion(format!(
                    "{} has {} samples but labels has {}",
                    kind,
                    ch.len(),
                    n
                )));
            }
            if let Some(pos) = ch.iter().position(|v| !v.is_finite()) {
                return Err(ingestion(format!("{kind} sample {pos} is not finite")));
            }
        }
        if let Some(pos) = labels.iter().position(|&l| l > 8) {
            return Err(ingestion(format!(
                "label {} at sample {pos} is outside 0..=8",
                labels[pos]
            )));
        }
        Ok(Session {
            session_id,
            fs_hz,
            channels,
            labels,
        })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn channel(&self, kind: ChannelKind) -> &[f64] {
        &self.channels[kind.index()]
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Same identity and labels, new sample streams. Used after filtering.
    pub fn with_channels(&self, channels: [Vec<f64>; 3]) -> Result<Session> {
        Session::new(
            self.session_id.clone(),
            self.fs_hz,
            channels,
            self.labels.clone(),
        )
    }
}

/// A maximal run of one nonzero label: samples `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub emotion: EmotionId,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits a session into labeled segments by run-length scanning the labels.
///
/// Transition samples (label 0) separate segments and belong to none. Every
/// segment must span at least ten seconds and every emotion must occur at
/// least once, otherwise the session is rejected.
pub fn segments_of(session: &Session) -> Result<Vec<Segment>> {
    let ingestion = |detail: String| Error::Ingestion {
        session: session.session_id().to_owned(),
        detail,
    };
    let labels = session.labels();
    let min_len = session.fs_hz() * 10.0;
    let mut segments = Vec::new();
    let mut start = 0;
    while start < labels.len() {
        let label = labels[start];
        let mut end = start + 1;
        while end < labels.len() && labels[end] == label {
            end += 1;
        }
        if label != 0 {
            if ((end - start) as f64) < min_len {
                return Err(ingestion(format!(
                    "segment with label {label} at sample {start} has {} samples, need at least {}",
                    end - start,
                    min_len.ceil() as usize
                )));
            }
            segments.push(Segment {
                emotion: EmotionId::new(label)?,
                start,
                end,
            });
        }
        start = end;
    }
    if segments.is_empty() {
        return Err(ingestion("no labeled segments".to_owned()));
    }
    let mut missing = Vec::new();
    for emotion in EmotionId::ALL {
        if !segments.iter().any(|s| s.emotion == emotion) {
            missing.push(emotion.to_string());
        }
    }
    if !missing.is_empty() {
        return Err(ingestion(format!(
            "missing segments for emotions [{}]",
            missing.join(", ")
        )));
    }
    Ok(segments)
}

/// Index into the 27-column feature layout: `9 * channel + slot`.
///
/// Slots follow [`FEATURE_SLOT_NAMES`]: EMG occupies columns 0..9,
/// BVP 9..18, GSR 18..27.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FeatureIndex(u8);

/// Per-channel feature slots in extraction order.
pub const FEATURE_SLOT_NAMES: [&str; 9] = [
    "max",
    "min",
    "peak_count",
    "mean",
    "variance",
    "kurtosis",
    "entropy",
    "signal_power",
    "spectral_power",
];

impl FeatureIndex {
    pub const COUNT: usize = 27;
    pub const PER_CHANNEL: usize = 9;

    pub fn new(index: usize) -> Result<Self> {
        if index < Self::COUNT {
            Ok(FeatureIndex(index as u8))
        } else {
            Err(Error::Parameter {
                name: "feature_index",
                detail: format!("must be below {}, got {index}", Self::COUNT),
            })
        }
    }

    pub fn from_parts(channel: ChannelKind, slot: usize) -> Result<Self> {
        if slot >= Self::PER_CHANNEL {
            return Err(Error::Parameter {
                name: "feature_slot",
                detail: format!("must be below {}, got {slot}", Self::PER_CHANNEL),
            });
        }
        Ok(FeatureIndex(
            (Self::PER_CHANNEL * channel.index() + slot) as u8,
        ))
    }

    pub fn get(self) -> usize {
        usize::from(self.0)
    }

    pub fn channel(self) -> ChannelKind {
        ChannelKind::ALL[usize::from(self.0) / Self::PER_CHANNEL]
    }

    pub fn slot(self) -> usize {
        usize::from(self.0) % Self::PER_CHANNEL
    }

    pub fn slot_name(self) -> &'static str {
        FEATURE_SLOT_NAMES[self.slot()]
    }

    pub fn all() -> impl Iterator<Item = FeatureIndex> {
        (0..Self::COUNT as u8).map(FeatureIndex)
    }
}

impl fmt::Display for FeatureIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_{}",
            self.channel().name().to_ascii_lowercase(),
            self.slot_name()
        )
    }
}
