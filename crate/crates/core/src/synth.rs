//! Seeded synthetic session generator.
//!
//! Each generated day holds the eight emotions in a seeded-shuffled order,
//! separated (and book-ended) by five-second label-0 transitions. Channel
//! `c` during emotion `e` is an offset sinusoid in white Gaussian noise:
//!
//! ```text
//! x[n] = offset + A sin(2 pi f n / fs + phase) + sigma w[n]
//! ```
//!
//! Offset, amplitude, frequency, and noise level each deviate from a shared
//! baseline by `separation * step * rank(c, e)`, where the ranks are
//! per-channel bijections of the emotions (modular multipliers coprime to
//! 8), so every (channel, emotion) pair gets its own parameter triple and
//! `separation = 0` collapses all emotions onto one process.
//!
//! Randomness comes from ChaCha8 seeded with the config seed, stream
//! `day + 1`; per segment the phase is drawn first, then the noise samples,
//! channels in EMG, BVP, GSR order, segments in temporal order. Fixed seed
//! plus day index fully determine a session.

use std::f64::consts::TAU;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ChannelKind, EmotionId, Session};

/// Length of the label-0 gap before, between, and after segments.
pub const TRANSITION_SECONDS: f64 = 5.0;

const BASE_OFFSET: f64 = 0.0;
const BASE_AMPLITUDE: f64 = 0.35;
const BASE_FREQUENCY_HZ: f64 = 0.25;
const BASE_SIGMA: f64 = 0.18;

const OFFSET_STEP: f64 = 0.12;
const AMPLITUDE_STEP: f64 = 0.055;
const FREQUENCY_STEP_HZ: f64 = 0.07;
const SIGMA_STEP: f64 = 0.02;

/// Generation parameters; see the module docs for the signal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub days: usize,
    pub seed: u64,
    pub separation: f64,
    pub fs_hz: f64,
    pub segment_seconds: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            days: 20,
            seed: 0,
            separation: 1.0,
            fs_hz: 20.0,
            segment_seconds: 180.0,
        }
    }
}

fn rank(emotion: EmotionId, channel: ChannelKind, multiplier: usize, channel_step: usize) -> f64 {
    ((multiplier * emotion.index() + channel_step * channel.index()) % 8) as f64
}

/// Baseline shift of the emotion's waveform on one channel.
pub fn carrier_offset(channel: ChannelKind, emotion: EmotionId, separation: f64) -> f64 {
    BASE_OFFSET + separation * OFFSET_STEP * rank(emotion, channel, 1, 6)
}

/// Sinusoid amplitude of the emotion's waveform on one channel.
pub fn carrier_amplitude(channel: ChannelKind, emotion: EmotionId, separation: f64) -> f64 {
    BASE_AMPLITUDE + separation * AMPLITUDE_STEP * rank(emotion, channel, 5, 3)
}

/// Sinusoid frequency in Hz; distinct per emotion within each channel.
pub fn carrier_frequency_hz(channel: ChannelKind, emotion: EmotionId, separation: f64) -> f64 {
    BASE_FREQUENCY_HZ + separation * FREQUENCY_STEP_HZ * rank(emotion, channel, 3, 2)
}

/// White-noise standard deviation of the emotion's waveform on one channel.
pub fn noise_sigma(channel: ChannelKind, emotion: EmotionId, separation: f64) -> f64 {
    BASE_SIGMA + separation * SIGMA_STEP * rank(emotion, channel, 7, 1)
}

struct BlockParams {
    offset: f64,
    amplitude: f64,
    frequency_hz: f64,
    sigma: f64,
}

fn block_params(channel: ChannelKind, emotion: Option<EmotionId>, separation: f64) -> BlockParams {
    match emotion {
        Some(e) => BlockParams {
            offset: carrier_offset(channel, e, separation),
            amplitude: carrier_amplitude(channel, e, separation),
            frequency_hz: carrier_frequency_hz(channel, e, separation),
            sigma: noise_sigma(channel, e, separation),
        },
        // Transitions run the baseline process.
        None => BlockParams {
            offset: BASE_OFFSET,
            amplitude: BASE_AMPLITUDE,
            frequency_hz: BASE_FREQUENCY_HZ,
            sigma: BASE_SIGMA,
        },
    }
}

/// Generates `config.days` sessions named `day01`, `day02`, ...
pub fn generate(config: &SynthConfig) -> Result<Vec<Session>> {
    if config.days < 2 {
        return Err(Error::Parameter {
            name: "days",
            detail: format!("need at least 2 for cross-validation, got {}", config.days),
        });
    }
    if !(config.fs_hz.is_finite() && config.fs_hz > 0.0) {
        return Err(Error::Parameter {
            name: "fs_hz",
            detail: format!("must be positive, got {}", config.fs_hz),
        });
    }
    if !(config.segment_seconds.is_finite() && config.segment_seconds >= 10.0) {
        return Err(Error::Parameter {
            name: "segment_seconds",
            detail: format!("must be at least 10, got {}", config.segment_seconds),
        });
    }
    if !(config.separation.is_finite() && config.separation >= 0.0) {
        return Err(Error::Parameter {
            name: "separation",
            detail: format!("must be nonnegative, got {}", config.separation),
        });
    }
    (0..config.days)
        .map(|day| generate_day(config, day))
        .collect()
}

fn generate_day(config: &SynthConfig, day: usize) -> Result<Session> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(day as u64 + 1);

    let mut order = EmotionId::ALL;
    order.shuffle(&mut rng);

    let segment_len = (config.segment_seconds * config.fs_hz).round() as usize;
    let transition_len = (TRANSITION_SECONDS * config.fs_hz).round() as usize;
    let total = transition_len + 8 * (segment_len + transition_len);

    let mut channels: [Vec<f64>; 3] = Default::default();
    for ch in &mut channels {
        ch.reserve(total);
    }
    let mut labels = Vec::with_capacity(total);

    let emit_block = |rng: &mut ChaCha8Rng,
                      channels: &mut [Vec<f64>; 3],
                      labels: &mut Vec<u8>,
                      emotion: Option<EmotionId>,
                      len: usize| {
        for kind in ChannelKind::ALL {
            let p = block_params(kind, emotion, config.separation);
            let phase = rng.random_range(0.0..TAU);
            let ch = &mut channels[kind.index()];
            for n in 0..len {
                let angle = TAU * p.frequency_hz * n as f64 / config.fs_hz + phase;
                let noise: f64 = rng.sample(StandardNormal);
                ch.push(p.offset + p.amplitude * angle.sin() + p.sigma * noise);
            }
        }
        let label = emotion.map_or(0, EmotionId::get);
        labels.extend(std::iter::repeat_n(label, len));
    };

    emit_block(&mut rng, &mut channels, &mut labels, None, transition_len);
    for emotion in order {
        emit_block(
            &mut rng,
            &mut channels,
            &mut labels,
            Some(emotion),
            segment_len,
        );
        emit_block(&mut rng, &mut channels, &mut labels, None, transition_len);
    }

    Session::new(format!("day{:02}", day + 1), config.fs_hz, channels, labels)
}
