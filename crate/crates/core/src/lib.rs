//! Decoding of eight emotional states from three physiological channels
//! (EMG, BVP, GSR).
//!
//! The pipeline: per-channel conditioning ([`dsp`]), nine statistics per
//! channel per labeled segment ([`features`]), optional correlation-threshold
//! pruning ([`selection`]), one LDA weak learner per modality ([`lda`]),
//! softmax weight fusion across modalities ([`fusion`]), and
//! leave-one-session-out evaluation ([`eval`]). [`synth`] generates seeded
//! synthetic sessions for testing, and [`io`] reads and writes the session
//! CSV and manifest formats.

pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod io;
pub mod lda;
pub mod model;
pub mod selection;
pub mod synth;

pub use dsp::{
    design_lowpass_butterworth, envelope_mean, minmax_scale, preprocess, zero_phase_filter,
    Cutoffs, FilterCoefficients, LowpassDesign,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate_manifest, fit_fold_models, metrics, predict_row, run_loocv, EvalConfig, EvalReport,
    FoldModels, FoldResult, Metrics, Prediction,
};
pub use features::{
    build_feature_table, count_peaks, extract_features, moments, powers, shannon_entropy,
    FeatureRow, FeatureTable, FeatureVector,
};
pub use fusion::{fuse, FusedDecision, LikelihoodWeightMatrix};
pub use io::{
    load_sessions, read_manifest, read_session_csv, session_csv_string, write_manifest,
    write_session_csv, Manifest,
};
pub use lda::{fit_lda, weight_vector, LdaModel, DEFAULT_RIDGE, DEFAULT_SHRINKAGE};
pub use model::{
    segments_of, ChannelKind, EmotionId, FeatureIndex, Segment, Session, FEATURE_SLOT_NAMES,
};
pub use selection::{pearson, prune_correlated, FeatureMask};
pub use synth::{
    carrier_amplitude, carrier_frequency_hz, carrier_offset, generate, noise_sigma, SynthConfig,
    TRANSITION_SECONDS,
};
