//! Leave-one-session-out cross-validation and the metric suite.
//!
//! Sessions are preprocessed independently and reduced to one feature row
//! per (session, emotion). Each fold holds one session out, optionally
//! prunes correlated features on the training rows only, fits one LDA per
//! modality on the surviving columns, and fuses the three weight vectors
//! for each of the held-out session's eight rows. Confusion counts are
//! aggregated as integers before any division, so fold order and
//! parallelism cannot change the report.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dsp::{preprocess, Cutoffs};
use crate::error::{Error, Result};
use crate::features::{build_feature_table, FeatureRow, FeatureTable};
use crate::fusion::{fuse, FusedDecision, LikelihoodWeightMatrix};
use crate::io::load_sessions;
use crate::lda::{fit_lda, weight_vector, LdaModel, DEFAULT_RIDGE, DEFAULT_SHRINKAGE};
use crate::model::{ChannelKind, EmotionId, Session};
use crate::selection::{prune_correlated, FeatureMask};

/// Full pipeline configuration, echoed verbatim into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    /// Manifest path when the data came from disk; informational only.
    pub manifest: Option<String>,
    pub prune: bool,
    pub threshold: f64,
    pub entropy_bins: usize,
    pub cutoffs: Cutoffs,
    pub shrinkage: f64,
    pub ridge: f64,
    pub parallel: bool,
    /// Generator seed when known; informational only.
    pub seed: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            manifest: None,
            prune: false,
            threshold: 0.8,
            entropy_bins: 16,
            cutoffs: Cutoffs::default(),
            shrinkage: DEFAULT_SHRINKAGE,
            ridge: DEFAULT_RIDGE,
            parallel: false,
            seed: None,
        }
    }
}

/// One held-out test row: the truth, the per-modality weight matrix, and
/// the fused decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub truth: EmotionId,
    pub matrix: LikelihoodWeightMatrix,
    pub decision: FusedDecision,
}

/// Result of one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub held_out_session: String,
    pub kept_features: Vec<usize>,
    pub accuracy: f64,
    pub predictions: Vec<Prediction>,
}

/// The metric suite over a set of (truth, predicted) pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub tpr: [f64; 8],
    pub fpr: [f64; 8],
    pub mscr: [[f64; 8]; 8],
    pub confusion: [[u64; 8]; 8],
}

/// Complete evaluation output; serializes deterministically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub folds: Vec<FoldResult>,
    pub confusion: [[u64; 8]; 8],
    pub accuracy: f64,
    pub tpr: [f64; 8],
    pub fpr: [f64; 8],
    pub mscr: [[f64; 8]; 8],
}

impl EvalReport {
    /// Pretty JSON with a trailing newline; byte-identical for equal reports.
    pub fn to_json(&self) -> Result<String> {
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        Ok(body)
    }
}

/// The pieces trained for one fold: the feature mask and one model per
/// modality, in channel order.
#[derive(Debug, Clone, Serialize)]
pub struct FoldModels {
    pub mask: FeatureMask,
    pub models: [LdaModel; 3],
}

/// Fits the mask and per-modality models on the rows of every session
/// except `held_out` (pass `None` to train on everything).
pub fn fit_fold_models(
    table: &FeatureTable,
    held_out: Option<&str>,
    config: &EvalConfig,
) -> Result<FoldModels> {
    let training: Vec<&FeatureRow> = table
        .rows()
        .filter(|(session, _, _)| Some(*session) != held_out)
        .map(|(_, _, row)| row)
        .collect();
    let mask = if config.prune {
        prune_correlated(&training, config.threshold)?
    } else {
        FeatureMask::full()
    };
    let mut models = Vec::with_capacity(3);
    for kind in ChannelKind::ALL {
        let columns = mask.channel_columns(kind);
        let classes: Vec<Vec<Vec<f64>>> = EmotionId::ALL
            .iter()
            .map(|&emotion| {
                table
                    .rows()
                    .filter(|(session, e, _)| Some(*session) != held_out && *e == emotion)
                    .map(|(_, _, row)| columns.iter().map(|&j| row[j]).collect())
                    .collect()
            })
            .collect();
        models.push(fit_lda(&classes, config.shrinkage, config.ridge)?);
    }
    let models: [LdaModel; 3] = models.try_into().expect("three channels");
    Ok(FoldModels { mask, models })
}

/// Scores one feature row through the three modality models and fuses.
pub fn predict_row(
    fold: &FoldModels,
    row: &FeatureRow,
) -> Result<(LikelihoodWeightMatrix, FusedDecision)> {
    let mut rows = [[0.0f64; 8]; 3];
    for kind in ChannelKind::ALL {
        let x: Vec<f64> = fold
            .mask
            .channel_columns(kind)
            .iter()
            .map(|&j| row[j])
            .collect();
        let scores = fold.models[kind.index()].discriminants(&x)?;
        let weights = weight_vector(&scores);
        rows[kind.index()].copy_from_slice(&weights);
    }
    let matrix = LikelihoodWeightMatrix::new(rows);
    let decision = fuse(&matrix)?;
    Ok((matrix, decision))
}

/// Runs leave-one-session-out cross-validation over in-memory sessions.
pub fn run_loocv(sessions: &[Session], config: &EvalConfig) -> Result<EvalReport> {
    if sessions.len() < 2 {
        return Err(Error::Parameter {
            name: "sessions",
            detail: format!("need at least 2 sessions, got {}", sessions.len()),
        });
    }
    let processed: Vec<Session> = if config.parallel {
        sessions
            .par_iter()
            .map(|s| preprocess(s, &config.cutoffs))
            .collect::<Result<_>>()?
    } else {
        sessions
            .iter()
            .map(|s| preprocess(s, &config.cutoffs))
            .collect::<Result<_>>()?
    };
    let table = build_feature_table(&processed, config.entropy_bins)?;

    let run_fold = |session: &Session| -> Result<FoldResult> {
        let held_out = session.session_id();
        let fold = fit_fold_models(&table, Some(held_out), config)?;
        let mut predictions = Vec::with_capacity(8);
        let mut correct = 0usize;
        for emotion in EmotionId::ALL {
            let row = table.get(held_out, emotion).ok_or_else(|| {
                Error::Contract(format!("missing feature row for {held_out}/{emotion}"))
            })?;
            let (matrix, decision) = predict_row(&fold, row)?;
            if decision.predicted == emotion {
                correct += 1;
            }
            predictions.push(Prediction {
                truth: emotion,
                matrix,
                decision,
            });
        }
        Ok(FoldResult {
            held_out_session: held_out.to_owned(),
            kept_features: fold.mask.kept_columns(),
            accuracy: correct as f64 / 8.0,
            predictions,
        })
    };
    let folds: Vec<FoldResult> = if config.parallel {
        processed.par_iter().map(run_fold).collect::<Result<_>>()?
    } else {
        processed.iter().map(run_fold).collect::<Result<_>>()?
    };

    let pairs: Vec<(EmotionId, EmotionId)> = folds
        .iter()
        .flat_map(|fold| {
            fold.predictions
                .iter()
                .map(|p| (p.truth, p.decision.predicted))
        })
        .collect();
    let m = metrics(&pairs)?;
    Ok(EvalReport {
        config: config.clone(),
        folds,
        confusion: m.confusion,
        accuracy: m.accuracy,
        tpr: m.tpr,
        fpr: m.fpr,
        mscr: m.mscr,
    })
}

/// Loads a manifest and evaluates it, recording the path in the config echo.
pub fn evaluate_manifest(manifest_path: &Path, config: &EvalConfig) -> Result<EvalReport> {
    let (_, sessions) = load_sessions(manifest_path)?;
    let mut config = config.clone();
    config.manifest = Some(manifest_path.display().to_string());
    run_loocv(&sessions, &config)
}

/// Accuracy, one-vs-rest TPR/FPR, and the misclassification matrix.
///
/// `mscr[e][j]` is the fraction of truth-`e` instances predicted as `j`
/// (`j != e`; the diagonal is zero). Every emotion must appear as truth.
pub fn metrics(pairs: &[(EmotionId, EmotionId)]) -> Result<Metrics> {
    if pairs.is_empty() {
        return Err(Error::Parameter {
            name: "predictions",
            detail: "need at least one prediction".into(),
        });
    }
    let mut confusion = [[0u64; 8]; 8];
    for (truth, predicted) in pairs {
        confusion[truth.index()][predicted.index()] += 1;
    }
    for emotion in EmotionId::ALL {
        if confusion[emotion.index()].iter().sum::<u64>() == 0 {
            return Err(Error::Contract(format!(
                "emotion {emotion} never appears as truth"
            )));
        }
    }
    Ok(metrics_from_confusion(confusion))
}

fn metrics_from_confusion(confusion: [[u64; 8]; 8]) -> Metrics {
    let total: u64 = confusion.iter().flatten().sum();
    let diag: u64 = (0..8).map(|e| confusion[e][e]).sum();
    let mut tpr = [0.0f64; 8];
    let mut fpr = [0.0f64; 8];
    let mut mscr = [[0.0f64; 8]; 8];
    for e in 0..8 {
        let truths: u64 = confusion[e].iter().sum();
        let predicted_e: u64 = (0..8).map(|t| confusion[t][e]).sum();
        tpr[e] = confusion[e][e] as f64 / truths as f64;
        fpr[e] = (predicted_e - confusion[e][e]) as f64 / (total - truths) as f64;
        for j in 0..8 {
            if j != e {
                mscr[e][j] = confusion[e][j] as f64 / truths as f64;
            }
        }
    }
    Metrics {
        accuracy: diag as f64 / total as f64,
        tpr,
        fpr,
        mscr,
        confusion,
    }
}
