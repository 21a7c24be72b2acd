//! Session CSV and dataset manifest serialization.
//!
//! A session file is `t,emg,bvp,gsr,label` with one row per sample. Floats
//! are written with Rust's shortest round-trip formatting, so write followed
//! by read reproduces the samples bit for bit. A manifest is a JSON file
//! listing the sampling rate and the session files relative to its own
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{segments_of, ChannelKind, Session};

pub const SESSION_CSV_HEADER: &str = "t,emg,bvp,gsr,label";

/// Dataset index: sampling rate plus session file names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub fs_hz: f64,
    pub sessions: Vec<String>,
}

/// Renders a session to CSV bytes. Deterministic: equal sessions yield
/// equal strings.
pub fn session_csv_string(session: &Session) -> String {
    let n = session.len();
    let mut out = String::with_capacity(n * 32);
    out.push_str(SESSION_CSV_HEADER);
    out.push('\n');
    let emg = session.channel(ChannelKind::Emg);
    let bvp = session.channel(ChannelKind::Bvp);
    let gsr = session.channel(ChannelKind::Gsr);
    let labels = session.labels();
    for i in 0..n {
        let t = i as f64 / session.fs_hz();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t, emg[i], bvp[i], gsr[i], labels[i]
        ));
    }
    out
}

pub fn write_session_csv(session: &Session, path: &Path) -> Result<()> {
    fs::write(path, session_csv_string(session))?;
    Ok(())
}

/// Parses a session CSV written by [`write_session_csv`] (or compatible).
///
/// The time column must advance by `1 / fs_hz` from zero; every sample must
/// be finite and every label in 0..=8. Errors name the file and the 1-based
/// line number.
pub fn read_session_csv(path: &Path, fs_hz: f64, session_id: &str) -> Result<Session> {
    let text = fs::read_to_string(path).map_err(|e| Error::Csv {
        path: path.to_owned(),
        row: 0,
        detail: e.to_string(),
    })?;
    let csv_err = |row: usize, detail: String| Error::Csv {
        path: path.to_owned(),
        row,
        detail,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == SESSION_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(csv_err(
                1,
                format!("expected header `{SESSION_CSV_HEADER}`, got `{header}`"),
            ))
        }
        None => return Err(csv_err(1, "empty file".to_owned())),
    }
    let mut channels: [Vec<f64>; 3] = Default::default();
    let mut labels = Vec::new();
    for (line_idx, line) in lines {
        let row = line_idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(csv_err(
                row,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let parse = |name: &str, text: &str| -> Result<f64> {
            let value: f64 = text
                .parse()
                .map_err(|_| csv_err(row, format!("{name}: not a number: `{text}`")))?;
            if !value.is_finite() {
                return Err(csv_err(row, format!("{name}: not finite: `{text}`")));
            }
            Ok(value)
        };
        let t = parse("t", fields[0])?;
        let expected_t = labels.len() as f64 / fs_hz;
        if (t - expected_t).abs() > 1e-6 {
            return Err(csv_err(
                row,
                format!("t = {t}, expected {expected_t} at rate {fs_hz} Hz"),
            ));
        }
        for (kind, field) in ChannelKind::ALL.into_iter().zip(&fields[1..4]) {
            channels[kind.index()].push(parse(kind.name(), field)?);
        }
        let label: u8 = fields[4]
            .parse()
            .map_err(|_| csv_err(row, format!("label: not an integer: `{}`", fields[4])))?;
        if label > 8 {
            return Err(csv_err(row, format!("label {label} is outside 0..=8")));
        }
        labels.push(label);
    }
    Session::new(session_id, fs_hz, channels, labels)
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let mut body = serde_json::to_string_pretty(manifest)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let manifest_err = |detail: String| Error::Manifest {
        path: path.to_owned(),
        detail,
    };
    let text = fs::read_to_string(path).map_err(|e| manifest_err(e.to_string()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| manifest_err(e.to_string()))?;
    if !(manifest.fs_hz.is_finite() && manifest.fs_hz > 0.0) {
        return Err(manifest_err(format!(
            "fs_hz must be positive, got {}",
            manifest.fs_hz
        )));
    }
    if manifest.sessions.len() < 2 {
        return Err(manifest_err(format!(
            "need at least 2 sessions for cross-validation, got {}",
            manifest.sessions.len()
        )));
    }
    Ok(manifest)
}

/// Loads every session named by the manifest, resolving paths relative to
/// the manifest's directory. Each session is structurally validated,
/// including segment layout.
pub fn load_sessions(manifest_path: &Path) -> Result<(Manifest, Vec<Session>)> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut sessions = Vec::with_capacity(manifest.sessions.len());
    let mut seen = std::collections::BTreeSet::new();
    for name in &manifest.sessions {
        let csv_path: PathBuf = base.join(name);
        let session_id = csv_path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Manifest {
                path: manifest_path.to_owned(),
                detail: format!("cannot derive a session id from `{name}`"),
            })?
            .to_owned();
        if !seen.insert(session_id.clone()) {
            return Err(Error::Manifest {
                path: manifest_path.to_owned(),
                detail: format!("duplicate session id `{session_id}`"),
            });
        }
        let session = read_session_csv(&csv_path, manifest.fs_hz, &session_id)?;
        segments_of(&session)?;
        sessions.push(session);
    }
    Ok((manifest, sessions))
}
