//! Signal conditioning: Butterworth lowpass design, zero-phase filtering,
//! envelope smoothing, and per-channel normalization.
//!
//! The conditioning chain for a session is, per channel: order-1 Butterworth
//! lowpass applied forward and backward (so the effective order doubles and
//! phase cancels), an upper/lower envelope mean for the EMG and GSR channels,
//! then min-max scaling to the unit interval. Cutoffs at or above Nyquist are
//! clamped to 95% of Nyquist with a warning rather than rejected.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelKind, Session};

/// Digital IIR transfer function in z^-1, normalized so `a[0] == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl FilterCoefficients {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let bad = |detail: String| Error::Parameter {
            name: "coefficients",
            detail,
        };
        if b.is_empty() || a.is_empty() {
            return Err(bad("numerator and denominator must be nonempty".into()));
        }
        if b.iter().chain(a.iter()).any(|c| !c.is_finite()) {
            return Err(bad("coefficients must be finite".into()));
        }
        if a[0] == 0.0 {
            return Err(bad("leading denominator coefficient must be nonzero".into()));
        }
        let a0 = a[0];
        Ok(FilterCoefficients {
            b: b.into_iter().map(|c| c / a0).collect(),
            a: a.into_iter().map(|c| c / a0).collect(),
        })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Gain at zero frequency: `sum(b) / sum(a)`.
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// Result of a lowpass design, including how the cutoff was adjusted.
#[derive(Debug, Clone)]
pub struct LowpassDesign {
    pub coefficients: FilterCoefficients,
    pub requested_cutoff_hz: f64,
    pub effective_cutoff_hz: f64,
    pub clamped: bool,
}

/// Designs a digital Butterworth lowpass via the bilinear transform with
/// frequency prewarping. A cutoff at or above Nyquist is clamped to
/// `0.95 * fs_hz / 2` and reported through [`LowpassDesign::clamped`].
pub fn design_lowpass_butterworth(
    order: usize,
    cutoff_hz: f64,
    fs_hz: f64,
) -> Result<LowpassDesign> {
    if order == 0 {
        return Err(Error::Parameter {
            name: "order",
            detail: "must be at least 1".into(),
        });
    }
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::Parameter {
            name: "fs_hz",
            detail: format!("must be positive, got {fs_hz}"),
        });
    }
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0) {
        return Err(Error::Parameter {
            name: "cutoff_hz",
            detail: format!("must be positive, got {cutoff_hz}"),
        });
    }
    let nyquist = fs_hz / 2.0;
    let clamped = cutoff_hz >= nyquist;
    let effective = if clamped { 0.95 * nyquist } else { cutoff_hz };

    // Analog prototype poles on the warped-frequency circle, then the
    // bilinear map s -> 2 fs (1 - z^-1) / (1 + z^-1).
    let warped = 2.0 * fs_hz * (PI * effective / fs_hz).tan();
    let k = 2.0 * fs_hz;
    let mut denominator = vec![Complex64::new(1.0, 0.0)];
    let mut scale = Complex64::new(1.0, 0.0);
    for m in 0..order {
        let theta = PI * (2 * m + order + 1) as f64 / (2 * order) as f64;
        let pole = Complex64::from_polar(warped, theta);
        let digital_pole = (Complex64::new(k, 0.0) + pole) / (Complex64::new(k, 0.0) - pole);
        denominator = poly_mul_monic_root(&denominator, digital_pole);
        scale *= Complex64::new(k, 0.0) - pole;
    }
    let gain = Complex64::new(warped.powi(order as i32), 0.0) / scale;
    let b: Vec<f64> = binomial_row(order).iter().map(|&c| gain.re * c).collect();
    let a: Vec<f64> = denominator.iter().map(|c| c.re).collect();
    let max_im = denominator
        .iter()
        .map(|c| c.im.abs())
        .fold(gain.im.abs(), f64::max);
    if max_im > 1e-9 {
        return Err(Error::Contract(format!(
            "butterworth design left residual imaginary parts ({max_im:e})"
        )));
    }
    Ok(LowpassDesign {
        coefficients: FilterCoefficients::new(b, a)?,
        requested_cutoff_hz: cutoff_hz,
        effective_cutoff_hz: effective,
        clamped,
    })
}

/// Multiplies a polynomial in z^-1 by the monic factor (1 - root z^-1).
fn poly_mul_monic_root(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += c;
        out[i + 1] -= c * root;
    }
    out
}

/// Row `n` of Pascal's triangle: coefficients of (1 + z^-1)^n.
fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Direct-form II transposed difference equation with caller-owned state
/// `z` of length `b.len() - 1`; `b` and `a` must be equal length, `a[0] == 1`.
fn lfilter(b: &[f64], a: &[f64], x: &[f64], z: &mut [f64]) -> Vec<f64> {
    let order = b.len() - 1;
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(z.len(), order);
    let mut y = Vec::with_capacity(x.len());
    for &xn in x {
        let yn = b[0] * xn + if order > 0 { z[0] } else { 0.0 };
        for j in 0..order {
            let carry = if j + 1 < order { z[j + 1] } else { 0.0 };
            z[j] = b[j + 1] * xn + carry - a[j + 1] * yn;
        }
        y.push(yn);
    }
    y
}

/// State that makes `lfilter` already settled on a unit step input, so a
/// constant signal passes through a unity-DC-gain filter unchanged. Scaled
/// by the first sample before each pass.
fn steady_state_step_state(b: &[f64], a: &[f64]) -> Vec<f64> {
    let order = b.len() - 1;
    if order == 0 {
        return Vec::new();
    }
    let y_ss = b.iter().sum::<f64>() / a.iter().sum::<f64>();
    let mut z = vec![0.0; order];
    z[order - 1] = b[order] - a[order] * y_ss;
    for j in (0..order - 1).rev() {
        z[j] = z[j + 1] + b[j + 1] - a[j + 1] * y_ss;
    }
    z
}

/// Applies a filter forward and backward so the net phase response is zero.
///
/// The signal is extended on both ends by an odd (point-reflected) pad of
/// `3 * (filter length - 1)` samples, each pass starts from the settled
/// step-response state scaled by its first sample, and the pad is trimmed
/// from the result. The output has the input's length.
pub fn zero_phase_filter(coefficients: &FilterCoefficients, x: &[f64]) -> Result<Vec<f64>> {
    let nfilt = coefficients.b.len().max(coefficients.a.len());
    let pad = 3 * (nfilt - 1);
    if x.len() <= 3 * nfilt {
        return Err(Error::Parameter {
            name: "signal",
            detail: format!(
                "need more than {} samples for a filter of length {nfilt}, got {}",
                3 * nfilt,
                x.len()
            ),
        });
    }
    let mut b = coefficients.b.clone();
    let mut a = coefficients.a.clone();
    b.resize(nfilt, 0.0);
    a.resize(nfilt, 0.0);

    // Odd extension: reflect through the endpoint values.
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    let zi = steady_state_step_state(&b, &a);
    let scale_state = |z: &mut [f64], first: f64| {
        for (slot, unit) in z.iter_mut().zip(&zi) {
            *slot = unit * first;
        }
    };

    let mut state = zi.clone();
    scale_state(&mut state, ext[0]);
    let mut y = lfilter(&b, &a, &ext, &mut state);
    y.reverse();
    scale_state(&mut state, y[0]);
    let mut y = lfilter(&b, &a, &y, &mut state);
    y.reverse();

    let out: Vec<f64> = y[pad..pad + n].to_vec();
    if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Contract(format!(
            "zero-phase filter produced a non-finite sample at index {pos}"
        )));
    }
    Ok(out)
}

/// Strict interior local maxima; a plateau counts once, anchored at its
/// first sample. Endpoints are never extrema.
pub(crate) fn strict_local_maxima(x: &[f64]) -> Vec<usize> {
    plateau_extrema(x, true)
}

pub(crate) fn strict_local_minima(x: &[f64]) -> Vec<usize> {
    plateau_extrema(x, false)
}

fn plateau_extrema(x: &[f64], maxima: bool) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let here = x[i];
        let entering = if maxima {
            here > x[i - 1]
        } else {
            here < x[i - 1]
        };
        if entering {
            let mut j = i;
            while j + 1 < n && x[j + 1] == here {
                j += 1;
            }
            if j + 1 < n {
                let after = x[j + 1];
                let leaving = if maxima { after < here } else { after > here };
                if leaving {
                    out.push(i);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Mean of the upper and lower envelopes.
///
/// Each envelope linearly interpolates through the endpoints and the strict
/// interior extrema of its kind. A signal with no interior extrema at all
/// (constant or monotone) is returned unchanged.
pub fn envelope_mean(x: &[f64]) -> Vec<f64> {
    assert!(
        x.len() >= 3,
        "envelope needs at least 3 samples, got {}",
        x.len()
    );
    let maxima = strict_local_maxima(x);
    let minima = strict_local_minima(x);
    if maxima.is_empty() && minima.is_empty() {
        return x.to_vec();
    }
    let upper = interpolate_through(x, &maxima);
    let lower = interpolate_through(x, &minima);
    upper
        .into_iter()
        .zip(lower)
        .map(|(u, l)| 0.5 * (u + l))
        .collect()
}

/// Piecewise-linear curve through `x[0]`, the given interior knots, `x[n-1]`.
fn interpolate_through(x: &[f64], interior: &[usize]) -> Vec<f64> {
    let n = x.len();
    let mut knots = Vec::with_capacity(interior.len() + 2);
    knots.push(0);
    knots.extend_from_slice(interior);
    knots.push(n - 1);
    let mut out = vec![0.0; n];
    for pair in knots.windows(2) {
        let (i0, i1) = (pair[0], pair[1]);
        let span = (i1 - i0) as f64;
        for (offset, slot) in out[i0..i1].iter_mut().enumerate() {
            let t = offset as f64 / span;
            *slot = x[i0] + (x[i1] - x[i0]) * t;
        }
    }
    out[n - 1] = x[n - 1];
    out
}

/// Affine map onto [0, 1]; a constant signal maps to all zeros.
pub fn minmax_scale(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; x.len()];
    }
    let span = hi - lo;
    x.iter().map(|&v| (v - lo) / span).collect()
}

/// Per-channel lowpass cutoffs in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoffs {
    pub emg_hz: f64,
    pub bvp_hz: f64,
    pub gsr_hz: f64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            emg_hz: 10.0,
            bvp_hz: 19.0,
            gsr_hz: 19.0,
        }
    }
}

impl Cutoffs {
    pub fn for_channel(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::Emg => self.emg_hz,
            ChannelKind::Bvp => self.bvp_hz,
            ChannelKind::Gsr => self.gsr_hz,
        }
    }
}

/// Conditions every channel of a session: zero-phase order-1 Butterworth
/// lowpass, envelope mean for EMG and GSR (BVP keeps its pulse waveform),
/// then min-max scaling. Labels and identity are preserved.
pub fn preprocess(session: &Session, cutoffs: &Cutoffs) -> Result<Session> {
    let mut processed: [Vec<f64>; 3] = Default::default();
    for kind in ChannelKind::ALL {
        let design = design_lowpass_butterworth(1, cutoffs.for_channel(kind), session.fs_hz())?;
        if design.clamped {
            log::warn!(
                "session `{}` {}: cutoff {} Hz is at or above Nyquist, using {} Hz",
                session.session_id(),
                kind,
                design.requested_cutoff_hz,
                design.effective_cutoff_hz
            );
        }
        let filtered = zero_phase_filter(&design.coefficients, session.channel(kind))?;
        let smoothed = match kind {
            ChannelKind::Bvp => filtered,
            _ => envelope_mean(&filtered),
        };
        processed[kind.index()] = minmax_scale(&smoothed);
    }
    session.with_channels(processed)
}
