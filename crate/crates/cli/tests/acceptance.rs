//! Acceptance suite: one test per shipped guarantee. Each test prints a
//! PASS line with the measured quantity (visible with --nocapture) and
//! enforces its own runtime budget where one applies.

use std::f64::consts::{SQRT_2, TAU};
use std::process::Command;
use std::time::Instant;

use affectfuse_core::{
    build_feature_table, design_lowpass_butterworth, extract_features, fit_fold_models, fit_lda,
    fuse, generate, moments, powers, preprocess, prune_correlated, run_loocv, zero_phase_filter,
    EvalConfig, FeatureRow, LikelihoodWeightMatrix, Session, SynthConfig,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

// ---------------------------------------------------------------- filtering

/// One direct-form pass of a first-order section, written with scalar state
/// so it shares no code with the library: y[n] = b0 x[n] + z, z' = b1 x[n] -
/// a1 y[n], starting from the settled unit-step state scaled by x[0].
fn naive_first_order_pass(b: &[f64], a: &[f64], x: &[f64]) -> Vec<f64> {
    let (b0, b1, a1) = (b[0], b[1], a[1]);
    let y_ss = (b0 + b1) / (1.0 + a1);
    let mut z = (b1 - a1 * y_ss) * x[0];
    x.iter()
        .map(|&xn| {
            let yn = b0 * xn + z;
            z = b1 * xn - a1 * yn;
            yn
        })
        .collect()
}

/// From-scratch forward-backward filtering: odd-extend by three samples,
/// filter, reverse, filter, reverse, trim.
fn naive_zero_phase(b: &[f64], a: &[f64], x: &[f64]) -> Vec<f64> {
    assert_eq!(b.len(), 2);
    assert_eq!(a.len(), 2);
    let pad = 3;
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    let forward = naive_first_order_pass(b, a, &ext);
    let reversed: Vec<f64> = forward.into_iter().rev().collect();
    let backward = naive_first_order_pass(b, a, &reversed);
    let restored: Vec<f64> = backward.into_iter().rev().collect();
    restored[pad..pad + n].to_vec()
}

/// Lag of the largest cross-correlation between x and y, scanning
/// |lag| <= max_lag over the interior of the signals.
fn best_xcorr_lag(x: &[f64], y: &[f64], max_lag: i64, margin: usize) -> i64 {
    let n = x.len();
    let mut best = (f64::NEG_INFINITY, 0i64);
    for lag in -max_lag..=max_lag {
        let mut s = 0.0;
        for i in margin..n - margin {
            s += x[i] * y[(i as i64 + lag) as usize];
        }
        if s > best.0 {
            best = (s, lag);
        }
    }
    best.1
}

#[test]
fn filtering_matches_closed_form_taps_and_a_naive_oracle() {
    let start = Instant::now();

    // A first-order lowpass at half Nyquist has closed-form taps.
    let design = design_lowpass_butterworth(1, 10.0, 40.0).unwrap();
    let b = design.coefficients.b();
    let a = design.coefficients.a();
    assert!(
        (b[0] - 0.5).abs() <= 1e-12 && (b[1] - 0.5).abs() <= 1e-12,
        "b {b:?}"
    );
    assert!(
        (a[0] - 1.0).abs() <= 1e-12 && a[1].abs() <= 1e-12,
        "a {a:?}"
    );

    // Forward-backward filtering agrees with the scalar-state oracle on 100
    // seeded random signals across sampling rates, cutoffs, and lengths.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let fs = rng.random_range(20.0..1000.0);
        let cutoff = rng.random_range(0.05..1.4) * fs / 2.0;
        let len = rng.random_range(30..500);
        let x: Vec<f64> = (0..len)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let design = design_lowpass_butterworth(1, cutoff, fs).unwrap();
        let got = zero_phase_filter(&design.coefficients, &x).unwrap();
        let want = naive_zero_phase(design.coefficients.b(), design.coefficients.a(), &x);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    assert!(worst <= 1e-9, "worst oracle deviation {worst}");

    // An in-band sinusoid comes back with zero group delay.
    let fs = 40.0;
    let design = design_lowpass_butterworth(1, 10.0, fs).unwrap();
    let x: Vec<f64> = (0..1000)
        .map(|n| (TAU * 2.0 * n as f64 / fs).sin())
        .collect();
    let y = zero_phase_filter(&design.coefficients, &x).unwrap();
    let lag = best_xcorr_lag(&x, &y, 8, 50);
    assert_eq!(lag, 0, "group delay of {lag} samples");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "PASS filtering: taps exact, oracle deviation {worst:.1e}, group delay 0 ({elapsed:?})"
    );
}

// ----------------------------------------------------------------- features

/// AC power from a direct DFT: sum of |X[k]|^2 over k != 0, divided by N^2.
fn dft_ac_power(x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for k in 1..n {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let phase = -TAU * (k * i) as f64 / n as f64;
            re += v * phase.cos();
            im += v * phase.sin();
        }
        total += re * re + im * im;
    }
    total / (n * n) as f64
}

#[test]
fn features_match_hand_values_and_the_dft_power_oracle() {
    let start = Instant::now();

    // Alternating +-1 has a fully hand-computable feature vector.
    let x: Vec<f64> = (0..200)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let got = extract_features(&x, 16);
    let want = [1.0, -1.0, 99.0, 0.0, 1.0, 1.0, 2f64.ln(), 1.0, 1.0];
    for (slot, (g, w)) in got.iter().zip(&want).enumerate() {
        assert!((g - w).abs() <= 1e-12, "slot {slot}: {g} vs {w}");
    }

    // AC power equals total power minus the squared mean, and both agree
    // with a direct DFT periodogram, on 100 random segments.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..256).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (signal_power, spectral_power) = powers(&x);
        let (mean, _, _) = moments(&x);
        worst = worst.max((spectral_power - (signal_power - mean * mean)).abs());
        worst = worst.max((spectral_power - dft_ac_power(&x)).abs());
    }
    assert!(worst <= 1e-9, "worst power deviation {worst}");

    // A million-sample Gaussian draw has kurtosis 3 within one decimal.
    let x: Vec<f64> = (0..1_000_000)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (_, _, kurtosis) = moments(&x);
    assert!((kurtosis - 3.0).abs() <= 0.1, "kurtosis {kurtosis}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("PASS features: hand vector exact, power deviation {worst:.1e}, kurtosis {kurtosis:.3} ({elapsed:?})");
}

// ---------------------------------------------------------------- selection

/// Two-pass Pearson correlation, independent of the library's version.
fn sample_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn pruning_keeps_no_pair_above_threshold_and_collapses_duplicates() {
    // Every fold of a pruned evaluation keeps only pairs whose correlation
    // on that fold's training rows is at or below the threshold.
    let sessions = generate(&SynthConfig {
        days: 8,
        seed: 5,
        separation: 1.5,
        ..SynthConfig::default()
    })
    .unwrap();
    let config = EvalConfig {
        prune: true,
        parallel: true,
        ..EvalConfig::default()
    };
    let report = run_loocv(&sessions, &config).unwrap();
    let processed: Vec<Session> = sessions
        .iter()
        .map(|s| preprocess(s, &config.cutoffs).unwrap())
        .collect();
    let table = build_feature_table(&processed, config.entropy_bins).unwrap();
    let mut pairs = 0usize;
    for fold in &report.folds {
        let training: Vec<&FeatureRow> = table
            .rows()
            .filter(|(session, _, _)| *session != fold.held_out_session)
            .map(|(_, _, row)| row)
            .collect();
        for (i, &ja) in fold.kept_features.iter().enumerate() {
            for &jb in &fold.kept_features[i + 1..] {
                let a: Vec<f64> = training.iter().map(|r| r[ja]).collect();
                let b: Vec<f64> = training.iter().map(|r| r[jb]).collect();
                let r = sample_correlation(&a, &b);
                assert!(r.abs() <= 0.8 + 1e-12, "kept pair ({ja},{jb}) has r {r}");
                pairs += 1;
            }
        }
    }
    assert!(pairs > 0);

    // Rows with nine duplicated columns collapse from 27 to 18 features.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<FeatureRow> = (0..40)
        .map(|_| {
            let mut row = [0.0; 27];
            for v in row.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal);
            }
            for k in 0..4 {
                row[9 + k] = row[k]; // BVP slots 0-3 mirror EMG slots 0-3
            }
            for k in 0..5 {
                row[18 + k] = row[4 + k]; // GSR slots 0-4 mirror EMG slots 4-8
            }
            row
        })
        .collect();
    let refs: Vec<&FeatureRow> = rows.iter().collect();
    let mask = prune_correlated(&refs, 0.8).unwrap();
    let kept: Vec<usize> = mask.kept().iter().map(|f| f.get()).collect();
    let want: Vec<usize> = (0..9).chain(13..18).chain(23..27).collect();
    assert_eq!(kept, want, "27 columns with 9 duplicates must keep 18");

    println!("PASS pruning: {pairs} kept pairs within threshold, duplicate fixture 27 -> 18");
}

// ---------------------------------------------------------------------- lda

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[test]
fn lda_agrees_with_the_bayes_rule_on_shared_covariance_gaussians() {
    let start = Instant::now();

    // Shared covariance [[2,1,0],[1,2,0],[0,0,1]] with hand-computed
    // Cholesky factor and inverse; eight class means on a circle with an
    // alternating third coordinate.
    let l = [
        [SQRT_2, 0.0, 0.0],
        [1.0 / SQRT_2, 1.5f64.sqrt(), 0.0],
        [0.0, 0.0, 1.0],
    ];
    let sigma_inv = [
        [2.0 / 3.0, -1.0 / 3.0, 0.0],
        [-1.0 / 3.0, 2.0 / 3.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let means: Vec<[f64; 3]> = (0..8)
        .map(|k| {
            let angle = TAU * k as f64 / 8.0;
            [
                3.0 * angle.cos(),
                3.0 * angle.sin(),
                if k % 2 == 0 { 1.5 } else { -1.5 },
            ]
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draw = |k: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let z: [f64; 3] = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        (0..3)
            .map(|i| means[k][i] + (0..3).map(|j| l[i][j] * z[j]).sum::<f64>())
            .collect()
    };

    let classes: Vec<Vec<Vec<f64>>> = (0..8)
        .map(|k| (0..10_000).map(|_| draw(k, &mut rng)).collect())
        .collect();
    let model = fit_lda(&classes, 0.0, 1e-8).unwrap();

    // Bayes rule for equal-covariance Gaussians with equal priors:
    // argmax_k (Sigma^-1 mu_k) . x - mu_k . (Sigma^-1 mu_k) / 2.
    let bayes_scores = |x: &[f64]| -> Vec<f64> {
        means
            .iter()
            .map(|mu| {
                let w: Vec<f64> = (0..3)
                    .map(|i| (0..3).map(|j| sigma_inv[i][j] * mu[j]).sum())
                    .collect();
                let wx: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
                let wm: f64 = w.iter().zip(mu).map(|(wi, mi)| wi * mi).sum();
                wx - 0.5 * wm
            })
            .collect()
    };

    let total = 10_000;
    let mut agree = 0usize;
    for t in 0..total {
        let x = draw(t % 8, &mut rng);
        if argmax(&model.discriminants(&x).unwrap()) == argmax(&bayes_scores(&x)) {
            agree += 1;
        }
    }
    let rate = agree as f64 / total as f64;
    assert!(rate >= 0.99, "Bayes agreement {rate}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "PASS lda: {:.2}% agreement with the Bayes rule ({elapsed:?})",
        rate * 100.0
    );
}

// ------------------------------------------------------------------- fusion

/// A random weight row of the form k/64 with k summing to 64, so every
/// partial sum is exact in floating point.
fn dyadic_row(rng: &mut ChaCha8Rng) -> [f64; 8] {
    let mut cuts = vec![0u32, 64];
    for _ in 0..7 {
        cuts.push(rng.random_range(0..=64));
    }
    cuts.sort_unstable();
    let mut row = [0.0; 8];
    for (i, slot) in row.iter_mut().enumerate() {
        *slot = (cuts[i + 1] - cuts[i]) as f64 / 64.0;
    }
    row
}

#[test]
fn fusion_preserves_the_simplex_and_breaks_ties_toward_lower_ids() {
    // Dyadic rows make every sum exact, so row-permutation invariance can
    // be asserted bit for bit.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let rows = [
            dyadic_row(&mut rng),
            dyadic_row(&mut rng),
            dyadic_row(&mut rng),
        ];
        let base = fuse(&LikelihoodWeightMatrix::new(rows)).unwrap();
        let total: f64 = base.mean_weights.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12, "fused weights sum to {total}");
        assert!(base.mean_weights.iter().all(|w| (0.0..=1.0).contains(w)));
        for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            let shuffled = [rows[perm[0]], rows[perm[1]], rows[perm[2]]];
            let fused = fuse(&LikelihoodWeightMatrix::new(shuffled)).unwrap();
            assert_eq!(fused.mean_weights, base.mean_weights);
            assert_eq!(fused.predicted, base.predicted);
        }
    }

    // Hand example: columns 3 and 4 both average exactly 3/8; the tie must
    // go to the lower id.
    let mut emg = [0.0; 8];
    emg[3] = 1.0;
    let mut bvp = [0.0; 8];
    bvp[4] = 1.0;
    let gsr = [0.125; 8];
    let decision = fuse(&LikelihoodWeightMatrix::new([emg, bvp, gsr])).unwrap();
    assert_eq!(decision.mean_weights[3], 0.375);
    assert_eq!(decision.mean_weights[4], 0.375);
    assert_eq!(decision.predicted.index(), 3);

    println!("PASS fusion: simplex kept, row order irrelevant, exact tie 3/8 vs 3/8 resolved low");
}

// -------------------------------------------------------------- end to end

#[test]
fn synthetic_end_to_end_accuracy_lands_in_the_stated_bands() {
    let start = Instant::now();

    let mut plain_sum = 0.0;
    let mut pruned_sum = 0.0;
    for seed in 1..=5 {
        let sessions = generate(&SynthConfig {
            days: 20,
            seed,
            separation: 2.0,
            ..SynthConfig::default()
        })
        .unwrap();
        let plain = run_loocv(
            &sessions,
            &EvalConfig {
                parallel: true,
                ..EvalConfig::default()
            },
        )
        .unwrap();
        let pruned = run_loocv(
            &sessions,
            &EvalConfig {
                prune: true,
                parallel: true,
                ..EvalConfig::default()
            },
        )
        .unwrap();
        plain_sum += plain.accuracy;
        pruned_sum += pruned.accuracy;
    }
    let plain = plain_sum / 5.0;
    let pruned = pruned_sum / 5.0;
    assert!(plain >= 0.95, "well-separated accuracy {plain}");
    assert!(
        (plain - pruned).abs() <= 0.05,
        "pruning cost: {plain} vs {pruned}"
    );

    let sessions = generate(&SynthConfig {
        days: 20,
        seed: 1,
        separation: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let chance = run_loocv(
        &sessions,
        &EvalConfig {
            parallel: true,
            ..EvalConfig::default()
        },
    )
    .unwrap()
    .accuracy;
    assert!(
        (0.05..=0.25).contains(&chance),
        "chance-level accuracy {chance}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("PASS end-to-end: separated {plain:.4}, pruned {pruned:.4}, chance {chance:.4} ({elapsed:?})");
}

// ------------------------------------------------------------------ metrics

#[test]
fn metric_identities_hold_on_every_report() {
    let mut reports = Vec::new();
    for (seed, separation, prune) in [(11, 1.0, false), (12, 0.0, false), (13, 1.5, true)] {
        let sessions = generate(&SynthConfig {
            days: 6,
            seed,
            separation,
            ..SynthConfig::default()
        })
        .unwrap();
        reports.push(
            run_loocv(
                &sessions,
                &EvalConfig {
                    prune,
                    parallel: true,
                    ..EvalConfig::default()
                },
            )
            .unwrap(),
        );
    }
    for report in &reports {
        let total: u64 = report.confusion.iter().flatten().sum();
        assert_eq!(total, report.folds.len() as u64 * 8);
        let trace: u64 = (0..8).map(|e| report.confusion[e][e]).sum();
        assert_eq!(report.accuracy, trace as f64 / total as f64);
        for e in 0..8 {
            assert_eq!(report.mscr[e][e], 0.0);
            let row_sum: f64 = report.mscr[e].iter().sum();
            assert!(
                (row_sum - (1.0 - report.tpr[e])).abs() <= 1e-12,
                "mscr row {e} sums to {row_sum}, tpr {}",
                report.tpr[e]
            );
            let false_e: u64 = (0..8)
                .filter(|&t| t != e)
                .map(|t| report.confusion[t][e])
                .sum();
            let not_e: u64 = (0..8)
                .filter(|&t| t != e)
                .map(|t| report.confusion[t].iter().sum::<u64>())
                .sum();
            assert_eq!(report.fpr[e], false_e as f64 / not_e as f64);
        }
    }
    println!(
        "PASS metrics: row-sum, count, and rate identities hold on {} reports",
        reports.len()
    );
}

// ------------------------------------------------------------------ leakage

fn fold_models_json(sessions: &[Session], held_out: &str, config: &EvalConfig) -> String {
    let processed: Vec<Session> = sessions
        .iter()
        .map(|s| preprocess(s, &config.cutoffs).unwrap())
        .collect();
    let table = build_feature_table(&processed, config.entropy_bins).unwrap();
    let models = fit_fold_models(&table, Some(held_out), config).unwrap();
    serde_json::to_string(&models).unwrap()
}

#[test]
fn corrupting_the_held_out_session_leaves_fold_models_bit_identical() {
    let sessions = generate(&SynthConfig {
        days: 4,
        seed: 17,
        separation: 1.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let held_out = sessions[1].session_id().to_string();

    let mut perturbed = sessions.clone();
    let mut channels = perturbed[1].channels().clone();
    for channel in &mut channels {
        for (i, v) in channel.iter_mut().enumerate() {
            *v = *v * 1.7 + 0.3 + (i % 5) as f64 * 0.01;
        }
    }
    perturbed[1] = perturbed[1].with_channels(channels).unwrap();

    for prune in [false, true] {
        let config = EvalConfig {
            prune,
            ..EvalConfig::default()
        };
        let clean = fold_models_json(&sessions, &held_out, &config);
        let dirty = fold_models_json(&perturbed, &held_out, &config);
        assert_eq!(
            clean, dirty,
            "prune {prune}: held-out data reached the trained models"
        );
    }
    println!("PASS leakage: corrupted held-out session, fold models byte-identical");
}

// -------------------------------------------------------------------------
// Determinism of the full command-line path.

#[test]
fn repeated_cli_runs_emit_byte_identical_outputs() {
    let bin = env!("CARGO_BIN_EXE_affectfuse");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("report");

    let run = || {
        let synth = Command::new(bin)
            .args([
                "synth",
                "--days",
                "4",
                "--seed",
                "3",
                "--separation",
                "1.5",
                "--out",
            ])
            .arg(&data)
            .output()
            .unwrap();
        assert!(
            synth.status.success(),
            "synth failed: {}",
            String::from_utf8_lossy(&synth.stderr)
        );
        let eval = Command::new(bin)
            .args(["evaluate", "--prune", "--parallel", "--manifest"])
            .arg(data.join("manifest.json"))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            eval.status.success(),
            "evaluate failed: {}",
            String::from_utf8_lossy(&eval.stderr)
        );
        (
            std::fs::read(data.join("day01.csv")).unwrap(),
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("confusion.csv")).unwrap(),
        )
    };

    let first = run();
    let second = run();
    assert_eq!(first.0, second.0, "session CSV differs between runs");
    assert_eq!(first.1, second.1, "report.json differs between runs");
    assert_eq!(first.2, second.2, "confusion.csv differs between runs");
    println!(
        "PASS determinism: report.json byte-identical across runs ({} bytes)",
        first.1.len()
    );
}
