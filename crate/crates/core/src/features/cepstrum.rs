//! DCT, liftering, delta features, and the MFCC pipeline.

use super::stft::{hamming, windowed_energy};
use super::{
    frames_of, mel_filterbank, preemphasized, stft_magnitude, FeatureKind, FeatureMatrix,
    LOG_FLOOR, MelBank,
};
use crate::audio::{AudioClip, FrameGrid};

/// Orthonormal DCT-II: c_k = s_k * sum_n x_n cos(pi k (2n+1) / (2N)).
pub fn dct_ii(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let scale0 = (1.0 / n as f64).sqrt();
    let scale = (2.0 / n as f64).sqrt();
    (0..n)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    v * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64)
                        .cos()
                })
                .sum();
            if k == 0 {
                scale0 * s
            } else {
                scale * s
            }
        })
        .collect()
}

/// Inverse of the orthonormal DCT-II.
pub fn dct_iii(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let scale0 = (1.0 / n as f64).sqrt();
    let scale = (2.0 / n as f64).sqrt();
    (0..n)
        .map(|i| {
            scale0 * c[0]
                + (1..n)
                    .map(|k| {
                        scale
                            * c[k]
                            * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64
                                / (2 * n) as f64)
                                .cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Sinusoidal lifter weight for coefficient index `k` (1-based).
pub fn lifter_weight(k: usize, l: usize) -> f64 {
    1.0 + (l as f64 / 2.0) * (std::f64::consts::PI * k as f64 / l as f64).sin()
}

/// Apply sinusoidal liftering to cepstral coefficients c_1..c_n (the slice
/// holds c_1 at index 0).
pub fn lifter(c: &[f64], l: usize) -> Vec<f64> {
    assert!(l > 0);
    c.iter()
        .enumerate()
        .map(|(i, &v)| lifter_weight(i + 1, l) * v)
        .collect()
}

/// Canonical lifter parameter.
pub const LIFTER_L: usize = 22;

/// Regression deltas over a window of +/-N frames with replicated edge
/// padding: d_t = sum_n n*(c_{t+n} - c_{t-n}) / (2*sum n^2).
pub fn deltas(coeffs: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    let frames = coeffs.len();
    if frames == 0 {
        return Vec::new();
    }
    let dim = coeffs[0].len();
    let denom = 2.0 * (1..=n).map(|i| (i * i) as f64).sum::<f64>();
    let clamp = |t: isize| -> &Vec<f64> {
        let idx = t.clamp(0, frames as isize - 1) as usize;
        &coeffs[idx]
    };
    (0..frames as isize)
        .map(|t| {
            (0..dim)
                .map(|d| {
                    (1..=n as isize)
                        .map(|off| off as f64 * (clamp(t + off)[d] - clamp(t - off)[d]))
                        .sum::<f64>()
                        / denom
                })
                .collect()
        })
        .collect()
}

/// Canonical delta regression half-window.
pub const DELTA_WINDOW: usize = 2;

/// 39-dim MFCC: log-energy + 12 liftered cepstra, plus Δ and ΔΔ.
///
/// Pipeline: pre-emphasis, magnitude spectra, log-Mel energies, DCT-II,
/// keep c_1..c_12, replace c_0 with the windowed log frame energy, lifter,
/// then append first and second derivatives of the 13 statics.
pub fn extract_mfcc(clip: &AudioClip, grid: &FrameGrid) -> FeatureMatrix {
    let emphasized = preemphasized(clip);
    let mag = stft_magnitude(&emphasized, grid);
    let mfb = mel_filterbank(&mag, &MelBank::canonical());
    let window = hamming(grid.frame_len);

    let mut statics: Vec<Vec<f64>> = Vec::with_capacity(mfb.frames);
    for (row, frame) in mfb.rows().zip(frames_of(&emphasized, grid)) {
        let cepstra = dct_ii(row);
        let liftered = lifter(&cepstra[1..13], LIFTER_L);
        let log_energy = (windowed_energy(frame, &window) + LOG_FLOOR).ln();
        let mut s = Vec::with_capacity(13);
        s.push(log_energy);
        s.extend(liftered);
        statics.push(s);
    }

    let d1 = deltas(&statics, DELTA_WINDOW);
    let d2 = deltas(&d1, DELTA_WINDOW);
    let mut data = Vec::with_capacity(statics.len() * 39);
    for t in 0..statics.len() {
        data.extend(&statics[t]);
        data.extend(&d1[t]);
        data.extend(&d2[t]);
    }
    FeatureMatrix::new(FeatureKind::Mfcc, statics.len(), data)
}
