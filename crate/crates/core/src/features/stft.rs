//! Short-time magnitude spectra.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{frames_of, FeatureKind, FeatureMatrix};
use crate::audio::{AudioClip, FrameGrid};

/// Transform length; frames are zero-padded up to this size.
pub const FFT_SIZE: usize = 512;

/// Unique spectrum bins kept per frame (FFT_SIZE/2 + 1).
pub const SPECTRUM_BINS: usize = 257;

/// Symmetric Hamming window of length `n`.
pub(crate) fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos())
        .collect()
}

fn plan_fft() -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(FFT_SIZE)
}

/// Per-frame magnitude spectrum: Hamming window, zero-pad to 512, keep the
/// 257 unique bins.
pub fn stft_magnitude(clip: &AudioClip, grid: &FrameGrid) -> FeatureMatrix {
    assert!(grid.frame_len <= FFT_SIZE);
    let fft = plan_fft();
    let window = hamming(grid.frame_len);
    let n_frames = grid.frame_count(clip.len());
    let mut data = Vec::with_capacity(n_frames * SPECTRUM_BINS);
    let mut buf = vec![Complex::new(0.0, 0.0); FFT_SIZE];
    for frame in frames_of(clip, grid) {
        for (b, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&window)) {
            *b = Complex::new(x * w, 0.0);
        }
        for b in buf.iter_mut().skip(grid.frame_len) {
            *b = Complex::new(0.0, 0.0);
        }
        fft.process(&mut buf);
        data.extend(buf[..SPECTRUM_BINS].iter().map(|c| c.norm()));
    }
    FeatureMatrix::new(FeatureKind::MagSpec, n_frames, data)
}

/// Windowed frame energy, for Parseval-style checks and the MFCC log-energy
/// coefficient.
pub(crate) fn windowed_energy(frame: &[f64], window: &[f64]) -> f64 {
    frame
        .iter()
        .zip(window)
        .map(|(&x, &w)| (x * w) * (x * w))
        .sum()
}
