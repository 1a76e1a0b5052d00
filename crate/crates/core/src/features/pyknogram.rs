//! Gammatone/Teager pyknogram.
//!
//! Each channel's band-passed signal is demodulated with DESA-1; a sample
//! contributes to its frame only when the frequency estimate stays inside
//! the channel's acceptance band around its center. Energy therefore piles
//! up in the channels whose centers sit on true spectral components.

use super::{desa1, FeatureKind, FeatureMatrix, GammatoneBank, LOG_FLOOR};
use crate::audio::{AudioClip, FrameGrid};

/// 120-dim pyknogram: per frame and channel, the mean squared accepted
/// DESA-1 amplitude, log-compressed as log(v + 1e-10).
pub fn pyknogram(clip: &AudioClip, bank: &GammatoneBank, grid: &FrameGrid) -> FeatureMatrix {
    let n_frames = grid.frame_count(clip.len());
    let n_ch = bank.n_channels;
    let mut data = vec![LOG_FLOOR.ln(); n_frames * n_ch];
    if n_frames == 0 {
        return FeatureMatrix::new(FeatureKind::Pykno, 0, Vec::new());
    }

    for ch in 0..n_ch {
        let filtered = bank.filter_channel(ch, &clip.samples);
        // Clips long enough to hold a frame are long enough for DESA-1.
        let est = desa1(&filtered, bank.sample_rate_hz).expect("frame-length clip");
        let fc = bank.center_freqs_hz[ch];
        let half = bank.accept_halfwidth_hz[ch];
        for frame in 0..n_frames {
            let start = grid.frame_start(frame);
            let mut sum = 0.0;
            let mut count = 0usize;
            for n in start..start + grid.frame_len {
                if est.valid[n] && (est.freq_hz[n] - fc).abs() <= half {
                    sum += est.amp[n] * est.amp[n];
                    count += 1;
                }
            }
            let v = if count > 0 { sum / count as f64 } else { 0.0 };
            data[frame * n_ch + ch] = (v + LOG_FLOOR).ln();
        }
    }
    FeatureMatrix::new(FeatureKind::Pykno, n_frames, data)
}

/// Linear-domain per-channel energies for one frame row (inverse of the log
/// compression, with the floor removed).
pub fn linear_row(row: &[f64]) -> Vec<f64> {
    row.iter().map(|&v| (v.exp() - LOG_FLOOR).max(0.0)).collect()
}
