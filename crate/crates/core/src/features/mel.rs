//! Triangular Mel filterbank and log-Mel features.

use super::{preemphasized, stft_magnitude, FeatureKind, FeatureMatrix, LOG_FLOOR, SPECTRUM_BINS};
use crate::audio::{AudioClip, FrameGrid};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// 40 triangular filters spaced on the Mel scale, evaluated on the 257
/// unique spectrum bins.
#[derive(Debug, Clone)]
pub struct MelBank {
    pub n_filters: usize,
    pub fft_bins: usize,
    /// n_filters x fft_bins triangular responses, row-major.
    pub weights: Vec<f64>,
    pub center_freqs_hz: Vec<f64>,
    pub f_low_hz: f64,
    pub f_high_hz: f64,
}

impl MelBank {
    /// Canonical bank: 40 filters over 0..4000 Hz at 8 kHz / 512-point FFT.
    pub fn canonical() -> Self {
        Self::new(40, 0.0, 4000.0, 8000.0)
    }

    pub fn new(n_filters: usize, f_low_hz: f64, f_high_hz: f64, sample_rate_hz: f64) -> Self {
        assert!(f_low_hz >= 0.0 && f_high_hz <= sample_rate_hz / 2.0 && f_low_hz < f_high_hz);
        let n_bins = SPECTRUM_BINS;
        let mel_lo = hz_to_mel(f_low_hz);
        let mel_hi = hz_to_mel(f_high_hz);
        // n_filters + 2 edge points, uniformly spaced in Mel.
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_filters + 1) as f64))
            .collect();
        let bin_hz = sample_rate_hz / super::FFT_SIZE as f64;
        let mut weights = vec![0.0; n_filters * n_bins];
        for j in 0..n_filters {
            let (left, center, right) = (edges[j], edges[j + 1], edges[j + 2]);
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f < center {
                    (f - left) / (center - left)
                } else {
                    (right - f) / (right - center)
                };
                weights[j * n_bins + k] = w.max(0.0);
            }
        }
        Self {
            n_filters,
            fft_bins: n_bins,
            weights,
            center_freqs_hz: edges[1..=n_filters].to_vec(),
            f_low_hz,
            f_high_hz,
        }
    }

    pub fn filter(&self, j: usize) -> &[f64] {
        &self.weights[j * self.fft_bins..(j + 1) * self.fft_bins]
    }
}

/// Apply the bank to magnitude spectra: power = magnitude^2, filter energies
/// = weights * power, output = log(energy + floor).
pub fn mel_filterbank(mag: &FeatureMatrix, bank: &MelBank) -> FeatureMatrix {
    assert_eq!(mag.kind, FeatureKind::MagSpec);
    let mut data = Vec::with_capacity(mag.frames * bank.n_filters);
    for row in mag.rows() {
        let power: Vec<f64> = row.iter().map(|&m| m * m).collect();
        for j in 0..bank.n_filters {
            let e: f64 = bank
                .filter(j)
                .iter()
                .zip(&power)
                .map(|(&w, &p)| w * p)
                .sum();
            data.push((e + LOG_FLOOR).ln());
        }
    }
    FeatureMatrix::new(FeatureKind::Mfb, mag.frames, data)
}

/// Full MFB front-end: pre-emphasis, magnitude spectra, log-Mel energies.
pub fn extract_mfb(clip: &AudioClip, grid: &FrameGrid) -> FeatureMatrix {
    let emphasized = preemphasized(clip);
    let mag = stft_magnitude(&emphasized, grid);
    mel_filterbank(&mag, &MelBank::canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frame_hits_log_floor() {
        let clip = AudioClip::new(vec![0.0; 200], 8000);
        let mfb = extract_mfb(&clip, &FrameGrid::canonical());
        assert_eq!(mfb.dim, 40);
        let floor = LOG_FLOOR.ln();
        assert!(mfb.data().iter().all(|&v| (v - floor).abs() < 1e-12));
    }

    #[test]
    fn flat_spectrum_gives_log_weight_sums() {
        let bank = MelBank::canonical();
        let mag = FeatureMatrix::new(FeatureKind::MagSpec, 1, vec![1.0; 257]);
        let mfb = mel_filterbank(&mag, &bank);
        for j in 0..40 {
            let expected = (bank.filter(j).iter().sum::<f64>() + LOG_FLOOR).ln();
            assert!((mfb.row(0)[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn tone_activates_filter_nearest_its_frequency() {
        let clip = AudioClip::new(
            (0..400)
                .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 8000.0).sin())
                .collect(),
            8000,
        );
        let mfb = extract_mfb(&clip, &FrameGrid::canonical());
        let bank = MelBank::canonical();
        let row = mfb.row(0);
        let argmax = (0..40).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let nearest = (0..40)
            .min_by(|&a, &b| {
                (bank.center_freqs_hz[a] - 1000.0)
                    .abs()
                    .total_cmp(&(bank.center_freqs_hz[b] - 1000.0).abs())
            })
            .unwrap();
        assert!(
            (argmax as i64 - nearest as i64).abs() <= 1,
            "argmax {argmax} vs nearest {nearest}"
        );
    }

    #[test]
    fn filters_are_unimodal_contiguous_and_overlapping() {
        let bank = MelBank::canonical();
        for j in 0..bank.n_filters {
            let w = bank.filter(j);
            assert!(w.iter().all(|&v| v >= 0.0));
            let nonzero: Vec<usize> = (0..257).filter(|&k| w[k] > 0.0).collect();
            assert!(!nonzero.is_empty(), "filter {j} is empty");
            // Contiguous support.
            for pair in nonzero.windows(2) {
                assert_eq!(pair[1], pair[0] + 1, "filter {j} support has a gap");
            }
            // Unimodal: rises to a single peak then falls.
            let vals: Vec<f64> = nonzero.iter().map(|&k| w[k]).collect();
            let peak = (0..vals.len())
                .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
                .unwrap();
            assert!(vals[..=peak].windows(2).all(|p| p[0] <= p[1]));
            assert!(vals[peak..].windows(2).all(|p| p[0] >= p[1]));
            // Adjacent filters share support.
            if j + 1 < bank.n_filters {
                let next = bank.filter(j + 1);
                assert!(
                    (0..257).any(|k| w[k] > 0.0 && next[k] > 0.0),
                    "filters {j} and {} do not overlap",
                    j + 1
                );
            }
        }
    }
}
