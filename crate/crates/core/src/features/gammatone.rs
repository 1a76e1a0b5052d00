//! ERB-spaced gammatone filterbank.
//!
//! Each channel is a 4th-order gammatone realized as four cascaded complex
//! one-pole sections with pole radius exp(-2*pi*b/fs), b = 1.019*ERB(fc).
//! The real band-passed output is normalized to unit gain for a cosine at
//! the channel's center frequency.

use rustfft::num_complex::Complex64;

use crate::error::FeatureError;

/// Equivalent rectangular bandwidth at frequency `f` Hz.
pub fn erb_hz(f: f64) -> f64 {
    24.7 * (4.37 * f / 1000.0 + 1.0)
}

/// ERB-rate scale (ERB-number) at frequency `f` Hz.
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * f).log10()
}

/// Inverse of [`erb_rate`].
pub fn erb_rate_inv(r: f64) -> f64 {
    (10f64.powf(r / 21.4) - 1.0) / 0.00437
}

/// A bank of gammatone channels with ascending center frequencies.
#[derive(Debug, Clone)]
pub struct GammatoneBank {
    pub n_channels: usize,
    pub sample_rate_hz: f64,
    pub center_freqs_hz: Vec<f64>,
    /// Nominal channel bandwidth, 1.019 * ERB(fc).
    pub bandwidths_hz: Vec<f64>,
    /// Half-width of the instantaneous-frequency acceptance band used by the
    /// pyknogram. This is half the nominal bandwidth, capped at 1.5x the
    /// local center spacing: densely packed channels overlap so much that an
    /// uncapped band keeps a tone in second and third neighbors too, smearing
    /// one spectral component across five channels instead of three.
    pub accept_halfwidth_hz: Vec<f64>,
    poles: Vec<Complex64>,
    gains: Vec<f64>,
}

/// Canonical channel count.
pub const PYKNO_CHANNELS: usize = 120;

impl GammatoneBank {
    /// The 120-channel bank over 50..3800 Hz.
    pub fn canonical(sample_rate_hz: f64) -> Result<Self, FeatureError> {
        Self::new(PYKNO_CHANNELS, 50.0, 3800.0, sample_rate_hz)
    }

    /// Centers spaced uniformly on the ERB-rate scale between `f_low_hz` and
    /// `f_high_hz` inclusive.
    pub fn new(
        n_channels: usize,
        f_low_hz: f64,
        f_high_hz: f64,
        sample_rate_hz: f64,
    ) -> Result<Self, FeatureError> {
        if n_channels < 2 {
            return Err(FeatureError::Parameter(format!(
                "need at least 2 channels, got {n_channels}"
            )));
        }
        if !(0.0 < f_low_hz && f_low_hz < f_high_hz && f_high_hz < sample_rate_hz / 2.0) {
            return Err(FeatureError::Parameter(format!(
                "invalid band [{f_low_hz}, {f_high_hz}] at fs {sample_rate_hz}"
            )));
        }

        let lo = erb_rate(f_low_hz);
        let hi = erb_rate(f_high_hz);
        let center_freqs_hz: Vec<f64> = (0..n_channels)
            .map(|i| erb_rate_inv(lo + (hi - lo) * i as f64 / (n_channels - 1) as f64))
            .collect();
        let bandwidths_hz: Vec<f64> = center_freqs_hz.iter().map(|&fc| 1.019 * erb_hz(fc)).collect();

        let accept_halfwidth_hz: Vec<f64> = (0..n_channels)
            .map(|i| {
                let above = center_freqs_hz[(i + 1).min(n_channels - 1)];
                let below = center_freqs_hz[i.saturating_sub(1)];
                // Local spacing; at the edges only one neighbor exists.
                let spacing = if i == 0 {
                    above - center_freqs_hz[0]
                } else if i == n_channels - 1 {
                    center_freqs_hz[i] - below
                } else {
                    (above - below) / 2.0
                };
                (bandwidths_hz[i] / 2.0).min(1.5 * spacing)
            })
            .collect();

        let two_pi = 2.0 * std::f64::consts::PI;
        let mut poles = Vec::with_capacity(n_channels);
        let mut gains = Vec::with_capacity(n_channels);
        for ch in 0..n_channels {
            let theta = two_pi * center_freqs_hz[ch] / sample_rate_hz;
            let r = (-two_pi * bandwidths_hz[ch] / sample_rate_hz).exp();
            let pole = Complex64::from_polar(r, theta);
            poles.push(pole);
            gains.push(1.0 / cosine_gain_unnormalized(pole, theta));
        }

        Ok(Self {
            n_channels,
            sample_rate_hz,
            center_freqs_hz,
            bandwidths_hz,
            accept_halfwidth_hz,
            poles,
            gains,
        })
    }

    /// Band-pass `x` through channel `ch`, returning the real output.
    pub fn filter_channel(&self, ch: usize, x: &[f64]) -> Vec<f64> {
        let a = self.poles[ch];
        let g = 2.0 * self.gains[ch];
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = s1;
        let mut s3 = s1;
        let mut s4 = s1;
        x.iter()
            .map(|&xn| {
                s1 = a * s1 + Complex64::new(xn, 0.0);
                s2 = a * s2 + s1;
                s3 = a * s3 + s2;
                s4 = a * s4 + s3;
                g * s4.re
            })
            .collect()
    }

    /// Impulse response of channel `ch`, truncated to `n` samples.
    pub fn impulse_response(&self, ch: usize, n: usize) -> Vec<f64> {
        let mut impulse = vec![0.0; n];
        impulse[0] = 1.0;
        self.filter_channel(ch, &impulse)
    }
}

/// Amplitude gain of the unnormalized real-output cascade for a cosine at
/// angular frequency `theta`.
fn cosine_gain_unnormalized(pole: Complex64, theta: f64) -> f64 {
    let h = |omega: f64| -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        let stage = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - pole * z_inv);
        stage * stage * stage * stage
    };
    // Real output y = 2*Re(complex cascade); cosine amplitude gain is
    // |H(theta) + conj(H(-theta))|.
    (h(theta) + h(-theta).conj()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    fn spectrum_power(ir: &[f64], n_fft: usize) -> Vec<f64> {
        let mut buf: Vec<Complex64> = ir.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        buf.resize(n_fft, Complex64::new(0.0, 0.0));
        FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
        buf[..n_fft / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    #[test]
    fn canonical_bank_shape() {
        let bank = GammatoneBank::canonical(8000.0).unwrap();
        assert_eq!(bank.n_channels, 120);
        assert!((bank.center_freqs_hz[0] - 50.0).abs() < 1e-6);
        assert!((bank.center_freqs_hz[119] - 3800.0).abs() < 1e-6);
        for w in bank.center_freqs_hz.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(bank.center_freqs_hz.iter().all(|&f| f > 0.0 && f < 4000.0));
    }

    #[test]
    fn invalid_ranges_rejected() {
        assert!(GammatoneBank::new(8, 0.0, 3800.0, 8000.0).is_err());
        assert!(GammatoneBank::new(8, 50.0, 4000.0, 8000.0).is_err());
        assert!(GammatoneBank::new(8, 300.0, 200.0, 8000.0).is_err());
    }

    #[test]
    fn unit_gain_at_center_frequency() {
        let bank = GammatoneBank::canonical(8000.0).unwrap();
        for &ch in &[0usize, 40, 80, 119] {
            let fc = bank.center_freqs_hz[ch];
            let n = 24000;
            let x: Vec<f64> = (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * fc * i as f64 / 8000.0).cos())
                .collect();
            let y = bank.filter_channel(ch, &x);
            // Steady-state peak amplitude over the tail.
            let peak = y[n / 2..].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            assert!((peak - 1.0).abs() < 0.02, "channel {ch}: peak {peak}");
        }
    }

    #[test]
    fn impulse_response_peaks_within_two_percent_of_center() {
        let bank = GammatoneBank::canonical(8000.0).unwrap();
        let n_fft = 65536;
        let bin_hz = 8000.0 / n_fft as f64;
        for ch in 0..bank.n_channels {
            let ir = bank.impulse_response(ch, 16384);
            let power = spectrum_power(&ir, n_fft);
            let peak_bin = (0..power.len())
                .max_by(|&a, &b| power[a].total_cmp(&power[b]))
                .unwrap();
            let peak_hz = peak_bin as f64 * bin_hz;
            let fc = bank.center_freqs_hz[ch];
            assert!(
                (peak_hz - fc).abs() <= 0.02 * fc,
                "channel {ch}: peak {peak_hz} Hz vs center {fc} Hz"
            );
        }
    }

    #[test]
    fn channel_energy_concentrates_within_two_erb() {
        let bank = GammatoneBank::canonical(8000.0).unwrap();
        let n_fft = 65536;
        let bin_hz = 8000.0 / n_fft as f64;
        for &ch in &[0usize, 30, 60, 90, 119] {
            let fc = bank.center_freqs_hz[ch];
            let erb = erb_hz(fc);
            let ir = bank.impulse_response(ch, 16384);
            // |H|^2 is the expected output spectrum under white-noise input.
            let power = spectrum_power(&ir, n_fft);
            let total: f64 = power.iter().sum();
            let lo = ((fc - 2.0 * erb).max(0.0) / bin_hz).floor() as usize;
            let hi = (((fc + 2.0 * erb) / bin_hz).ceil() as usize).min(power.len() - 1);
            let band: f64 = power[lo..=hi].iter().sum();
            assert!(
                band / total >= 0.70,
                "channel {ch}: band fraction {}",
                band / total
            );
        }
    }
}
