//! Per-frame spectral feature families.
//!
//! Four extractors share the 25 ms / 10 ms frame grid:
//!
//! - [`stft_magnitude`] — 257-dim magnitude spectra (512-point transform,
//!   unique half);
//! - [`mel_filterbank`] / [`extract_mfb`] — 40-dim log-Mel filterbank;
//! - [`extract_mfcc`] — 39-dim MFCC with Δ and ΔΔ;
//! - [`pyknogram`] — 120-dim gammatone/Teager pyknogram.
//!
//! Pre-emphasis is applied on the MFB/MFCC paths only.

mod cepstrum;
mod file;
mod gammatone;
mod mel;
mod normalize;
mod pyknogram;
mod stft;
mod teager;

pub use cepstrum::{dct_ii, dct_iii, deltas, extract_mfcc, lifter, lifter_weight};
pub use file::{read_feature_file, write_feature_file};
pub use gammatone::{erb_hz, erb_rate, erb_rate_inv, GammatoneBank, PYKNO_CHANNELS};
pub use mel::{extract_mfb, mel_filterbank, MelBank};
pub use normalize::Normalizer;
pub use pyknogram::{linear_row, pyknogram};
pub use stft::{stft_magnitude, FFT_SIZE, SPECTRUM_BINS};
pub use teager::{desa1, teo, Desa1Estimate};

use crate::audio::{frame_signal, AudioClip, FrameGrid, PREEMPHASIS_ALPHA};
use crate::error::FeatureError;

/// The four feature families and their fixed dimensionalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    MagSpec,
    Mfb,
    Mfcc,
    Pykno,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [
        FeatureKind::MagSpec,
        FeatureKind::Mfb,
        FeatureKind::Mfcc,
        FeatureKind::Pykno,
    ];

    pub fn dim(self) -> usize {
        match self {
            FeatureKind::MagSpec => 257,
            FeatureKind::Mfb => 40,
            FeatureKind::Mfcc => 39,
            FeatureKind::Pykno => 120,
        }
    }

    /// Single-byte code used in the feature file header.
    pub fn code(self) -> u8 {
        match self {
            FeatureKind::MagSpec => 0,
            FeatureKind::Mfb => 1,
            FeatureKind::Mfcc => 2,
            FeatureKind::Pykno => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FeatureKind::MagSpec),
            1 => Some(FeatureKind::Mfb),
            2 => Some(FeatureKind::Mfcc),
            3 => Some(FeatureKind::Pykno),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::MagSpec => "magspec",
            FeatureKind::Mfb => "mfb",
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::Pykno => "pykno",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "magspec" => Some(FeatureKind::MagSpec),
            "mfb" => Some(FeatureKind::Mfb),
            "mfcc" => Some(FeatureKind::Mfcc),
            "pykno" => Some(FeatureKind::Pykno),
            _ => None,
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// frames x dim matrix of one feature kind, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub frames: usize,
    pub dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, frames: usize, data: Vec<f64>) -> Self {
        let dim = kind.dim();
        assert_eq!(data.len(), frames * dim, "data length must be frames*dim");
        Self {
            kind,
            frames,
            dim,
            data,
        }
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.dim..(frame + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Extract the named feature family with its canonical front-end settings.
pub fn extract(
    kind: FeatureKind,
    clip: &AudioClip,
    grid: &FrameGrid,
) -> Result<FeatureMatrix, FeatureError> {
    match kind {
        FeatureKind::MagSpec => Ok(stft_magnitude(clip, grid)),
        FeatureKind::Mfb => Ok(extract_mfb(clip, grid)),
        FeatureKind::Mfcc => Ok(extract_mfcc(clip, grid)),
        FeatureKind::Pykno => {
            let bank = GammatoneBank::canonical(clip.sample_rate_hz as f64)?;
            Ok(pyknogram(clip, &bank, grid))
        }
    }
}

/// Log-energy floor shared by the log-compressed features.
pub(crate) const LOG_FLOOR: f64 = 1e-10;

pub(crate) fn preemphasized(clip: &AudioClip) -> AudioClip {
    crate::audio::preemphasize(clip, PREEMPHASIS_ALPHA)
}

pub(crate) fn frames_of<'a>(
    clip: &'a AudioClip,
    grid: &FrameGrid,
) -> impl ExactSizeIterator<Item = &'a [f64]> {
    frame_signal(clip, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_dims_are_fixed() {
        assert_eq!(FeatureKind::MagSpec.dim(), 257);
        assert_eq!(FeatureKind::Mfb.dim(), 40);
        assert_eq!(FeatureKind::Mfcc.dim(), 39);
        assert_eq!(FeatureKind::Pykno.dim(), 120);
    }

    #[test]
    fn kind_codes_round_trip() {
        for kind in FeatureKind::ALL {
            assert_eq!(FeatureKind::from_code(kind.code()), Some(kind));
            assert_eq!(FeatureKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(FeatureKind::from_code(9), None);
    }
}
