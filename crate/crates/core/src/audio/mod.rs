//! Mono fixed-rate audio: ingestion, framing, pre-emphasis.

mod wav;

pub use wav::{read_wav, write_wav};

use crate::error::AudioError;

/// Canonical pipeline sample rate.
pub const SAMPLE_RATE_HZ: u32 = 8000;

/// A mono clip of real-valued samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Errors on the first non-finite sample, if any.
    pub fn check_finite(&self) -> Result<(), AudioError> {
        match self.samples.iter().position(|s| !s.is_finite()) {
            Some(i) => Err(AudioError::NonFinite(i)),
            None => Ok(()),
        }
    }
}

/// Analysis frame geometry: frame length and hop, in samples.
///
/// The canonical grid is 200/80 (25 ms frames, 10 ms hop at 8 kHz).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FrameGrid {
    pub frame_len: usize,
    pub hop: usize,
}

impl FrameGrid {
    pub const fn new(frame_len: usize, hop: usize) -> Self {
        assert!(hop >= 1 && hop <= frame_len);
        Self { frame_len, hop }
    }

    /// 25 ms frames with 10 ms hop at 8 kHz.
    pub const fn canonical() -> Self {
        Self {
            frame_len: 200,
            hop: 80,
        }
    }

    /// Number of complete frames in a clip of `n` samples.
    ///
    /// floor((n - frame_len)/hop) + 1 when n >= frame_len, else 0. Trailing
    /// partial frames are discarded.
    pub fn frame_count(&self, n: usize) -> usize {
        if n < self.frame_len {
            0
        } else {
            (n - self.frame_len) / self.hop + 1
        }
    }

    /// Start sample of frame `i`.
    pub fn frame_start(&self, i: usize) -> usize {
        i * self.hop
    }
}

/// Split a clip into complete overlapping frames; frame `i` spans samples
/// `[i*hop, i*hop + frame_len)`.
pub fn frame_signal<'a>(
    clip: &'a AudioClip,
    grid: &FrameGrid,
) -> impl ExactSizeIterator<Item = &'a [f64]> {
    let n = grid.frame_count(clip.len());
    let frame_len = grid.frame_len;
    let hop = grid.hop;
    (0..n).map(move |i| &clip.samples[i * hop..i * hop + frame_len])
}

/// First-order pre-emphasis: y(0) = x(0), y(t) = x(t) - alpha*x(t-1).
///
/// The first sample is passed through unchanged so the output length equals
/// the input length.
pub fn preemphasize(clip: &AudioClip, alpha: f64) -> AudioClip {
    assert!((0.0..1.0).contains(&alpha));
    let x = &clip.samples;
    let mut y = Vec::with_capacity(x.len());
    if let Some(&first) = x.first() {
        y.push(first);
        y.extend(x.windows(2).map(|w| w[1] - alpha * w[0]));
    }
    AudioClip::new(y, clip.sample_rate_hz)
}

/// Canonical pre-emphasis coefficient.
pub const PREEMPHASIS_ALPHA: f64 = 0.97;
