//! Frame-level overlapping-speech detection toolkit.
//!
//! The pipeline runs in four stages, each usable on its own:
//!
//! 1. [`mixer`] — synthesize co-channel speech mixtures at a controlled
//!    signal-to-interference ratio, with per-frame overlap/single labels.
//! 2. [`features`] — per-frame spectral features: 257-dim magnitude spectra,
//!    40-dim log-Mel filterbank, 39-dim MFCC (+Δ, ΔΔ), and the 120-dim
//!    gammatone/Teager pyknogram.
//! 3. [`cnn`] — a from-scratch 1-D convolutional binary classifier with
//!    analytic backpropagation, SGD, and a plateau learning-rate schedule.
//! 4. [`metrics`] — confusion-matrix metrics plus ROC and precision-recall
//!    curves over frame-level scores.
//!
//! All audio is mono 16-bit PCM at 8 kHz; frames are 25 ms with a 10 ms hop.

pub mod audio;
pub mod cnn;
pub mod error;
pub mod features;
pub mod metrics;
pub mod mixer;

pub use audio::{AudioClip, FrameGrid};
pub use error::{AudioError, CnnError, FeatureError, MetricError, MixError};
