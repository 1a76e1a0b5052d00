//! Co-channel mixture synthesis at controlled SIR with frame labels.

mod dataset;
mod synth;

pub use dataset::{
    generate_dataset, load_manifest, read_labels, save_manifest, write_labels, Corpus,
    DatasetManifest, ManifestEntry, SplitSizes, Utterance, REUSE_CAP,
};
pub use synth::{synth_corpus, synth_speechlike};

use crate::audio::{frame_signal, AudioClip, FrameGrid};
use crate::error::MixError;
use crate::metrics::Label;

/// Per-source activity threshold relative to that source's loudest frame.
pub const VAD_THRESHOLD_DB: f64 = -40.0;

/// Recipe for one mixture: which utterances, at what SIR, from what offset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MixtureSpec {
    pub target_key: String,
    pub interferer_key: String,
    pub sir_db: f64,
    pub offset_samples: usize,
    pub seed: u64,
}

/// A mixed clip with one label per complete frame.
#[derive(Debug, Clone)]
pub struct LabeledMixture {
    pub clip: AudioClip,
    pub frame_labels: Vec<Label>,
    pub grid: FrameGrid,
    pub realized_sir_db: f64,
    /// Global factor applied after summation to keep |sample| <= 1;
    /// 1.0 when no rescale was needed.
    pub rescale_factor: f64,
}

/// Gain for the interferer so that the target-to-interferer power ratio over
/// the aligned overlap segments equals `sir_db`.
///
/// Solves 10*log10(P_t / (g^2 * P_i)) = sir_db with P the mean squared
/// amplitude of each overlap segment.
pub fn scale_to_sir(
    target_overlap: &[f64],
    interferer_overlap: &[f64],
    sir_db: f64,
) -> Result<f64, MixError> {
    let p_t = mean_power(target_overlap);
    let p_i = mean_power(interferer_overlap);
    if p_t <= 0.0 || p_i <= 0.0 {
        return Err(MixError::DegenerateSource);
    }
    Ok((p_t / p_i).sqrt() * 10f64.powf(-sir_db / 20.0))
}

fn mean_power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|&v| v * v).sum::<f64>() / x.len() as f64
}

/// Sum the interferer into the target from `spec.offset_samples`, scaled so
/// the SIR over the overlapping range equals `spec.sir_db`.
///
/// The output covers both sources end to end; if summation exceeds full
/// scale the whole mixture is rescaled by 1/peak and the factor recorded.
pub fn mix_at_offset(
    target: &AudioClip,
    interferer: &AudioClip,
    spec: &MixtureSpec,
    grid: &FrameGrid,
) -> Result<LabeledMixture, MixError> {
    if target.sample_rate_hz != interferer.sample_rate_hz {
        return Err(MixError::InvalidSpec("sample rates differ".into()));
    }
    if spec.offset_samples >= target.len() {
        return Err(MixError::InvalidSpec(format!(
            "offset {} outside target of {} samples",
            spec.offset_samples,
            target.len()
        )));
    }
    if !(0.0..=5.0).contains(&spec.sir_db) {
        return Err(MixError::InvalidSpec(format!(
            "sir {} dB outside [0, 5]",
            spec.sir_db
        )));
    }

    let offset = spec.offset_samples;
    let out_len = target.len().max(offset + interferer.len());
    let overlap_end = target.len().min(offset + interferer.len());
    let gain = scale_to_sir(
        &target.samples[offset..overlap_end],
        &interferer.samples[..overlap_end - offset],
        spec.sir_db,
    )?;

    let mut target_padded = vec![0.0; out_len];
    target_padded[..target.len()].copy_from_slice(&target.samples);
    let mut interferer_placed = vec![0.0; out_len];
    for (i, &v) in interferer.samples.iter().enumerate() {
        interferer_placed[offset + i] = gain * v;
    }

    let mut mixed: Vec<f64> = target_padded
        .iter()
        .zip(&interferer_placed)
        .map(|(&t, &i)| t + i)
        .collect();
    let peak = mixed.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let rescale_factor = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    if rescale_factor != 1.0 {
        for v in &mut mixed {
            *v *= rescale_factor;
        }
    }

    let realized_sir_db = 10.0
        * (mean_power(&target_padded[offset..overlap_end])
            / mean_power(&interferer_placed[offset..overlap_end]))
        .log10();

    let rate = target.sample_rate_hz;
    let frame_labels = label_frames(
        &AudioClip::new(target_padded, rate),
        &AudioClip::new(interferer_placed, rate),
        grid,
        VAD_THRESHOLD_DB,
    );

    Ok(LabeledMixture {
        clip: AudioClip::new(mixed, rate),
        frame_labels,
        grid: *grid,
        realized_sir_db,
        rescale_factor,
    })
}

/// Frame labels from the aligned source components.
///
/// A source is active in a frame when its frame energy exceeds
/// `vad_threshold_db` relative to that source's own loudest frame; a frame
/// is overlap when both sources are active.
pub fn label_frames(
    target: &AudioClip,
    interferer_placed: &AudioClip,
    grid: &FrameGrid,
    vad_threshold_db: f64,
) -> Vec<Label> {
    assert_eq!(target.len(), interferer_placed.len());
    let active_t = active_frames(target, grid, vad_threshold_db);
    let active_i = active_frames(interferer_placed, grid, vad_threshold_db);
    active_t
        .iter()
        .zip(&active_i)
        .map(|(&a, &b)| if a && b { Label::Overlap } else { Label::Single })
        .collect()
}

fn active_frames(clip: &AudioClip, grid: &FrameGrid, threshold_db: f64) -> Vec<bool> {
    let energies: Vec<f64> = frame_signal(clip, grid)
        .map(|f| f.iter().map(|&v| v * v).sum())
        .collect();
    let max = energies.iter().fold(0.0f64, |m, &e| m.max(e));
    if max <= 0.0 {
        return vec![false; energies.len()];
    }
    let floor = max * 10f64.powf(threshold_db / 10.0);
    energies.iter().map(|&e| e > floor).collect()
}
