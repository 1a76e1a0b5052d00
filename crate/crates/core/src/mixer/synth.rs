//! Synthetic speech-like sources for corpus-free runs and tests.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Utterance};
use crate::audio::{AudioClip, SAMPLE_RATE_HZ};

/// A loosely voice-like clip: a harmonic pulse train with light vibrato and
/// syllable-rate amplitude modulation, plus low-level pink-ish noise.
/// Peak-normalized to 0.9 and deterministic for a fixed seed.
pub fn synth_speechlike(duration_s: f64, f0_hz: f64, seed: u64) -> AudioClip {
    assert!((50.0..=400.0).contains(&f0_hz), "f0 {f0_hz} outside 50..400");
    let fs = SAMPLE_RATE_HZ as f64;
    let n = (duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_harmonics = ((3600.0 / f0_hz).floor() as usize).max(1);
    let harmonic_phases: Vec<f64> = (0..n_harmonics)
        .map(|_| rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
        .collect();
    let vibrato_rate = 3.0 + 3.0 * rng.gen::<f64>();
    let vibrato_phase = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    let am_rate = 2.0 + 2.0 * rng.gen::<f64>();
    let am_phase = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut samples = Vec::with_capacity(n);
    let mut base_phase = 0.0f64;
    let mut noise_state = 0.0f64;
    for i in 0..n {
        let t = i as f64 / fs;
        let f0_now = f0_hz * (1.0 + 0.008 * (two_pi * vibrato_rate * t + vibrato_phase).sin());
        base_phase += two_pi * f0_now / fs;

        let mut voiced = 0.0;
        for (h, &phi) in harmonic_phases.iter().enumerate() {
            let k = (h + 1) as f64;
            voiced += (base_phase * k + phi).sin() / k;
        }
        let envelope = 0.55 + 0.45 * (two_pi * am_rate * t + am_phase).sin();

        let white = rng.gen::<f64>() * 2.0 - 1.0;
        noise_state = 0.6 * noise_state + 0.4 * white;

        samples.push(envelope * (voiced + 0.08 * noise_state));
    }

    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        let g = 0.9 / peak;
        for v in &mut samples {
            *v *= g;
        }
    }
    AudioClip::new(samples, SAMPLE_RATE_HZ)
}

/// Synthetic multi-speaker corpus. Speakers get distinct base pitches spread
/// log-uniformly over 95..280 Hz; each utterance jitters its speaker's pitch
/// by a few percent.
pub fn synth_corpus(
    n_speakers: usize,
    utterances_per_speaker: usize,
    utterance_s: f64,
    seed: u64,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5f3c_9d1a_7b42_e680);
    let (lo, hi) = (95.0f64, 280.0f64);
    let mut speakers = BTreeMap::new();
    for s in 0..n_speakers {
        let frac = if n_speakers > 1 {
            s as f64 / (n_speakers - 1) as f64
        } else {
            0.5
        };
        let base_f0 = lo * (hi / lo).powf(frac);
        let speaker_id = format!("spk{s:02}");
        let utterances = (0..utterances_per_speaker)
            .map(|u| {
                let f0 = base_f0 * (1.0 + 0.04 * (rng.gen::<f64>() * 2.0 - 1.0));
                let utt_seed = rng.gen::<u64>();
                Utterance {
                    key: format!("{speaker_id}/utt{u:03}"),
                    clip: synth_speechlike(utterance_s, f0, utt_seed),
                }
            })
            .collect();
        speakers.insert(speaker_id, utterances);
    }
    Corpus { speakers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_second_is_8000_samples() {
        let clip = synth_speechlike(1.0, 120.0, 7);
        assert_eq!(clip.len(), 8000);
        assert_eq!(clip.sample_rate_hz, 8000);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = synth_speechlike(0.5, 150.0, 42);
        let b = synth_speechlike(0.5, 150.0, 42);
        assert_eq!(a.samples, b.samples);
        let c = synth_speechlike(0.5, 150.0, 43);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn peak_normalized_to_nine_tenths() {
        let clip = synth_speechlike(1.0, 200.0, 5);
        let peak = clip.samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!((peak - 0.9).abs() < 1e-12);
    }

    #[test]
    fn dominant_spectral_peak_near_f0() {
        let clip = synth_speechlike(2.0, 120.0, 9);
        // Brute-force DFT magnitude on a 1 Hz grid over 50..400 Hz.
        let n = clip.len();
        let mut best = (0.0f64, 0.0f64);
        for f in 50..=400 {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &x) in clip.samples.iter().enumerate() {
                let phi = 2.0 * PI * f as f64 * i as f64 / 8000.0;
                re += x * phi.cos();
                im -= x * phi.sin();
            }
            let mag = (re * re + im * im).sqrt() / n as f64;
            if mag > best.1 {
                best = (f as f64, mag);
            }
        }
        assert!((best.0 - 120.0).abs() <= 5.0, "peak at {} Hz", best.0);
    }

    #[test]
    fn corpus_shape_and_keys() {
        let corpus = synth_corpus(3, 2, 0.3, 11);
        assert_eq!(corpus.speakers.len(), 3);
        let utts = &corpus.speakers["spk01"];
        assert_eq!(utts.len(), 2);
        assert_eq!(utts[0].key, "spk01/utt000");
        assert_eq!(utts[0].clip.len(), 2400);
    }
}
