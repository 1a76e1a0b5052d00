//! RIFF/WAVE reader and writer for mono 16-bit PCM.
//!
//! This is the only container the pipeline accepts. Anything else (float
//! PCM, multi-channel, other rates) is rejected rather than converted, so
//! corpus problems surface immediately instead of as silent resampling.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::AudioClip;
use crate::error::AudioError;

const PCM_SCALE: f64 = 32768.0;

/// Read a mono 16-bit PCM WAV file. Samples are scaled by 1/32768 into
/// [-1, 1). A sample rate other than `expected_rate_hz` is an error; the
/// caller decides whether to resample offline.
pub fn read_wav(path: &Path, expected_rate_hz: u32) -> Result<AudioClip, AudioError> {
    let bytes = fs::read(path)?;
    parse_wav(&bytes, expected_rate_hz)
}

fn parse_wav(bytes: &[u8], expected_rate_hz: u32) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::Format("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut off = 12;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap()) as usize;
        let body_end = off + 8 + size;
        if body_end > bytes.len() {
            return Err(AudioError::Format(format!(
                "chunk '{}' overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[off + 8..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioError::Format("fmt chunk too short".into()));
                }
                let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        off = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| AudioError::Format("missing fmt chunk".into()))?;
    if format != 1 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "wave format tag {format}, only PCM (1) supported"
        )));
    }
    if channels != 1 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{channels} channels, only mono supported"
        )));
    }
    if bits != 16 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{bits}-bit samples, only 16-bit supported"
        )));
    }
    if rate != expected_rate_hz {
        return Err(AudioError::RateMismatch {
            found: rate,
            expected: expected_rate_hz,
        });
    }

    let data = data.ok_or_else(|| AudioError::Format("missing data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(AudioError::Format("data chunk has odd byte length".into()));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / PCM_SCALE)
        .collect();
    Ok(AudioClip::new(samples, rate))
}

/// Write a clip as mono 16-bit PCM. Samples are clamped to [-1, 1] and
/// quantized by rounding, so a read-back differs by at most 1/32768.
pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<(), AudioError> {
    clip.check_finite()?;
    let mut pcm = Vec::with_capacity(clip.len() * 2);
    for &s in &clip.samples {
        let q = (s * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
        pcm.extend_from_slice(&q.to_le_bytes());
    }

    let data_len = pcm.len() as u32;
    let mut out = Vec::with_capacity(44 + pcm.len());
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    out.extend_from_slice(&pcm);

    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}
