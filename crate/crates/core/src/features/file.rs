//! Binary feature file format.
//!
//! Layout: magic `FTR1`, kind code (1 byte), dim (u32 LE), frame count
//! (u32 LE), then frames x dim f32 LE values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{FeatureKind, FeatureMatrix};
use crate::error::FeatureError;

const MAGIC: &[u8; 4] = b"FTR1";

pub fn write_feature_file(fm: &FeatureMatrix, path: &Path) -> Result<(), FeatureError> {
    let mut out = Vec::with_capacity(13 + fm.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.push(fm.kind.code());
    out.extend_from_slice(&(fm.dim as u32).to_le_bytes());
    out.extend_from_slice(&(fm.frames as u32).to_le_bytes());
    for &v in fm.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_feature_file(path: &Path) -> Result<FeatureMatrix, FeatureError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 13 || &bytes[0..4] != MAGIC {
        return Err(FeatureError::Format("missing FTR1 magic".into()));
    }
    let kind = FeatureKind::from_code(bytes[4])
        .ok_or_else(|| FeatureError::Format(format!("unknown kind code {}", bytes[4])))?;
    let dim = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let frames = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if dim != kind.dim() {
        return Err(FeatureError::Format(format!(
            "dim {dim} does not match kind {kind}"
        )));
    }
    let expected = 13 + frames * dim * 4;
    if bytes.len() != expected {
        return Err(FeatureError::Format(format!(
            "payload is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let data = bytes[13..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Ok(FeatureMatrix::new(kind, frames, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ftr");
        let data: Vec<f64> = (0..2 * 40).map(|i| (i as f64 * 0.37).sin()).collect();
        let fm = FeatureMatrix::new(FeatureKind::Mfb, 2, data);
        write_feature_file(&fm, &path).unwrap();
        let back = read_feature_file(&path).unwrap();
        assert_eq!(back.kind, FeatureKind::Mfb);
        assert_eq!(back.frames, 2);
        for (a, b) in fm.data().iter().zip(back.data()) {
            assert_eq!(*a as f32, *b as f32);
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ftr");
        let fm = FeatureMatrix::new(FeatureKind::Pykno, 1, vec![0.0; 120]);
        write_feature_file(&fm, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"FTR1");
        assert_eq!(bytes[4], 3);
        assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 120);
        assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 13 + 120 * 4);
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ftr");
        let fm = FeatureMatrix::new(FeatureKind::Mfb, 2, vec![1.0; 80]);
        write_feature_file(&fm, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 5);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_feature_file(&path),
            Err(FeatureError::Format(_))
        ));
    }
}
