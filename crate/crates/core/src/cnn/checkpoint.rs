//! Binary model checkpoints.
//!
//! Layout: magic `OVL1`, format version (u32 LE), feature kind code (1
//! byte), input dim (u32 LE), layer count (u32 LE), per-layer headers of
//! (in, out, kernel) u32 LE triples -- the pooling head is recorded as a
//! final (channels, 1, 1) entry -- then all parameters as f64 LE (each conv
//! layer's weights then biases, then head weights and bias), and a trailing
//! CRC32 over everything before it.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::model::{ConvLayer, HeadLayer, Model, KERNEL_SIZE};
use crate::error::CnnError;
use crate::features::FeatureKind;

const MAGIC: &[u8; 4] = b"OVL1";
const VERSION: u32 = 1;

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<(), CnnError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(model.kind.code());
    out.extend_from_slice(&(model.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&((model.layers.len() + 1) as u32).to_le_bytes());
    for layer in &model.layers {
        out.extend_from_slice(&(layer.in_channels as u32).to_le_bytes());
        out.extend_from_slice(&(layer.out_channels as u32).to_le_bytes());
        out.extend_from_slice(&(KERNEL_SIZE as u32).to_le_bytes());
    }
    out.extend_from_slice(&(model.head.weights.len() as u32).to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes());

    for layer in &model.layers {
        for &w in &layer.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for &b in &layer.bias {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    for &w in &model.head.weights {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.head.bias.to_le_bytes());

    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Model, CnnError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 21 {
        return Err(CnnError::Checksum("file too short".into()));
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    if crc32(body) != stored {
        return Err(CnnError::Checksum("CRC32 mismatch".into()));
    }
    if &body[0..4] != MAGIC {
        return Err(CnnError::Checksum("missing OVL1 magic".into()));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CnnError::Incompatible(format!(
            "format version {version}, expected {VERSION}"
        )));
    }
    let kind = FeatureKind::from_code(body[8])
        .ok_or_else(|| CnnError::Incompatible(format!("unknown feature kind code {}", body[8])))?;
    let input_dim = u32::from_le_bytes(body[9..13].try_into().unwrap()) as usize;
    let n_layers = u32::from_le_bytes(body[13..17].try_into().unwrap()) as usize;
    if n_layers < 2 {
        return Err(CnnError::Incompatible("no layers".into()));
    }

    let mut off = 17;
    let mut headers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        if off + 12 > body.len() {
            return Err(CnnError::Checksum("truncated layer headers".into()));
        }
        let input = u32::from_le_bytes(body[off..off + 4].try_into().unwrap()) as usize;
        let out = u32::from_le_bytes(body[off + 4..off + 8].try_into().unwrap()) as usize;
        let kernel = u32::from_le_bytes(body[off + 8..off + 12].try_into().unwrap()) as usize;
        headers.push((input, out, kernel));
        off += 12;
    }

    let read_f64 = |off: &mut usize| -> Result<f64, CnnError> {
        if *off + 8 > body.len() {
            return Err(CnnError::Checksum("truncated parameters".into()));
        }
        let v = f64::from_le_bytes(body[*off..*off + 8].try_into().unwrap());
        *off += 8;
        Ok(v)
    };

    let mut layers = Vec::with_capacity(n_layers - 1);
    for &(input, out, kernel) in &headers[..n_layers - 1] {
        if kernel != KERNEL_SIZE {
            return Err(CnnError::Incompatible(format!(
                "conv kernel {kernel}, expected {KERNEL_SIZE}"
            )));
        }
        let mut weights = Vec::with_capacity(out * input * kernel);
        for _ in 0..out * input * kernel {
            weights.push(read_f64(&mut off)?);
        }
        let mut bias = Vec::with_capacity(out);
        for _ in 0..out {
            bias.push(read_f64(&mut off)?);
        }
        layers.push(ConvLayer {
            in_channels: input,
            out_channels: out,
            weights,
            bias,
        });
    }

    let (head_in, head_out, head_kernel) = headers[n_layers - 1];
    if head_out != 1 || head_kernel != 1 {
        return Err(CnnError::Incompatible("malformed head layer header".into()));
    }
    if head_in != layers.last().unwrap().out_channels {
        return Err(CnnError::Incompatible(
            "head width does not match final conv layer".into(),
        ));
    }
    let mut head_weights = Vec::with_capacity(head_in);
    for _ in 0..head_in {
        head_weights.push(read_f64(&mut off)?);
    }
    let head_bias = read_f64(&mut off)?;
    if off != body.len() {
        return Err(CnnError::Checksum("trailing bytes after parameters".into()));
    }

    Ok(Model {
        layers,
        head: HeadLayer {
            weights: head_weights,
            bias: head_bias,
        },
        kind,
        input_dim,
    })
}

/// CRC-32 (IEEE 802.3, reflected), table-driven.
fn crc32(data: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (i, entry) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 { 0xedb8_8320 ^ (c >> 1) } else { c >> 1 };
        }
        *entry = c;
    }
    let mut crc = 0xffff_ffffu32;
    for &b in data {
        crc = table[((crc ^ b as u32) & 0xff) as usize] ^ (crc >> 8);
    }
    !crc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        Model::with_plan(&[4, 4, 4, 4, 4, 3], FeatureKind::Pykno, 120, 21)
    }

    #[test]
    fn crc32_known_vector() {
        // Standard check value for "123456789".
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = model();
        save_checkpoint(&m, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn truncated_file_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&model(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 9);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CnnError::Checksum(_))
        ));
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&model(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CnnError::Checksum(_))
        ));
    }

    #[test]
    fn checkpoint_records_kind_and_dim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&model(), &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.kind, FeatureKind::Pykno);
        assert_eq!(back.input_dim, 120);
        // A 39-dim MFCC matrix must be rejected by shape checking.
        let fm = crate::features::FeatureMatrix::new(FeatureKind::Mfcc, 1, vec![0.0; 39]);
        assert!(super::super::train::predict(&back, &fm, 0.5).is_err());
    }
}
