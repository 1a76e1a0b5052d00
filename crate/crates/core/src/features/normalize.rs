//! Per-dimension mean/variance normalization, fit on the training split only.

use serde::{Deserialize, Serialize};

use super::{FeatureKind, FeatureMatrix};
use crate::error::FeatureError;

const STD_FLOOR: f64 = 1e-8;

/// Affine per-dimension normalizer: (x - mean) / std.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Normalizer {
    pub kind: FeatureKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Fit from a stream of feature matrices using a single Welford pass.
    pub fn fit<'a, I>(kind: FeatureKind, stream: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a FeatureMatrix>,
    {
        let dim = kind.dim();
        let mut count = 0u64;
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for fm in stream {
            assert_eq!(fm.kind, kind);
            for row in fm.rows() {
                count += 1;
                for (d, &x) in row.iter().enumerate() {
                    let delta = x - mean[d];
                    mean[d] += delta / count as f64;
                    m2[d] += delta * (x - mean[d]);
                }
            }
        }
        if count == 0 {
            return Err(FeatureError::EmptyStream);
        }
        let std = m2
            .iter()
            .map(|&v| (v / count as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Self { kind, mean, std })
    }

    pub fn apply(&self, fm: &mut FeatureMatrix) {
        assert_eq!(fm.kind, self.kind);
        let dim = self.mean.len();
        for row in fm.data_mut().chunks_exact_mut(dim) {
            for (d, x) in row.iter_mut().enumerate() {
                *x = (*x - self.mean[d]) / self.std[d];
            }
        }
    }

    /// Inverse of [`Normalizer::apply`].
    pub fn apply_inverse(&self, fm: &mut FeatureMatrix) {
        assert_eq!(fm.kind, self.kind);
        let dim = self.mean.len();
        for row in fm.data_mut().chunks_exact_mut(dim) {
            for (d, x) in row.iter_mut().enumerate() {
                *x = *x * self.std[d] + self.mean[d];
            }
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), FeatureError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| FeatureError::Format(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, FeatureError> {
        let json = std::fs::read_to_string(path)?;
        serde_json::from_str(&json).map_err(|e| FeatureError::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-dim MFB rows with only the first two dimensions populated.
    fn matrix(rows: &[[f64; 2]]) -> FeatureMatrix {
        let mut data = Vec::new();
        for r in rows {
            let mut row = vec![0.0; 40];
            row[0] = r[0];
            row[1] = r[1];
            data.extend(row);
        }
        FeatureMatrix::new(FeatureKind::Mfb, rows.len(), data)
    }

    #[test]
    fn self_normalization_is_zero_mean_unit_variance() {
        let fm = matrix(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [6.0, 5.0]]);
        let norm = Normalizer::fit(FeatureKind::Mfb, [&fm]).unwrap();
        let mut z = fm.clone();
        norm.apply(&mut z);
        let n = z.frames as f64;
        for d in 0..2 {
            let mean: f64 = z.rows().map(|r| r[d]).sum::<f64>() / n;
            let var: f64 = z.rows().map(|r| r[d] * r[d]).sum::<f64>() / n;
            assert!(mean.abs() < 1e-6, "dim {d} mean {mean}");
            if d == 0 {
                assert!((var - 1.0).abs() < 1e-3, "dim {d} var {var}");
            }
        }
    }

    #[test]
    fn constant_dimension_floors_std_and_maps_to_zero() {
        let fm = matrix(&[[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]]);
        let norm = Normalizer::fit(FeatureKind::Mfb, [&fm]).unwrap();
        assert_eq!(norm.std[1], 1e-8);
        let mut z = fm.clone();
        norm.apply(&mut z);
        assert!(z.rows().all(|r| r[1].abs() < 1e-6));
    }

    #[test]
    fn round_trip_is_identity() {
        let fm = matrix(&[[0.5, -2.0], [1.5, 4.0], [-3.0, 0.1]]);
        let norm = Normalizer::fit(FeatureKind::Mfb, [&fm]).unwrap();
        let mut z = fm.clone();
        norm.apply(&mut z);
        norm.apply_inverse(&mut z);
        for (a, b) in fm.data().iter().zip(z.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_stream_errors() {
        assert!(matches!(
            Normalizer::fit(FeatureKind::Mfb, std::iter::empty()),
            Err(FeatureError::EmptyStream)
        ));
    }
}
