//! Run configuration: a single TOML file validated up front.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ovl_core::audio::FrameGrid;
use ovl_core::cnn::TrainConfig;
use ovl_core::features::FeatureKind;
use ovl_core::mixer::SplitSizes;

use crate::commands::CliError;

/// Where source utterances come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    /// `synthetic` generates speech-like sources; `wav` reads
    /// `<root>/<speaker>/*.wav` (mono 16-bit PCM at 8 kHz).
    pub mode: String,
    pub root: Option<PathBuf>,
    #[serde(default = "default_speakers")]
    pub speakers: usize,
    #[serde(default = "default_utterances")]
    pub utterances_per_speaker: usize,
    #[serde(default = "default_utterance_seconds")]
    pub utterance_seconds: f64,
}

fn default_speakers() -> usize {
    6
}
fn default_utterances() -> usize {
    10
}
fn default_utterance_seconds() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_minutes: f64,
    pub dev_minutes: f64,
    pub test_minutes: f64,
}

impl SplitConfig {
    pub fn sizes(&self) -> SplitSizes {
        SplitSizes {
            train_s: self.train_minutes * 60.0,
            dev_s: self.dev_minutes * 60.0,
            test_s: self.test_minutes * 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_frame_len")]
    pub frame_len: usize,
    #[serde(default = "default_hop")]
    pub hop: usize,
}

fn default_frame_len() -> usize {
    200
}
fn default_hop() -> usize {
    80
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            frame_len: 200,
            hop: 80,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub kind: String,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            kind: "pykno".into(),
        }
    }
}

/// The whole run: corpus, splits, framing, feature kind, training recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub corpus: CorpusConfig,
    pub splits: SplitConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.corpus.mode.as_str() {
            "synthetic" => {
                if self.corpus.speakers < 3 {
                    return Err(CliError::Config(
                        "corpus.speakers must be at least 3".into(),
                    ));
                }
                if self.corpus.utterances_per_speaker == 0
                    || self.corpus.utterance_seconds <= 0.0
                {
                    return Err(CliError::Config("empty synthetic corpus requested".into()));
                }
            }
            "wav" => {
                let root = self.corpus.root.as_ref().ok_or_else(|| {
                    CliError::Config("corpus.root is required in wav mode".into())
                })?;
                if !root.is_dir() {
                    return Err(CliError::Config(format!(
                        "corpus.root {} is not a directory",
                        root.display()
                    )));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "corpus.mode must be 'synthetic' or 'wav', got '{other}'"
                )));
            }
        }
        if self.splits.train_minutes < 0.0
            || self.splits.dev_minutes < 0.0
            || self.splits.test_minutes < 0.0
        {
            return Err(CliError::Config("split minutes must be nonnegative".into()));
        }
        if self.grid.hop == 0 || self.grid.hop > self.grid.frame_len {
            return Err(CliError::Config(format!(
                "grid requires 1 <= hop <= frame_len, got hop {} frame_len {}",
                self.grid.hop, self.grid.frame_len
            )));
        }
        if self.feature_kind().is_none() {
            return Err(CliError::Config(format!(
                "features.kind must be one of magspec|mfb|mfcc|pykno, got '{}'",
                self.features.kind
            )));
        }
        if self.train.batch_size == 0
            || self.train.learning_rate <= 0.0
            || self.train.plateau_patience == 0
            || !(0.0..1.0).contains(&self.train.lr_factor)
        {
            return Err(CliError::Config("invalid [train] section".into()));
        }
        Ok(())
    }

    pub fn feature_kind(&self) -> Option<FeatureKind> {
        FeatureKind::parse(&self.features.kind)
    }

    pub fn frame_grid(&self) -> FrameGrid {
        FrameGrid {
            frame_len: self.grid.frame_len,
            hop: self.grid.hop,
        }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.out_dir.join("dataset")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dataset_dir().join("manifest.jsonl")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
out_dir = "/tmp/ovl-test"

[corpus]
mode = "synthetic"

[splits]
train_minutes = 2.0
dev_minutes = 1.0
test_minutes = 1.0
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.frame_len, 200);
        assert_eq!(cfg.feature_kind(), Some(FeatureKind::Pykno));
        assert_eq!(cfg.train.epochs, 200);
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.train.learning_rate, 0.001);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = format!("{MINIMAL}\nnot_a_field = 1\n");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn bad_feature_kind_rejected() {
        let bad = format!("{MINIMAL}\n[features]\nkind = \"plp\"\n");
        let cfg: RunConfig = toml::from_str(&bad).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_grid_rejected() {
        let bad = format!("{MINIMAL}\n[grid]\nframe_len = 100\nhop = 200\n");
        let cfg: RunConfig = toml::from_str(&bad).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn wav_mode_requires_existing_root() {
        let bad = MINIMAL.replace(
            "mode = \"synthetic\"",
            "mode = \"wav\"\nroot = \"/definitely/not/here\"",
        );
        let cfg: RunConfig = toml::from_str(&bad).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
