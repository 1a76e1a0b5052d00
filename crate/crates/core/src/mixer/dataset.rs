//! Dataset generation: speaker-partitioned train/dev/test manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mix_at_offset, LabeledMixture, MixtureSpec};
use crate::audio::{write_wav, AudioClip, FrameGrid};
use crate::error::MixError;
use crate::metrics::Label;

/// A corpus utterance: stable key plus its audio.
#[derive(Debug, Clone)]
pub struct Utterance {
    /// `speaker/utterance-id`.
    pub key: String,
    pub clip: AudioClip,
}

/// Speaker-keyed utterance collection. BTreeMap keeps iteration order (and
/// therefore generation) deterministic.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub speakers: BTreeMap<String, Vec<Utterance>>,
}

impl Corpus {
    pub fn get(&self, key: &str) -> Option<&Utterance> {
        let speaker = key.split('/').next()?;
        self.speakers
            .get(speaker)?
            .iter()
            .find(|u| u.key == key)
    }

    pub fn total_duration_s(&self) -> f64 {
        self.speakers
            .values()
            .flatten()
            .map(|u| u.clip.duration_s())
            .sum()
    }
}

/// Requested audio per split, in seconds of mixture output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train_s: f64,
    pub dev_s: f64,
    pub test_s: f64,
}

/// Maximum ratio of generated mixture audio to available pool audio; past
/// this the corpus would repeat utterances too heavily to be useful.
pub const REUSE_CAP: f64 = 10.0;

/// One generated mixture file and its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub mix_path: String,
    pub label_path: String,
    pub split: String,
    pub target_key: String,
    pub interferer_key: String,
    pub sir_db: f64,
    pub offset_samples: usize,
    pub seed: u64,
    pub rescale_factor: f64,
}

/// All generated mixtures plus the speaker partition they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub speaker_partition: BTreeMap<String, Vec<String>>,
}

impl DatasetManifest {
    pub fn split_entries<'a>(
        &'a self,
        split: &'a str,
    ) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

const SPLITS: [&str; 3] = ["train", "dev", "test"];

/// Generate labeled mixtures for all three splits under `out_dir`, writing
/// one WAV and one label file per mixture plus `manifest.jsonl` and
/// `speakers.json`.
///
/// Test speakers are disjoint from the train/dev pool; train and dev share
/// a pool, as only the test partition is required to be held out. SIR is
/// drawn uniformly from [0, 5] dB and the offset uniformly over the target
/// length. Deterministic for a fixed seed.
pub fn generate_dataset(
    corpus: &Corpus,
    sizes: SplitSizes,
    seed: u64,
    grid: &FrameGrid,
    out_dir: &Path,
) -> Result<DatasetManifest, MixError> {
    validate_corpus(corpus)?;
    let partition = partition_speakers(corpus, sizes, seed)?;

    let mut entries = Vec::new();
    for (split_idx, &split) in SPLITS.iter().enumerate() {
        let requested_s = match split {
            "train" => sizes.train_s,
            "dev" => sizes.dev_s,
            _ => sizes.test_s,
        };
        if requested_s <= 0.0 {
            continue;
        }
        let pool = &partition[split];
        check_capacity(corpus, pool, split, requested_s)?;
        if pool.len() < 2 {
            return Err(MixError::Corpus(format!(
                "split '{split}' has {} speaker(s); mixing needs at least 2",
                pool.len()
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(split_idx as u64 + 1)),
        );
        let mut specs: Vec<MixtureSpec> = Vec::new();
        let mut total_s = 0.0;
        while total_s < requested_s {
            let target_speaker = &pool[rng.gen_range(0..pool.len())];
            let interferer_speaker = loop {
                let s = &pool[rng.gen_range(0..pool.len())];
                if s != target_speaker {
                    break s;
                }
            };
            let t_utts = &corpus.speakers[target_speaker];
            let i_utts = &corpus.speakers[interferer_speaker];
            let t = &t_utts[rng.gen_range(0..t_utts.len())];
            let i = &i_utts[rng.gen_range(0..i_utts.len())];
            let offset = rng.gen_range(0..t.clip.len());
            let spec = MixtureSpec {
                target_key: t.key.clone(),
                interferer_key: i.key.clone(),
                sir_db: rng.gen_range(0.0..5.0),
                offset_samples: offset,
                seed: rng.gen(),
            };
            total_s += (t.clip.len().max(offset + i.clip.len())) as f64
                / t.clip.sample_rate_hz as f64;
            specs.push(spec);
        }

        let split_dir = out_dir.join(split);
        fs::create_dir_all(&split_dir)?;
        let mixtures: Vec<Result<LabeledMixture, MixError>> = specs
            .par_iter()
            .map(|spec| {
                let target = &corpus.get(&spec.target_key).unwrap().clip;
                let interferer = &corpus.get(&spec.interferer_key).unwrap().clip;
                mix_at_offset(target, interferer, spec, grid)
            })
            .collect();

        for (idx, (spec, mixture)) in specs.iter().zip(mixtures).enumerate() {
            let mixture = mixture?;
            let mix_rel = format!("{split}/mix_{idx:05}.wav");
            let label_rel = format!("{split}/mix_{idx:05}.labels");
            write_wav(&mixture.clip, &out_dir.join(&mix_rel))?;
            write_labels(&mixture.frame_labels, &out_dir.join(&label_rel))?;
            entries.push(ManifestEntry {
                mix_path: mix_rel,
                label_path: label_rel,
                split: split.to_string(),
                target_key: spec.target_key.clone(),
                interferer_key: spec.interferer_key.clone(),
                sir_db: spec.sir_db,
                offset_samples: spec.offset_samples,
                seed: spec.seed,
                rescale_factor: mixture.rescale_factor,
            });
        }
    }

    let manifest = DatasetManifest {
        entries,
        speaker_partition: partition,
    };
    save_manifest(&manifest, out_dir)?;
    Ok(manifest)
}

fn validate_corpus(corpus: &Corpus) -> Result<(), MixError> {
    if corpus.speakers.len() < 3 {
        return Err(MixError::Corpus(format!(
            "need at least 3 speakers, got {}",
            corpus.speakers.len()
        )));
    }
    for (speaker, utts) in &corpus.speakers {
        if utts.is_empty() {
            return Err(MixError::Corpus(format!("speaker {speaker} has no utterances")));
        }
        if let Some(u) = utts.iter().find(|u| u.clip.is_empty()) {
            return Err(MixError::Corpus(format!("utterance {} is empty", u.key)));
        }
    }
    Ok(())
}

/// Shuffle speakers by seed and hold out a test set sized by the requested
/// test share (at least 2 speakers when test audio is requested, so the test
/// split can mix distinct speakers). Train and dev share the remainder.
fn partition_speakers(
    corpus: &Corpus,
    sizes: SplitSizes,
    seed: u64,
) -> Result<BTreeMap<String, Vec<String>>, MixError> {
    let mut names: Vec<String> = corpus.speakers.keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a3d_11c2_90ef_5b64);
    // Fisher-Yates.
    for i in (1..names.len()).rev() {
        names.swap(i, rng.gen_range(0..=i));
    }

    let n = names.len();
    let total_s = sizes.train_s + sizes.dev_s + sizes.test_s;
    let min_test = if sizes.test_s > 0.0 { 2 } else { 1 };
    if n < min_test + 2 {
        return Err(MixError::Corpus(format!(
            "{n} speakers cannot cover a disjoint test set plus a train/dev pool"
        )));
    }
    let share = if total_s > 0.0 {
        (n as f64 * sizes.test_s / total_s).round() as usize
    } else {
        1
    };
    let test_count = share.clamp(min_test, n - 2);

    let mut test: Vec<String> = names[..test_count].to_vec();
    let mut pool: Vec<String> = names[test_count..].to_vec();
    test.sort();
    pool.sort();

    let mut partition = BTreeMap::new();
    partition.insert("train".to_string(), pool.clone());
    partition.insert("dev".to_string(), pool);
    partition.insert("test".to_string(), test);
    Ok(partition)
}

fn check_capacity(
    corpus: &Corpus,
    pool: &[String],
    split: &str,
    requested_s: f64,
) -> Result<(), MixError> {
    let available_s: f64 = pool
        .iter()
        .flat_map(|s| &corpus.speakers[s])
        .map(|u| u.clip.duration_s())
        .sum();
    if requested_s > REUSE_CAP * available_s {
        return Err(MixError::Capacity {
            split: split.to_string(),
            requested_s,
            available_s: REUSE_CAP * available_s,
        });
    }
    Ok(())
}

/// One `O`/`S` character per line.
pub fn write_labels(labels: &[Label], path: &Path) -> Result<(), std::io::Error> {
    let mut out = String::with_capacity(labels.len() * 2);
    for l in labels {
        out.push(l.code());
        out.push('\n');
    }
    fs::write(path, out)
}

pub fn read_labels(path: &Path) -> Result<Vec<Label>, MixError> {
    let file = fs::File::open(path)?;
    let mut labels = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let c = line.chars().next().unwrap();
        labels.push(Label::from_code(c).ok_or_else(|| {
            MixError::Corpus(format!("bad label character '{c}' in {}", path.display()))
        })?);
    }
    Ok(labels)
}

pub fn save_manifest(manifest: &DatasetManifest, out_dir: &Path) -> Result<(), MixError> {
    fs::create_dir_all(out_dir)?;
    let mut jsonl = fs::File::create(out_dir.join("manifest.jsonl"))?;
    for entry in &manifest.entries {
        let line = serde_json::to_string(entry)
            .map_err(|e| MixError::Corpus(format!("manifest serialization: {e}")))?;
        writeln!(jsonl, "{line}")?;
    }
    let speakers = serde_json::to_string_pretty(&manifest.speaker_partition)
        .map_err(|e| MixError::Corpus(format!("partition serialization: {e}")))?;
    fs::write(out_dir.join("speakers.json"), speakers)?;
    Ok(())
}

/// Load `manifest.jsonl` (and `speakers.json` beside it).
pub fn load_manifest(manifest_path: &Path) -> Result<(DatasetManifest, PathBuf), MixError> {
    let dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let file = fs::File::open(manifest_path)?;
    let mut entries = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(
            serde_json::from_str(&line)
                .map_err(|e| MixError::Corpus(format!("bad manifest line: {e}")))?,
        );
    }
    let speakers = fs::read_to_string(dir.join("speakers.json"))?;
    let speaker_partition = serde_json::from_str(&speakers)
        .map_err(|e| MixError::Corpus(format!("bad speakers.json: {e}")))?;
    Ok((
        DatasetManifest {
            entries,
            speaker_partition,
        },
        dir,
    ))
}
