use std::time::Instant;

use ovl_core::audio::FrameGrid;
use ovl_core::cnn::{predict, train, FrameDataset, Model, TrainConfig};
use ovl_core::features::{extract, FeatureKind, Normalizer};
use ovl_core::metrics::{accuracy, confusion, fscore, Label};
use ovl_core::mixer::{generate_dataset, read_labels, synth_corpus, SplitSizes};

fn main() {
    let t0 = Instant::now();
    let grid = FrameGrid::canonical();
    let corpus = synth_corpus(6, 10, 5.0, 11);
    let dir = std::env::temp_dir().join("ovl_toy_e2e");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let sizes = SplitSizes {
        train_s: 240.0,
        dev_s: 60.0,
        test_s: 60.0,
    };
    let manifest = generate_dataset(&corpus, sizes, 7, &grid, &dir).unwrap();
    println!("[{:.1}s] synth done: {} mixtures", t0.elapsed().as_secs_f64(), manifest.entries.len());

    let kind = FeatureKind::Pykno;
    let mut split_data: std::collections::BTreeMap<String, (Vec<ovl_core::features::FeatureMatrix>, Vec<Vec<Label>>)> =
        Default::default();
    use rayon::prelude::*;
    let feats: Vec<(String, ovl_core::features::FeatureMatrix, Vec<Label>)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let clip = ovl_core::audio::read_wav(&dir.join(&e.mix_path), 8000).unwrap();
            let fm = extract(kind, &clip, &grid).unwrap();
            let labels = read_labels(&dir.join(&e.label_path)).unwrap();
            assert_eq!(fm.frames, labels.len());
            (e.split.clone(), fm, labels)
        })
        .collect();
    for (split, fm, labels) in feats {
        let entry = split_data.entry(split).or_default();
        entry.0.push(fm);
        entry.1.push(labels);
    }
    println!("[{:.1}s] featurize done", t0.elapsed().as_secs_f64());

    let norm = Normalizer::fit(kind, split_data["train"].0.iter()).unwrap();
    let mut datasets: std::collections::BTreeMap<String, FrameDataset> = Default::default();
    for (split, (mats, labels)) in &split_data {
        let mut ds = FrameDataset::new(kind.dim());
        for (fm, ls) in mats.iter().zip(labels) {
            let mut fm = fm.clone();
            norm.apply(&mut fm);
            ds.push_matrix(&fm, ls);
        }
        let pos = ds.labels.iter().sum::<f64>() / ds.len() as f64;
        println!("  {split}: {} frames, {:.1}% overlap", ds.len(), pos * 100.0);
        datasets.insert(split.clone(), ds);
    }

    let model = Model::standard(kind, 1234);
    let cfg = TrainConfig {
        epochs: 3,
        seed: 99,
        ..TrainConfig::default()
    };
    let (best, trace) = train(&model, &datasets["train"], &datasets["dev"], &cfg).unwrap();
    for e in &trace {
        println!(
            "  epoch {}: train {:.4} dev {:.4} lr {:.5} ({:.1}s)",
            e.epoch, e.train_loss, e.dev_loss, e.lr, e.seconds
        );
    }

    // Evaluate on test.
    let test = &datasets["test"];
    let fm = ovl_core::features::FeatureMatrix::new(kind, test.len(), test.features.clone());
    let (pred, _probs) = predict(&best, &fm, 0.5).unwrap();
    let truth: Vec<Label> = test
        .labels
        .iter()
        .map(|&y| if y > 0.5 { Label::Overlap } else { Label::Single })
        .collect();
    let cm = confusion(&pred, &truth).unwrap();
    println!(
        "[{:.1}s] test accuracy {:.4}  fscore {:.4}",
        t0.elapsed().as_secs_f64(),
        accuracy(&cm).unwrap(),
        fscore(&cm).unwrap()
    );
}
