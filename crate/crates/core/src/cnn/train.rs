//! SGD training loop with seeded shuffling and best-dev checkpointing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::loss::bce_loss;
use super::model::{Grads, Model};
use super::schedule::lr_schedule_update;
use crate::error::CnnError;
use crate::features::FeatureMatrix;
use crate::metrics::Label;

/// Training hyperparameters. The canonical recipe is 200 epochs, batch 32,
/// learning rate 0.001, halved after 3 stale epochs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub plateau_patience: usize,
    pub lr_factor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.001,
            plateau_patience: 3,
            lr_factor: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        if self.batch_size == 0
            || self.learning_rate <= 0.0
            || self.plateau_patience == 0
            || !(0.0..1.0).contains(&self.lr_factor)
        {
            return Err(CnnError::Config(format!("bad train config: {self:?}")));
        }
        Ok(())
    }
}

/// Flat frames-by-dim feature storage with one 0/1 label per frame.
#[derive(Debug, Clone, Default)]
pub struct FrameDataset {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
}

impl FrameDataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push_matrix(&mut self, fm: &FeatureMatrix, labels: &[Label]) {
        assert_eq!(fm.dim, self.dim);
        assert_eq!(fm.frames, labels.len());
        self.features.extend_from_slice(fm.data());
        self.labels
            .extend(labels.iter().map(|l| if l.is_positive() { 1.0 } else { 0.0 }));
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

/// One row of the loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: f64,
    pub lr: f64,
    pub seconds: f64,
}

/// Plain SGD: theta <- theta - lr * grad.
pub fn sgd_step(model: &mut Model, grads: &Grads, lr: f64) {
    for (layer, (gw, gb)) in model.layers.iter_mut().zip(&grads.layers) {
        for (w, &g) in layer.weights.iter_mut().zip(gw) {
            *w -= lr * g;
        }
        for (b, &g) in layer.bias.iter_mut().zip(gb) {
            *b -= lr * g;
        }
    }
    for (w, &g) in model.head.weights.iter_mut().zip(&grads.head_w) {
        *w -= lr * g;
    }
    model.head.bias -= lr * grads.head_b;
}

/// Mean loss and mean gradient over one mini-batch. Items are processed in
/// parallel but reduced in index order, so results are reproducible.
fn batch_grad(model: &Model, ds: &FrameDataset, idx: &[usize]) -> (f64, Grads) {
    let per_item: Vec<(f64, Grads)> = idx
        .par_iter()
        .map(|&i| {
            let cache = model.forward_cached(ds.row(i)).expect("validated input");
            let grads = model.backward_one(&cache, ds.labels[i]);
            (cache.p, grads)
        })
        .collect();
    let probs: Vec<f64> = per_item.iter().map(|(p, _)| *p).collect();
    let labels: Vec<f64> = idx.iter().map(|&i| ds.labels[i]).collect();
    let loss = bce_loss(&probs, &labels);
    let mut total = Grads::zeros_like(model);
    for (_, g) in &per_item {
        total.add(g);
    }
    total.scale(1.0 / idx.len() as f64);
    (loss, total)
}

/// Mean BCE of the model over a whole dataset.
pub fn dataset_loss(model: &Model, ds: &FrameDataset) -> f64 {
    let probs: Vec<f64> = (0..ds.len())
        .into_par_iter()
        .map(|i| model.forward_one(ds.row(i)).expect("validated input"))
        .collect();
    bce_loss(&probs, &ds.labels)
}

/// State carried across a resumed run: what the previous run had seen.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct WarmStart {
    pub epochs_done: usize,
    pub lr: Option<f64>,
    pub best_dev_loss: Option<f64>,
    pub dev_history: Vec<f64>,
}

/// Train for `cfg.epochs` epochs of seeded shuffled mini-batches, evaluating
/// dev loss each epoch and applying the plateau schedule. Returns the
/// best-dev-loss model and the per-epoch trace.
pub fn train(
    model: &Model,
    train_ds: &FrameDataset,
    dev_ds: &FrameDataset,
    cfg: &TrainConfig,
) -> Result<(Model, Vec<EpochStats>), CnnError> {
    train_resumed(model, train_ds, dev_ds, cfg, &WarmStart::default())
}

/// [`train`] continuing a previous run: the epoch counter starts after
/// `warm.epochs_done`, and the learning rate, best dev loss, and plateau
/// history carry over.
pub fn train_resumed(
    model: &Model,
    train_ds: &FrameDataset,
    dev_ds: &FrameDataset,
    cfg: &TrainConfig,
    warm: &WarmStart,
) -> Result<(Model, Vec<EpochStats>), CnnError> {
    cfg.validate()?;
    if train_ds.is_empty() || dev_ds.is_empty() {
        return Err(CnnError::Config("empty train or dev dataset".into()));
    }
    if train_ds.dim != model.input_dim || dev_ds.dim != model.input_dim {
        return Err(CnnError::Shape(format!(
            "model expects dim {}, got train {} / dev {}",
            model.input_dim, train_ds.dim, dev_ds.dim
        )));
    }
    model.check_input_len(train_ds.dim)?;

    let mut current = model.clone();
    let mut best = current.clone();
    let mut best_dev = warm.best_dev_loss.unwrap_or(f64::INFINITY);
    let mut lr = warm.lr.unwrap_or(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(warm.epochs_done as u64));
    let mut dev_history = warm.dev_history.clone();
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..train_ds.len()).collect();

    for epoch in warm.epochs_done + 1..=cfg.epochs {
        let started = std::time::Instant::now();
        // Fisher-Yates with the run-level generator.
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut loss_sum = 0.0;
        let mut item_count = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grads) = batch_grad(&current, train_ds, batch);
            sgd_step(&mut current, &grads, lr);
            loss_sum += loss * batch.len() as f64;
            item_count += batch.len();
        }
        let train_loss = loss_sum / item_count as f64;
        let dev_loss = dataset_loss(&current, dev_ds);
        dev_history.push(dev_loss);
        if dev_loss < best_dev {
            best_dev = dev_loss;
            best = current.clone();
        }
        lr = lr_schedule_update(&dev_history, lr, cfg.plateau_patience, cfg.lr_factor);
        trace.push(EpochStats {
            epoch,
            train_loss,
            dev_loss,
            lr,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    if trace.is_empty() {
        return Ok((current, trace));
    }
    Ok((best, trace))
}

/// Per-frame probabilities and thresholded labels.
pub fn predict(
    model: &Model,
    features: &FeatureMatrix,
    threshold: f64,
) -> Result<(Vec<Label>, Vec<f64>), CnnError> {
    if features.dim != model.input_dim {
        return Err(CnnError::Shape(format!(
            "model expects dim {}, features have {}",
            model.input_dim, features.dim
        )));
    }
    let probs: Vec<f64> = features
        .rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| model.forward_one(row).expect("validated input"))
        .collect();
    let labels = probs
        .iter()
        .map(|&p| {
            if p >= threshold {
                Label::Overlap
            } else {
                Label::Single
            }
        })
        .collect();
    Ok((labels, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    fn tiny_model(seed: u64) -> Model {
        Model::with_plan(&[4, 4, 4, 4, 4, 3], FeatureKind::Mfb, 12, seed)
    }

    /// Two separable blobs along a random direction, 12-dim.
    fn blob_dataset(n: usize, seed: u64) -> FrameDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = FrameDataset::new(12);
        for _ in 0..n {
            let label = rng.gen_bool(0.5);
            let center = if label { 0.8 } else { -0.8 };
            for d in 0..12 {
                let wiggle = rng.gen_range(-0.5..0.5);
                let v = if d % 2 == 0 { center + wiggle } else { wiggle };
                ds.features.push(v);
            }
            ds.labels.push(if label { 1.0 } else { 0.0 });
        }
        ds
    }

    fn quick_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 16,
            learning_rate: 0.05,
            plateau_patience: 3,
            lr_factor: 0.5,
            seed: 9,
        }
    }

    #[test]
    fn sgd_step_arithmetic() {
        let mut m = tiny_model(0);
        let mut g = Grads::zeros_like(&m);
        m.layers[0].weights[0] = 1.0;
        g.layers[0].0[0] = 2.0;
        sgd_step(&mut m, &g, 0.001);
        assert!((m.layers[0].weights[0] - 0.998).abs() < 1e-15);

        let before = m.clone();
        sgd_step(&mut m, &g, 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn one_step_descends_on_a_batch() {
        let m = tiny_model(3);
        let ds = blob_dataset(64, 4);
        let idx: Vec<usize> = (0..32).collect();
        let (loss_before, grads) = batch_grad(&m, &ds, &idx);
        let mut stepped = m.clone();
        sgd_step(&mut stepped, &grads, 0.01);
        let (loss_after, _) = batch_grad(&stepped, &ds, &idx);
        assert!(loss_after < loss_before, "{loss_after} !< {loss_before}");
    }

    #[test]
    fn training_reduces_loss_on_separable_task() {
        let m = tiny_model(5);
        let train_ds = blob_dataset(256, 6);
        let dev_ds = blob_dataset(64, 7);
        let (_, trace) = train(&m, &train_ds, &dev_ds, &quick_cfg(10)).unwrap();
        assert_eq!(trace.len(), 10);
        for w in trace.windows(2).take(9) {
            assert!(
                w[1].train_loss < w[0].train_loss,
                "epoch {}: {} !< {}",
                w[1].epoch,
                w[1].train_loss,
                w[0].train_loss
            );
        }
    }

    #[test]
    fn training_is_deterministic_for_fixed_seed() {
        let m = tiny_model(8);
        let train_ds = blob_dataset(128, 9);
        let dev_ds = blob_dataset(32, 10);
        let (m1, t1) = train(&m, &train_ds, &dev_ds, &quick_cfg(3)).unwrap();
        let (m2, t2) = train(&m, &train_ds, &dev_ds, &quick_cfg(3)).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            // Wall-clock differs; everything numeric must be bit-identical.
            assert_eq!(a.epoch, b.epoch);
            assert_eq!(a.train_loss, b.train_loss);
            assert_eq!(a.dev_loss, b.dev_loss);
            assert_eq!(a.lr, b.lr);
        }
        assert_eq!(m1, m2);
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let m = tiny_model(11);
        let ds = blob_dataset(32, 12);
        let (out, trace) = train(&m, &ds, &ds, &quick_cfg(0)).unwrap();
        assert!(trace.is_empty());
        assert_eq!(out, m);
    }

    #[test]
    fn empty_dataset_is_config_error() {
        let m = tiny_model(13);
        let ds = blob_dataset(16, 14);
        let empty = FrameDataset::new(12);
        assert!(matches!(
            train(&m, &empty, &ds, &quick_cfg(1)),
            Err(CnnError::Config(_))
        ));
    }

    #[test]
    fn predict_thresholds() {
        let data: Vec<f64> = (0..3 * 40).map(|i| (i as f64 * 0.1).sin()).collect();
        let fm = FeatureMatrix::new(FeatureKind::Mfb, 3, data);
        let m40 = Model::with_plan(&[4, 4, 4, 4, 4, 3], FeatureKind::Mfb, 40, 15);
        let (labels, probs) = predict(&m40, &fm, 0.0).unwrap();
        assert!(labels.iter().all(|&l| l == Label::Overlap));
        let (labels, _) = predict(&m40, &fm, 1.1).unwrap();
        assert!(labels.iter().all(|&l| l == Label::Single));
        let (labels, _) = predict(&m40, &fm, 0.5).unwrap();
        for (l, p) in labels.iter().zip(&probs) {
            assert_eq!(*l == Label::Overlap, *p >= 0.5);
        }
    }
}
