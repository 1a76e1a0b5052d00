use ovl_core::cnn::{train, FrameDataset, Model, TrainConfig};
use ovl_core::features::FeatureKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dim = 120;
    let n_train = 4000;
    let n_dev = 1000;
    let mut train_ds = FrameDataset::new(dim);
    for _ in 0..n_train {
        for _ in 0..dim {
            train_ds.features.push(rng.gen_range(-1.0..1.0));
        }
        train_ds.labels.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    let mut dev_ds = FrameDataset::new(dim);
    for _ in 0..n_dev {
        for _ in 0..dim {
            dev_ds.features.push(rng.gen_range(-1.0..1.0));
        }
        dev_ds.labels.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }

    let model = Model::standard(FeatureKind::Pykno, 7);
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let (_, trace) = train(&model, &train_ds, &dev_ds, &cfg).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "1 epoch over {n_train} train + {n_dev} dev frames: {dt:.2}s  ({:.1} frames/s train-equivalent)",
        (n_train as f64 + n_dev as f64 / 3.0) / dt
    );
    println!("trace: {:?}", trace);
    let per_24k = dt * 24000.0 / (n_train as f64 + n_dev as f64 / 3.0);
    println!("projected epoch at 24000 train frames: {per_24k:.1}s");
}
