use ovl_core::cnn::Model;
use ovl_core::features::FeatureKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = Model::standard(FeatureKind::Pykno, 7);
    let x: Vec<f64> = (0..120).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // Forward only.
    let reps = 200;
    let t0 = Instant::now();
    let mut acc = 0.0;
    for _ in 0..reps {
        acc += model.forward_one(&x).unwrap();
    }
    let fwd = t0.elapsed().as_secs_f64() / reps as f64;
    println!("forward_one: {:.3} ms  ({:.1} GFLOP/s, acc {acc:.3})", fwd * 1e3, 32.5e-3 / fwd);

    // Forward + backward.
    let t0 = Instant::now();
    let mut nrm = 0.0;
    for _ in 0..reps {
        let cache = model.forward_cached(&x).unwrap();
        let g = model.backward_one(&cache, 1.0);
        nrm += g.head_b;
    }
    let both = t0.elapsed().as_secs_f64() / reps as f64;
    println!(
        "forward+backward: {:.3} ms  ({:.1} GFLOP/s, nrm {nrm:.3})",
        both * 1e3,
        97.4e-3 / both
    );

    // tanh throughput reference.
    let v: Vec<f64> = (0..1_000_000).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let t0 = Instant::now();
    let s: f64 = v.iter().map(|a| a.tanh()).sum();
    let tt = t0.elapsed().as_secs_f64();
    println!("std tanh: {:.1} M/s (s {s:.3})", 1e6 / tt / 1e6);

    let mut w = v.clone();
    let t0 = Instant::now();
    for _ in 0..10 {
        ovl_core::cnn::tanh_slice(&mut w);
    }
    let tt = t0.elapsed().as_secs_f64();
    println!("crate tanh_slice: {:.1} M/s (w {})", 10.0 / tt, w[5]);
}
