//! Model parameters, forward pass, and analytic backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::tanh_slice;
use super::loss::{sigmoid, BCE_EPS};
use crate::error::CnnError;
use crate::features::FeatureKind;

/// Every convolution uses kernel size 2.
pub const KERNEL_SIZE: usize = 2;

/// The classifier always stacks 6 convolutional layers.
pub const CONV_LAYERS: usize = 6;

/// Output channels per layer: five 128-channel layers, then 32.
pub const STANDARD_PLAN: [usize; CONV_LAYERS] = [128, 128, 128, 128, 128, 32];

/// Shortest input the conv stack accepts (each layer shrinks length by 1).
pub const MIN_INPUT_LEN: usize = CONV_LAYERS + 1;

/// One 1-D convolution: weights are `[out][in][KERNEL_SIZE]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    fn init(in_channels: usize, out_channels: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (1.0 / (in_channels * KERNEL_SIZE) as f64).sqrt();
        let weights = (0..out_channels * in_channels * KERNEL_SIZE)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        Self {
            in_channels,
            out_channels,
            weights,
            bias: vec![0.0; out_channels],
        }
    }

    /// Valid convolution plus tanh, writing `out_channels x (len_in - 1)`.
    fn forward_into(&self, x: &[f64], len_in: usize, y: &mut Vec<f64>) {
        let len_out = len_in - (KERNEL_SIZE - 1);
        y.clear();
        y.resize(self.out_channels * len_out, 0.0);
        for o in 0..self.out_channels {
            let yo = &mut y[o * len_out..(o + 1) * len_out];
            yo.fill(self.bias[o]);
            for i in 0..self.in_channels {
                let xi = &x[i * len_in..(i + 1) * len_in];
                let base = (o * self.in_channels + i) * KERNEL_SIZE;
                let (w0, w1) = (self.weights[base], self.weights[base + 1]);
                for ((v, &x0), &x1) in yo.iter_mut().zip(&xi[..len_out]).zip(&xi[1..]) {
                    *v = w1.mul_add(x1, w0.mul_add(x0, *v));
                }
            }
        }
        tanh_slice(y);
    }
}

/// Mean-pool over positions followed by an affine map to one logit.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadLayer {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl HeadLayer {
    fn init(channels: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (1.0 / channels as f64).sqrt();
        Self {
            weights: (0..channels).map(|_| rng.gen_range(-limit..limit)).collect(),
            bias: 0.0,
        }
    }
}

/// The full classifier: conv stack plus pooling head, tagged with the
/// feature kind and input dimensionality it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub layers: Vec<ConvLayer>,
    pub head: HeadLayer,
    pub kind: FeatureKind,
    pub input_dim: usize,
}

impl Model {
    /// Standard architecture (1 -> 128 x5 -> 32) for one feature family.
    pub fn standard(kind: FeatureKind, seed: u64) -> Self {
        Self::with_plan(&STANDARD_PLAN, kind, kind.dim(), seed)
    }

    /// Custom channel plan, used by the tests' small models. The plan lists
    /// the output channels of each of the 6 layers.
    pub fn with_plan(plan: &[usize; CONV_LAYERS], kind: FeatureKind, input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(CONV_LAYERS);
        let mut in_channels = 1;
        for &out_channels in plan {
            layers.push(ConvLayer::init(in_channels, out_channels, &mut rng));
            in_channels = out_channels;
        }
        let head = HeadLayer::init(in_channels, &mut rng);
        Self {
            layers,
            head,
            kind,
            input_dim,
        }
    }

    /// Conv-stack output length for an input of length `len`.
    pub fn conv_output_len(&self, len: usize) -> usize {
        len - CONV_LAYERS * (KERNEL_SIZE - 1)
    }

    pub fn check_input_len(&self, len: usize) -> Result<(), CnnError> {
        if len < MIN_INPUT_LEN {
            return Err(CnnError::Shape(format!(
                "input length {len} shorter than {MIN_INPUT_LEN}"
            )));
        }
        Ok(())
    }

    /// Probability that the frame is overlap.
    pub fn forward_one(&self, input: &[f64]) -> Result<f64, CnnError> {
        Ok(self.forward_cached(input)?.p)
    }

    /// Forward pass retaining every activation for backpropagation.
    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache, CnnError> {
        self.check_input_len(input.len())?;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(CONV_LAYERS + 1);
        acts.push(input.to_vec());
        let mut len = input.len();
        for layer in &self.layers {
            let mut out = Vec::new();
            layer.forward_into(acts.last().unwrap(), len, &mut out);
            len -= KERNEL_SIZE - 1;
            acts.push(out);
        }

        let channels = self.layers.last().unwrap().out_channels;
        let last = acts.last().unwrap();
        let mut pooled = Vec::with_capacity(channels);
        for c in 0..channels {
            let row = &last[c * len..(c + 1) * len];
            pooled.push(row.iter().sum::<f64>() / len as f64);
        }
        let z = self.head.bias
            + self
                .head
                .weights
                .iter()
                .zip(&pooled)
                .map(|(&w, &a)| w * a)
                .sum::<f64>();
        let p = sigmoid(z);
        Ok(ForwardCache { acts, pooled, p })
    }

    /// Gradients of the per-item BCE loss with respect to every parameter.
    ///
    /// `cache` must come from `forward_cached` on this model. The gradient
    /// is exact for the clamped loss: inside the clamp band dL/dz = p - y,
    /// outside it the loss is constant and the gradient is zero.
    pub fn backward_one(&self, cache: &ForwardCache, y: f64) -> Grads {
        let p = cache.p;
        let g = if (BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
            p - y
        } else {
            0.0
        };

        let head_w: Vec<f64> = cache.pooled.iter().map(|&a| g * a).collect();
        let head_b = g;

        let last_len = cache.acts.last().unwrap().len() / self.layers.last().unwrap().out_channels;
        // Gradient w.r.t. the last conv layer's post-tanh activations.
        let mut d_act: Vec<f64> = {
            let mut d = Vec::with_capacity(cache.acts.last().unwrap().len());
            for &w in &self.head.weights {
                let per_pos = g * w / last_len as f64;
                d.extend(std::iter::repeat(per_pos).take(last_len));
            }
            d
        };

        let mut layer_grads: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(CONV_LAYERS);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.acts[l];
            let y_out = &cache.acts[l + 1];
            let len_out = y_out.len() / layer.out_channels;
            let len_in = len_out + KERNEL_SIZE - 1;

            // Through tanh: d_pre = d_act * (1 - y^2).
            let mut d_pre = d_act;
            for (d, &yv) in d_pre.iter_mut().zip(y_out) {
                *d *= 1.0 - yv * yv;
            }

            let mut w_grad = vec![0.0; layer.weights.len()];
            let mut b_grad = Vec::with_capacity(layer.out_channels);
            for o in 0..layer.out_channels {
                let dzo = &d_pre[o * len_out..(o + 1) * len_out];
                b_grad.push(dzo.iter().sum::<f64>());
                let mut i = 0;
                // Four input rows share each dz chunk load.
                while i + 4 <= layer.in_channels {
                    let rows = [
                        &x[i * len_in..(i + 1) * len_in],
                        &x[(i + 1) * len_in..(i + 2) * len_in],
                        &x[(i + 2) * len_in..(i + 3) * len_in],
                        &x[(i + 3) * len_in..(i + 4) * len_in],
                    ];
                    let quad = dot_shift2_x4(dzo, &rows);
                    for (j, &(s0, s1)) in quad.iter().enumerate() {
                        let base = (o * layer.in_channels + i + j) * KERNEL_SIZE;
                        w_grad[base] = s0;
                        w_grad[base + 1] = s1;
                    }
                    i += 4;
                }
                for i in i..layer.in_channels {
                    let xi = &x[i * len_in..(i + 1) * len_in];
                    let (s0, s1) = dot_shift2(dzo, xi);
                    let base = (o * layer.in_channels + i) * KERNEL_SIZE;
                    w_grad[base] = s0;
                    w_grad[base + 1] = s1;
                }
            }
            layer_grads.push((w_grad, b_grad));

            if l == 0 {
                d_act = Vec::new();
            } else {
                // Full correlation, fused so each dx element is touched once:
                // dx[i][t] += w0*dz[t] + w1*dz[t-1].
                let mut dx = vec![0.0; layer.in_channels * len_in];
                for o in 0..layer.out_channels {
                    let dzo = &d_pre[o * len_out..(o + 1) * len_out];
                    for i in 0..layer.in_channels {
                        let base = (o * layer.in_channels + i) * KERNEL_SIZE;
                        let (w0, w1) = (layer.weights[base], layer.weights[base + 1]);
                        let dxi = &mut dx[i * len_in..(i + 1) * len_in];
                        dxi[0] = w0.mul_add(dzo[0], dxi[0]);
                        for ((v, &d0), &d1) in dxi[1..len_out]
                            .iter_mut()
                            .zip(&dzo[1..])
                            .zip(&dzo[..len_out - 1])
                        {
                            *v = w1.mul_add(d1, w0.mul_add(d0, *v));
                        }
                        dxi[len_out] = w1.mul_add(dzo[len_out - 1], dxi[len_out]);
                    }
                }
                d_act = dx;
            }
        }
        layer_grads.reverse();

        Grads {
            layers: layer_grads,
            head_w,
            head_b,
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum::<usize>()
            + self.head.weights.len()
            + 1
    }
}

/// Activations retained by `forward_cached`: `acts[0]` is the input,
/// `acts[l+1]` the post-tanh output of layer `l`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub acts: Vec<Vec<f64>>,
    pub pooled: Vec<f64>,
    pub p: f64,
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone)]
pub struct Grads {
    /// Per layer: (weight grads, bias grads), same layout as the layer.
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl Grads {
    pub fn zeros_like(model: &Model) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
            head_w: vec![0.0; model.head.weights.len()],
            head_b: 0.0,
        }
    }

    pub fn add(&mut self, other: &Grads) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            for (v, &o) in w.iter_mut().zip(ow) {
                *v += o;
            }
            for (v, &o) in b.iter_mut().zip(ob) {
                *v += o;
            }
        }
        for (v, &o) in self.head_w.iter_mut().zip(&other.head_w) {
            *v += o;
        }
        self.head_b += other.head_b;
    }

    pub fn scale(&mut self, k: f64) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut() {
                *v *= k;
            }
            for v in b.iter_mut() {
                *v *= k;
            }
        }
        for v in &mut self.head_w {
            *v *= k;
        }
        self.head_b *= k;
    }

    pub fn norm(&self) -> f64 {
        let mut s = self.head_b * self.head_b;
        for (w, b) in &self.layers {
            s += w.iter().map(|v| v * v).sum::<f64>();
            s += b.iter().map(|v| v * v).sum::<f64>();
        }
        s += self.head_w.iter().map(|v| v * v).sum::<f64>();
        s.sqrt()
    }
}

/// [`dot_shift2`] against four x-rows at once, sharing each chunk of `a`.
fn dot_shift2_x4(a: &[f64], rows: &[&[f64]; 4]) -> [(f64, f64); 4] {
    const L: usize = 4;
    let n = a.len();
    let mut s0 = [[0.0f64; L]; 4];
    let mut s1 = [[0.0f64; L]; 4];
    let chunks = n / L;
    for c in 0..chunks {
        let b = c * L;
        let d = &a[b..b + L];
        for j in 0..4 {
            let x0 = &rows[j][b..b + L];
            let x1 = &rows[j][b + 1..b + 1 + L];
            for l in 0..L {
                s0[j][l] = d[l].mul_add(x0[l], s0[j][l]);
                s1[j][l] = d[l].mul_add(x1[l], s1[j][l]);
            }
        }
    }
    let mut out = [(0.0, 0.0); 4];
    for j in 0..4 {
        let mut r0 = (s0[j][0] + s0[j][1]) + (s0[j][2] + s0[j][3]);
        let mut r1 = (s1[j][0] + s1[j][1]) + (s1[j][2] + s1[j][3]);
        for t in chunks * L..n {
            r0 += a[t] * rows[j][t];
            r1 += a[t] * rows[j][t + 1];
        }
        out[j] = (r0, r1);
    }
    out
}

/// Two shifted dot products in one pass: (sum a[t]*x[t], sum a[t]*x[t+1]).
/// Eight independent accumulators keep the reduction vectorizable while the
/// summation order stays fixed.
fn dot_shift2(a: &[f64], x: &[f64]) -> (f64, f64) {
    const LANES: usize = 8;
    let n = a.len();
    debug_assert!(x.len() >= n + 1);
    let mut s0 = [0.0f64; LANES];
    let mut s1 = [0.0f64; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let b = c * LANES;
        let aa = &a[b..b + LANES];
        let x0 = &x[b..b + LANES];
        let x1 = &x[b + 1..b + 1 + LANES];
        for l in 0..LANES {
            s0[l] += aa[l] * x0[l];
            s1[l] += aa[l] * x1[l];
        }
    }
    let fold = |s: &[f64; LANES]| (((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7])));
    let mut r0 = fold(&s0);
    let mut r1 = fold(&s1);
    for t in chunks * LANES..n {
        r0 += a[t] * x[t];
        r1 += a[t] * x[t + 1];
    }
    (r0, r1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Element-at-a-time reference forward pass.
    pub(crate) fn naive_forward(model: &Model, input: &[f64]) -> f64 {
        let mut prev: Vec<Vec<f64>> = vec![input.to_vec()];
        for layer in &model.layers {
            let len_in = prev[0].len();
            let len_out = len_in - 1;
            let mut out = vec![vec![0.0; len_out]; layer.out_channels];
            for (o, row) in out.iter_mut().enumerate() {
                for (t, v) in row.iter_mut().enumerate() {
                    let mut acc = layer.bias[o];
                    for (i, p) in prev.iter().enumerate() {
                        for k in 0..KERNEL_SIZE {
                            acc += layer.weights[(o * layer.in_channels + i) * KERNEL_SIZE + k]
                                * p[t + k];
                        }
                    }
                    *v = super::super::activation::tanh_act(acc);
                }
            }
            prev = out;
        }
        let mut z = model.head.bias;
        for (c, row) in prev.iter().enumerate() {
            let pool = row.iter().sum::<f64>() / row.len() as f64;
            z += model.head.weights[c] * pool;
        }
        sigmoid(z)
    }

    fn tiny_model(seed: u64) -> Model {
        Model::with_plan(&[4, 4, 4, 4, 4, 3], FeatureKind::Mfb, 10, seed)
    }

    #[test]
    fn zero_parameters_output_half() {
        let mut m = tiny_model(0);
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        m.head.weights.iter_mut().for_each(|w| *w = 0.0);
        m.head.bias = 0.0;
        let p = m.forward_one(&[0.3; 10]).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn conv_stack_shrinks_by_six() {
        let m = Model::standard(FeatureKind::Mfcc, 1);
        assert_eq!(m.conv_output_len(39), 33);
        assert_eq!(m.conv_output_len(40), 34);
        assert_eq!(m.conv_output_len(120), 114);
        assert_eq!(m.conv_output_len(257), 251);
    }

    #[test]
    fn short_input_is_shape_error() {
        let m = tiny_model(1);
        assert!(matches!(
            m.forward_one(&[0.0; 6]),
            Err(CnnError::Shape(_))
        ));
        assert!(m.forward_one(&[0.0; 7]).is_ok());
    }

    #[test]
    fn forward_matches_naive_reference() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for seed in 0..5 {
            let m = tiny_model(seed);
            let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = m.forward_one(&x).unwrap();
            let slow = naive_forward(&m, &x);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn standard_model_architecture() {
        let m = Model::standard(FeatureKind::Pykno, 3);
        assert_eq!(m.layers.len(), 6);
        assert_eq!(m.layers[0].in_channels, 1);
        for l in &m.layers[..5] {
            assert_eq!(l.out_channels, 128);
        }
        assert_eq!(m.layers[5].out_channels, 32);
        assert_eq!(m.head.weights.len(), 32);
        assert_eq!(m.input_dim, 120);
        assert!(m.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = tiny_model(7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let batch: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels = [1.0, 0.0, 1.0, 0.0];

        // Analytic mean-batch gradient.
        let mut grads = Grads::zeros_like(&m);
        for (x, &y) in batch.iter().zip(&labels) {
            let cache = m.forward_cached(x).unwrap();
            grads.add(&m.backward_one(&cache, y));
        }
        grads.scale(1.0 / 4.0);

        let loss = |model: &Model| -> f64 {
            let p: Vec<f64> = batch
                .iter()
                .map(|x| model.forward_one(x).unwrap())
                .collect();
            super::super::loss::bce_loss(&p, &labels)
        };

        let h = 1e-5;
        let mut checked = 0;
        for l in 0..m.layers.len() {
            for wi in 0..m.layers[l].weights.len() {
                let mut plus = m.clone();
                plus.layers[l].weights[wi] += h;
                let mut minus = m.clone();
                minus.layers[l].weights[wi] -= h;
                let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
                let an = grads.layers[l].0[wi];
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6);
                assert!(rel <= 1e-4, "layer {l} w{wi}: analytic {an} fd {fd}");
                checked += 1;
            }
            for bi in 0..m.layers[l].bias.len() {
                let mut plus = m.clone();
                plus.layers[l].bias[bi] += h;
                let mut minus = m.clone();
                minus.layers[l].bias[bi] -= h;
                let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
                let an = grads.layers[l].1[bi];
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6);
                assert!(rel <= 1e-4, "layer {l} b{bi}: analytic {an} fd {fd}");
                checked += 1;
            }
        }
        for wi in 0..m.head.weights.len() {
            let mut plus = m.clone();
            plus.head.weights[wi] += h;
            let mut minus = m.clone();
            minus.head.weights[wi] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let an = grads.head_w[wi];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6);
            assert!(rel <= 1e-4, "head w{wi}: analytic {an} fd {fd}");
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn saturated_predictions_have_zero_gradient() {
        let mut m = tiny_model(13);
        m.head.bias = 40.0; // sigmoid ~= 1, inside the clamp band
        let x = vec![0.2; 10];
        let cache = m.forward_cached(&x).unwrap();
        let grads = m.backward_one(&cache, 1.0);
        assert!(grads.norm() < 1e-5, "norm {}", grads.norm());
    }

    #[test]
    fn duplicated_batch_leaves_mean_gradient_unchanged() {
        let m = tiny_model(17);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let batch: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels = [1.0, 0.0, 1.0];

        let mean_grad = |items: &[(&Vec<f64>, f64)]| -> Grads {
            let mut g = Grads::zeros_like(&m);
            for (x, y) in items {
                let cache = m.forward_cached(x).unwrap();
                g.add(&m.backward_one(&cache, *y));
            }
            g.scale(1.0 / items.len() as f64);
            g
        };

        let single: Vec<(&Vec<f64>, f64)> =
            batch.iter().zip(labels.iter().copied()).collect();
        let doubled: Vec<(&Vec<f64>, f64)> = single
            .iter()
            .chain(single.iter())
            .map(|&(x, y)| (x, y))
            .collect();
        let g1 = mean_grad(&single);
        let g2 = mean_grad(&doubled);
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (x, y) in a.0.iter().zip(&b.0) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
