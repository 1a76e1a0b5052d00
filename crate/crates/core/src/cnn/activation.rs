//! Vectorizable tanh.
//!
//! `f64::tanh` goes through libm and cannot be auto-vectorized, which makes
//! it the single hottest instruction sequence in the conv stack. This
//! implementation is straight-line math (one division, no branches), so the
//! compiler can lane it across SIMD registers. It agrees with `f64::tanh`
//! to a few ulp: tanh(x) = (e^{2|x|} - 1) / (e^{2|x|} + 1) with the sign
//! restored, where e^y is split into 2^k * 2^f and 2^f uses the Pade form
//! of exp on |f*ln2| <= ln2/2.

/// Above this |x|, 1 - tanh(x) is below 3e-14 and the output clamps to 1.
const SATURATION: f64 = 16.0;

// exp(u) = 1 + 2*u*P(u^2) / (Q(u^2) - u*P(u^2)) for |u| <= ln2/2.
const P: [f64; 3] = [
    1.261_771_930_748_105_9e-4,
    3.029_944_077_074_419_6e-2,
    9.999_999_999_999_999_9e-1,
];
const Q: [f64; 4] = [
    3.001_985_051_386_644_6e-6,
    2.524_483_403_496_841e-3,
    2.272_655_482_081_550_3e-1,
    2.000_000_000_000_000_0,
];

#[inline(always)]
pub fn tanh_act(x: f64) -> f64 {
    let ax = x.abs().min(SATURATION);
    // e^{2*ax} = 2^k * 2^f with f in [-1/2, 1/2].
    let t = 2.0 * ax * std::f64::consts::LOG2_E;
    let k = (t + 0.5).floor();
    let u = (t - k) * std::f64::consts::LN_2;
    let u2 = u * u;
    let pu = u * (P[2] + u2 * (P[1] + u2 * P[0]));
    let qu = Q[3] + u2 * (Q[2] + u2 * (Q[1] + u2 * Q[0]));
    // 2^f = (Q + P*u)/(Q - P*u) = 1 + 2*half_em1, half_em1 = (2^f - 1)/2.
    let half_em1 = pu / (qu - pu);
    // k is in [0, 41]; build 2^k directly in the exponent bits.
    let two_k = f64::from_bits(((1023 + k as i64) as u64) << 52);
    // e^{2ax} - 1 without cancellation: (2^k - 1) + 2^{k+1} * half_em1.
    let num = (two_k - 1.0) + 2.0 * two_k * half_em1;
    let r = num / (num + 2.0);
    r.copysign(x)
}

/// Apply [`tanh_act`] across a slice; this loop is the vectorization target.
#[inline]
pub fn tanh_slice(v: &mut [f64]) {
    for x in v {
        *x = tanh_act(*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_std_tanh_everywhere() {
        let mut worst = 0.0f64;
        for i in -40_000..=40_000 {
            let x = i as f64 * 5e-4; // covers [-20, 20]
            let err = (tanh_act(x) - x.tanh()).abs();
            worst = worst.max(err);
        }
        assert!(worst < 1e-12, "worst abs err {worst:e}");
    }

    #[test]
    fn exact_special_points() {
        assert_eq!(tanh_act(0.0), 0.0);
        assert!((tanh_act(1e300) - 1.0).abs() < 1e-13);
        assert!((tanh_act(-1e300) + 1.0).abs() < 1e-13);
        assert!((tanh_act(1e-12) - 1e-12).abs() < 1e-24);
        // Odd symmetry.
        for x in [0.1, 0.7, 2.3, 9.0] {
            assert_eq!(tanh_act(x), -tanh_act(-x));
        }
    }

    #[test]
    fn relative_accuracy_for_small_inputs() {
        for i in 1..1000 {
            let x = i as f64 * 1e-6;
            let rel = (tanh_act(x) - x.tanh()).abs() / x.tanh();
            assert!(rel < 1e-14, "x={x}: rel {rel:e}");
        }
    }
}
