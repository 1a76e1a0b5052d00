//! Binary cross-entropy.

/// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]` inside the loss so
/// saturated outputs cannot produce infinities.
pub const BCE_EPS: f64 = 1e-7;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean over the batch of -[y*ln p + (1-y)*ln(1-p)].
pub fn bce_loss(p: &[f64], y: &[f64]) -> f64 {
    assert_eq!(p.len(), y.len());
    assert!(!p.is_empty());
    let sum: f64 = p
        .iter()
        .zip(y)
        .map(|(&pi, &yi)| {
            let pc = pi.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(yi * pc.ln() + (1.0 - yi) * (1.0 - pc).ln())
        })
        .sum();
    sum / p.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_probability_costs_log_two() {
        let loss = bce_loss(&[0.5, 0.5], &[1.0, 0.0]);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictions_cost_near_zero() {
        let loss = bce_loss(&[1.0, 0.0], &[1.0, 0.0]);
        // Clamped at 1e-7, so the loss is on the 1e-7 scale.
        assert!(loss > 0.0 && loss < 1e-6, "loss {loss}");
    }

    #[test]
    fn direct_arithmetic_example() {
        let loss = bce_loss(&[0.9, 0.2], &[1.0, 0.0]);
        let expected = (-(0.9f64.ln()) - 0.8f64.ln()) / 2.0;
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 0.1643).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-750.0) >= 0.0);
        assert!(sigmoid(750.0) <= 1.0);
        let z = 1.37;
        assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
    }
}
