//! Teager-Kaiser energy operator and DESA-1 amplitude/frequency estimation.

use crate::error::FeatureError;

/// Teager-Kaiser energy: Psi(n) = x(n)^2 - x(n-1)*x(n+1).
///
/// Output is two samples shorter than the input; entry `j` corresponds to
/// input index `j + 1`.
pub fn teo(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if x.len() < 3 {
        return Err(FeatureError::TooShort {
            len: x.len(),
            min: 3,
        });
    }
    Ok((1..x.len() - 1)
        .map(|n| x[n] * x[n] - x[n - 1] * x[n + 1])
        .collect())
}

/// Per-sample DESA-1 estimates aligned with the input signal.
///
/// Entry `n` estimates the instantaneous amplitude and frequency at input
/// sample `n`; entries outside `2..=len-3` and samples where the estimator
/// is numerically undefined are flagged invalid rather than reported.
#[derive(Debug, Clone)]
pub struct Desa1Estimate {
    pub amp: Vec<f64>,
    pub freq_hz: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Desa1Estimate {
    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }
}

/// DESA-1 on a band-passed signal.
///
/// With y(n) = x(n) - x(n-1):
///   Omega(n) = arccos(1 - (Psi[y](n) + Psi[y](n+1)) / (4 Psi[x](n)))
///   amp(n)   = sqrt(Psi[x](n) / sin^2(Omega(n)))
///
/// Samples where Psi[x] <= 0, the arccos argument leaves [-1, 1], or the
/// frequency estimate degenerates are marked invalid.
pub fn desa1(x: &[f64], sample_rate_hz: f64) -> Result<Desa1Estimate, FeatureError> {
    let m = x.len();
    if m < 4 {
        return Err(FeatureError::TooShort { len: m, min: 4 });
    }
    let mut amp = vec![0.0; m];
    let mut freq_hz = vec![0.0; m];
    let mut valid = vec![false; m];

    // psi_x[j] = Psi[x] at sample j+1; diff[j] = y at sample j+1 = x[j+1]-x[j].
    let psi_x = teo(x)?;
    let diff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // psi_y[j] = Psi[y] at y-index j+1, i.e. at sample j+2 of x.
    let psi_y = teo(&diff)?;

    let two_pi = 2.0 * std::f64::consts::PI;
    // Estimate at sample n needs Psi[y](n) and Psi[y](n+1): n in 2..=m-3.
    for n in 2..m.saturating_sub(2) {
        let px = psi_x[n - 1];
        if px <= 0.0 || !px.is_finite() {
            continue;
        }
        let py_sum = psi_y[n - 2] + psi_y[n - 1];
        let arg = 1.0 - py_sum / (4.0 * px);
        if !(-1.0..=1.0).contains(&arg) {
            continue;
        }
        let omega = arg.acos();
        let sin_omega = omega.sin();
        if sin_omega <= 0.0 {
            continue;
        }
        let a = (px / (sin_omega * sin_omega)).sqrt();
        if !a.is_finite() {
            continue;
        }
        amp[n] = a;
        freq_hz[n] = omega * sample_rate_hz / two_pi;
        valid[n] = true;
    }

    Ok(Desa1Estimate {
        amp,
        freq_hz,
        valid,
    })
}
