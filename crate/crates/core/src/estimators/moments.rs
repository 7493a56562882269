//! Hyperparameter estimators for the prior precision λ and shape ν.

use crate::error::{invalid, Error, Result};
use crate::special::{bisect, ln_gamma};

use super::ggd::eta;

const NU_LO: f64 = 0.05;
const NU_HI: f64 = 2.0;

/// Moment estimator: 1/λ* = max(0, mean(x²) − τ^{-1}). Returns 1/λ*; a zero
/// value means the data carry no detectable signal.
pub fn lambda_moment(x: &[f64], tau_inv: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    (m2 - tau_inv).max(0.0)
}

/// ML precision of a GGD prior given d estimated coefficients:
/// λ* = (d+2)^{2/ν} / (ν^{2/ν} η² (Σ|θ|^ν)^{2/ν}).
pub fn lambda_ml_ggd(theta: &[f64], nu: f64) -> Result<f64> {
    if theta.is_empty() {
        return Err(invalid("empty coefficient set"));
    }
    let s: f64 = theta.iter().map(|t| t.abs().powf(nu)).sum();
    if !(s > 0.0) {
        return Err(Error::Degenerate("all-zero coefficients".into()));
    }
    let d = theta.len() as f64;
    let e = 2.0 / nu;
    // Evaluate in logs; Σ|θ|^ν can be large for wide dynamic ranges.
    let ln = e * (d + 2.0).ln() - e * nu.ln() - 2.0 * eta(nu).ln() - e * s.ln();
    Ok(ln.exp())
}

/// Γ(2/ν)² / (Γ(1/ν)Γ(3/ν)) = (E|θ|)²/E θ² for a GGD of shape ν.
pub fn ggd_moment_ratio(nu: f64) -> f64 {
    (2.0 * ln_gamma(2.0 / nu) - ln_gamma(1.0 / nu) - ln_gamma(3.0 / nu)).exp()
}

/// Shape estimate by moment-ratio matching on (0.05, 2]. Ratios beyond the
/// Gaussian value clamp to 2 and below the ν = 0.05 value clamp to 0.05.
pub fn nu_estimate(theta: &[f64]) -> Result<f64> {
    let nz: Vec<f64> = theta.iter().copied().filter(|v| *v != 0.0).collect();
    if nz.len() < 2 {
        return Err(Error::Degenerate("need at least two nonzero entries".into()));
    }
    let m = nz.len() as f64;
    let m1 = nz.iter().map(|v| v.abs()).sum::<f64>() / m;
    let m2 = nz.iter().map(|v| v * v).sum::<f64>() / m;
    let r = m1 * m1 / m2;
    if r >= ggd_moment_ratio(NU_HI) {
        return Ok(NU_HI);
    }
    if r <= ggd_moment_ratio(NU_LO) {
        return Ok(NU_LO);
    }
    Ok(bisect(|nu| ggd_moment_ratio(nu) - r, NU_LO, NU_HI, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseRng;

    #[test]
    fn moment_values() {
        // mean(x²) = 2
        assert!((lambda_moment(&[1.0, 3f64.sqrt()], 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(lambda_moment(&[0.5, 0.5], 1.0), 0.0);
    }

    #[test]
    fn ml_values() {
        assert!((lambda_ml_ggd(&[1.0, 1.0], 2.0).unwrap() - 2.0).abs() < 1e-12);
        let a = lambda_ml_ggd(&[0.3, -1.2, 2.0], 0.7).unwrap();
        let b = lambda_ml_ggd(&[0.9, -3.6, 6.0], 0.7).unwrap();
        assert!((a / b - 9.0).abs() < 1e-10);
        assert!(lambda_ml_ggd(&[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn ratio_monotone_and_anchored() {
        assert!((ggd_moment_ratio(2.0) - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((ggd_moment_ratio(1.0) - 0.5).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..=200 {
            let nu = NU_LO + (NU_HI - NU_LO) * i as f64 / 200.0;
            let r = ggd_moment_ratio(nu);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn recovers_gaussian_and_laplacian() {
        let mut rng = NoiseRng::new(9);
        let g = rng.normal_vec(10_000, 1.0);
        assert!((nu_estimate(&g).unwrap() - 2.0).abs() <= 0.1);
        let l: Vec<f64> = (0..10_000)
            .map(|_| {
                let u = rng.uniform() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect();
        assert!((nu_estimate(&l).unwrap() - 1.0).abs() <= 0.1);
    }

    #[test]
    fn degenerate_clamps() {
        assert_eq!(nu_estimate(&[2.0, -2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert!(nu_estimate(&[0.0, 1.0]).is_err());
    }
}
