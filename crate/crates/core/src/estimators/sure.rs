//! Stein's unbiased risk estimate and the SureShrink hybrid rule.

use crate::error::{invalid, Result};
use crate::wavelet::WaveletBasis;

use super::threshold::detail_subbands;

/// SURE(x, t) = n − 2·#{|x_i| < t} + Σ min(|x_i|, t)² for unit-variance data.
pub fn sure_value(x: &[f64], t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(invalid("negative threshold"));
    }
    let below = x.iter().filter(|v| v.abs() < t).count();
    let clip: f64 = x.iter().map(|v| v.abs().min(t).powi(2)).sum();
    Ok(x.len() as f64 - 2.0 * below as f64 + clip)
}

/// Minimizer of SURE over {0} ∪ {|x_i| ≤ √(2 ln n)} for unit-variance data.
pub fn sure_threshold(x: &[f64]) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let cap = (2.0 * (n as f64).ln()).sqrt();
    let mut a: Vec<f64> = x.iter().map(|v| v * v).collect();
    a.sort_by(|p, q| p.total_cmp(q));
    // With t = |x|_(k) (k-th smallest, 1-based), the k-1 smaller entries are
    // strictly below t (ties aside) and the rest are clipped to t.
    let mut best_t = 0.0;
    let mut best = n as f64;
    let mut prefix = 0.0;
    for (k, &t2) in a.iter().enumerate() {
        let t = t2.sqrt();
        if t > cap {
            break;
        }
        let risk = n as f64 - 2.0 * k as f64 + prefix + (n - k) as f64 * t2;
        if risk < best {
            best = risk;
            best_t = t;
        }
        prefix += t2;
    }
    best_t
}

/// True when a subband is sparse enough for the universal threshold:
/// s² ≤ (log₂ d)^{3/2}/√d with s² = (Σx² − d)/d.
pub fn sparsity_test(x: &[f64]) -> bool {
    let d = x.len() as f64;
    let s2 = (x.iter().map(|v| v * v).sum::<f64>() - d) / d;
    s2 <= d.log2().powf(1.5) / d.sqrt()
}

/// Soft-thresholds each detail subband at its hybrid SURE threshold (in
/// units of σ). Returns the coefficients, the per-subband thresholds and
/// the nonzero count.
pub fn sureshrink_denoise(coeffs: &[f64], basis: &WaveletBasis, sigma: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let mut out = coeffs.to_vec();
    let mut thresholds = Vec::new();
    for band in detail_subbands(basis) {
        let x: Vec<f64> = band.iter().map(|&i| coeffs[i] / sigma).collect();
        let tn = (2.0 * (x.len() as f64).ln()).sqrt();
        let t = if sparsity_test(&x) {
            tn
        } else {
            sure_threshold(&x).min(tn)
        };
        thresholds.push(t * sigma);
        for (&i, &v) in band.iter().zip(&x) {
            out[i] = sigma * v.signum() * (v.abs() - t).max(0.0);
        }
    }
    let d = out.iter().filter(|v| **v != 0.0).count();
    (out, thresholds, d)
}
