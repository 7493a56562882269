//! Hard, soft and firm thresholding, the universal threshold and RiskShrink.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::median;
use crate::wavelet::WaveletBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdKind {
    Hard,
    Soft,
    Firm,
}

pub fn threshold(x: f64, kind: ThresholdKind, t: f64, t2: Option<f64>) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let a = x.abs();
    Ok(match kind {
        ThresholdKind::Hard => {
            if a > t {
                x
            } else {
                0.0
            }
        }
        ThresholdKind::Soft => x.signum() * (a - t).max(0.0),
        ThresholdKind::Firm => {
            let t2 = t2
                .filter(|&t2| t2 > t)
                .ok_or_else(|| invalid("firm threshold needs t2 > t"))?;
            if a <= t {
                0.0
            } else if a <= t2 {
                x.signum() * t2 * (a - t) / (t2 - t)
            } else {
                x
            }
        }
    })
}

/// σ√(2 ln n).
pub fn universal_threshold(n: usize, sigma: f64) -> f64 {
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

/// MAD noise estimate median(|c|)/0.6745.
pub fn median_noise_sigma(highpass: &[f64]) -> Result<f64> {
    if highpass.is_empty() {
        return Err(invalid("empty highpass band"));
    }
    let abs: Vec<f64> = highpass.iter().map(|v| v.abs()).collect();
    let s = median(&abs) / 0.6745;
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Degenerate("median of highpass magnitudes is zero".into()))
    }
}

/// Coefficient index lists of every subband except the coarse lowpass one.
pub fn detail_subbands(basis: &WaveletBasis) -> Vec<Vec<usize>> {
    basis
        .leaves()
        .iter()
        .filter(|l| l.xpath.iter().chain(&l.ypath).any(|&b| b == 1))
        .map(|l| l.indices(basis.cols).collect())
        .collect()
}

/// Hard-thresholds every detail coefficient at σ√(2 ln N); returns the
/// thresholded coefficients and their nonzero count.
pub fn riskshrink_denoise(coeffs: &[f64], basis: &WaveletBasis, sigma: f64) -> (Vec<f64>, usize) {
    let t = universal_threshold(coeffs.len(), sigma);
    let mut out = coeffs.to_vec();
    for band in detail_subbands(basis) {
        for i in band {
            if out[i].abs() <= t {
                out[i] = 0.0;
            }
        }
    }
    let d = out.iter().filter(|v| **v != 0.0).count();
    (out, d)
}
