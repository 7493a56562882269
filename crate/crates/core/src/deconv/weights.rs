//! Noise weights of deconvolved data in a packet basis, whitening, and the
//! frequency-ratio constraint for packet bases.

use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::kernel::BlurKernel;
use crate::error::{Error, Result};
use crate::wavelet::{best_basis_select, path_atom, path_band, Block, FilterPair, WaveletBasis};

/// Default bound on sup/inf |û⁻¹| over a packet's frequency rectangle.
pub const DEFAULT_Q: f64 = 16.0;

/// Passband energy fraction below which an atom counts as discarded.
pub const PASSBAND_FLOOR: f64 = 1e-20;

/// t̃_k² per coefficient position: the variance of the k-th coefficient of
/// deconvolved unit-variance white noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseWeights {
    pub t_tilde_sq: Vec<f64>,
}

/// Σ_f mask(f)|â(f)|²/u(f)² for the packet atom of `path` on one axis.
fn axis_sum(filters: &FilterPair, resp: &[f64], mask: &[bool], path: &[u8], planner: &mut FftPlanner<f64>) -> f64 {
    let n = resp.len();
    let atom = path_atom(filters, n, path);
    let mut buf: Vec<Complex64> = atom.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let (mut energy, mut sum) = (0.0, 0.0);
    for ((c, u), m) in buf.iter().zip(resp).zip(mask) {
        if *m {
            energy += c.norm_sqr();
            sum += c.norm_sqr() / (u * u);
        }
    }
    // An atom whose band is entirely discarded keeps only FFT roundoff.
    if energy / (n as f64) < PASSBAND_FLOOR {
        0.0
    } else {
        sum / n as f64
    }
}

/// Exact t̃_k² for every atom of `basis`. The sum is constant over a leaf
/// and factorizes over the axes. The identity kernel without cutoff gives
/// exactly 1.
pub fn noise_weights(basis: &WaveletBasis, kernel: &BlurKernel, k_c: Option<f64>) -> Result<NoiseWeights> {
    if basis.rows != kernel.rows || basis.cols != kernel.cols {
        return Err(Error::ShapeMismatch {
            expected: basis.len(),
            found: kernel.rows * kernel.cols,
        });
    }
    if kernel.is_identity() && k_c.is_none() {
        return Ok(NoiseWeights {
            t_tilde_sq: vec![1.0; basis.len()],
        });
    }
    let (mx, my) = kernel.passband(k_c);
    let mut planner = FftPlanner::new();
    let mut cache_x: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut cache_y: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut t = vec![0.0; basis.len()];
    for leaf in basis.leaves() {
        let sx = *cache_x
            .entry(leaf.xpath.clone())
            .or_insert_with(|| axis_sum(&basis.filters, kernel.response_x(), &mx, &leaf.xpath, &mut planner));
        let sy = *cache_y
            .entry(leaf.ypath.clone())
            .or_insert_with(|| axis_sum(&basis.filters, kernel.response_y(), &my, &leaf.ypath, &mut planner));
        for i in leaf.indices(basis.cols) {
            t[i] = sx * sy;
        }
    }
    Ok(NoiseWeights { t_tilde_sq: t })
}

impl NoiseWeights {
    pub fn len(&self) -> usize {
        self.t_tilde_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_tilde_sq.is_empty()
    }

    /// Positions carrying information (t̃² > 0).
    pub fn active(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.t_tilde_sq[i] > 0.0).collect()
    }
}

fn check(coeffs: &[f64], w: &NoiseWeights) -> Result<()> {
    if coeffs.len() != w.len() {
        return Err(Error::ShapeMismatch {
            expected: w.len(),
            found: coeffs.len(),
        });
    }
    Ok(())
}

/// x̃̃_i = x̃_i/t̃_i; positions with t̃ = 0 map to 0.
pub fn whiten(coeffs: &[f64], w: &NoiseWeights) -> Result<Vec<f64>> {
    check(coeffs, w)?;
    Ok(coeffs
        .iter()
        .zip(&w.t_tilde_sq)
        .map(|(c, t2)| if *t2 > 0.0 { c / t2.sqrt() } else { 0.0 })
        .collect())
}

/// Inverse of [`whiten`] on the active positions.
pub fn unwhiten(coeffs: &[f64], w: &NoiseWeights) -> Result<Vec<f64>> {
    check(coeffs, w)?;
    Ok(coeffs.iter().zip(&w.t_tilde_sq).map(|(c, t2)| c * t2.sqrt()).collect())
}

/// Integer frequencies inside a band, or the one nearest its centre.
fn band_bins(band: (f64, f64)) -> std::ops::RangeInclusive<usize> {
    let lo = band.0.ceil() as usize;
    let hi = band.1.floor() as usize;
    if lo <= hi {
        lo..=hi
    } else {
        let m = (0.5 * (band.0 + band.1)).round() as usize;
        m..=m
    }
}

fn axis_ratio(resp: &[f64], path: &[u8]) -> f64 {
    let n = resp.len();
    if n == 1 {
        return 1.0;
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in band_bins(path_band(path, n)) {
        let u = resp[f.min(n / 2)].abs();
        lo = lo.min(u);
        hi = hi.max(u);
    }
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// sup/inf of |û⁻¹| over the nominal frequency rectangle of a packet node.
pub fn band_ratio(kernel: &BlurKernel, block: &Block) -> f64 {
    axis_ratio(kernel.response_x(), &block.xpath) * axis_ratio(kernel.response_y(), &block.ypath)
}

/// Entropy best basis of `x` over packet nodes with band ratio ≤ q.
pub fn constrained_best_basis(filters: &FilterPair, x: &[f64], kernel: &BlurKernel, q: f64) -> Result<WaveletBasis> {
    let (basis, _) = best_basis_select(filters, x, kernel.rows, kernel.cols, None, |b| {
        band_ratio(kernel, b) <= q
    })?;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_are_one() {
        let f = FilterPair::named("symmlet12").unwrap();
        let b = WaveletBasis::mirror(f, 64).unwrap();
        let k = BlurKernel::parse("identity", 1, 64).unwrap();
        assert!(noise_weights(&b, &k, None)
            .unwrap()
            .t_tilde_sq
            .iter()
            .all(|v| *v == 1.0));
        // The frequency sum reproduces 1 for the identity response.
        let w = noise_weights(&b, &k, Some(1e9)).unwrap();
        assert!(w.t_tilde_sq.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn whiten_round_trip() {
        let w = NoiseWeights {
            t_tilde_sq: vec![1.0, 4.0, 2.5, 0.3],
        };
        let c = [1.0, -2.0, 3.5, 0.7];
        let back = unwhiten(&whiten(&c, &w).unwrap(), &w).unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs());
        }
    }
}
