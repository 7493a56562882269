//! NML baseline codelength for a Gaussian likelihood with the spherical
//! parameter region ‖θ‖ ≤ ‖x∥‖.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{ln_gamma, LN_2PI};

use super::{Interval, IntervalConfig, ModelFit, ModelIndex};

/// log ∫∫ |F(θ,τ)|^{1/2} dθ dτ over the ball ‖θ‖ ≤ radius and τ ∈ I_τ,
/// with |F|^{1/2} = √(n/2)·τ^{d/2−1}.
pub fn ln_fisher_volume(n: usize, d: usize, radius: f64, i_tau: Interval) -> Result<f64> {
    if d == 0 || !(radius > 0.0) {
        return Err(invalid("empty parameter region"));
    }
    if !(i_tau.lo > 0.0 && i_tau.hi > i_tau.lo) {
        return Err(invalid("interval on tau must be positive and nonempty"));
    }
    let h = d as f64 / 2.0;
    let ln_ball = h * std::f64::consts::PI.ln() + d as f64 * radius.ln() - ln_gamma(h + 1.0);
    // ∫ τ^{h−1} dτ = (hi^h − lo^h)/h, kept in logs
    let ln_tau = h * i_tau.hi.ln() + (-(h * (i_tau.lo / i_tau.hi).ln()).exp()).ln_1p() - h.ln();
    Ok(0.5 * (n as f64 / 2.0).ln() + ln_ball + ln_tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmlTerms {
    pub l_prime: f64,
    pub neg_ln_likelihood: f64,
    pub ln_volume: f64,
    pub tau_ml: f64,
    pub i_tau: Interval,
}

/// L′ = −log f(x | θ_ML, τ_ML) − ((d+1)/2) log 2π + log ∫|F|^{1/2}, with
/// θ_ML = x∥, τ_ML = n/‖x⊥‖² and I_τ built around τ_ML with N = n/2.
pub fn nml_codelength(x: &[f64], gamma: &ModelIndex) -> Result<NmlTerms> {
    let fit = ModelFit::jeffreys(x, gamma)?;
    let iv = IntervalConfig::from_fit(&fit, 0.5 * fit.n as f64)?;
    nml_codelength_with(&fit, iv.i_tau)
}

/// As [`nml_codelength`] with an explicit τ interval; `fit` must be the
/// Jeffreys (maximum-likelihood) fit.
pub fn nml_codelength_with(fit: &ModelFit, i_tau: Interval) -> Result<NmlTerms> {
    let d = fit.d();
    if d == 0 {
        return Err(invalid("NML needs d > 0"));
    }
    let radius = fit.x_par.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(radius > 0.0) {
        return Err(Error::Degenerate("zero signal norm".into()));
    }
    let n = fit.n as f64;
    let tau_ml = n / fit.x_perp_norm2;
    let neg_ln_lik = -0.5 * n * (tau_ml / std::f64::consts::TAU).ln() + 0.5 * n;
    let ln_volume = ln_fisher_volume(fit.n, d, radius, i_tau)?;
    Ok(NmlTerms {
        l_prime: neg_ln_lik - 0.5 * (d as f64 + 1.0) * LN_2PI + ln_volume,
        neg_ln_likelihood: neg_ln_lik,
        ln_volume,
        tau_ml,
        i_tau,
    })
}
