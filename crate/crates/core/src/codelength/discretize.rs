//! Parameter discretisations and posterior-mean corrections.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::GgdPrior;

use super::{ModelFit, PriorModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub d_tau: f64,
    pub d_theta: Vec<f64>,
    pub d_lambda: f64,
    /// √(c_θ² + c_τ² + c_λ²), the bound on the relative posterior change.
    pub posterior_rel_bound: f64,
}

/// Coarsest steps on (τ, θ, λ) keeping the posterior within the stated
/// relative precision. `omega` is Ω(λ*, τ*) = dλ*^{-1}/(nτ^{-1}).
#[allow(clippy::too_many_arguments)]
pub fn discretizations(
    tau: f64,
    lambda_star: f64,
    theta: &[f64],
    omega: f64,
    n: usize,
    nu: f64,
    c_theta: f64,
    c_tau: f64,
    c_lambda: f64,
) -> Result<Discretization> {
    for (name, c) in [("c_theta", c_theta), ("c_tau", c_tau), ("c_lambda", c_lambda)] {
        if !(c > 0.0 && c < 1.0) {
            return Err(invalid(format!("{name} = {c} outside (0, 1)")));
        }
    }
    if !(tau > 0.0 && lambda_star > 0.0 && omega > 0.0) || theta.is_empty() {
        return Err(invalid("discretization needs positive tau, lambda, omega and d > 0"));
    }
    let nf = n as f64;
    let d = theta.len() as f64;
    let d_theta = theta
        .iter()
        .map(|t| tau.powf(-0.5) / d.sqrt() * c_theta * (1.0 + (d / nf * tau * t * t / omega).sqrt() * c_tau / c_theta))
        .collect();
    Ok(Discretization {
        d_tau: tau * 2.0 / nf.sqrt() / omega.sqrt() * c_tau,
        d_theta,
        d_lambda: c_lambda * 2.0 * lambda_star / (nu * (d + 2.0)).sqrt(),
        posterior_rel_bound: (c_theta * c_theta + c_tau * c_tau + c_lambda * c_lambda).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBias {
    /// E θ_i − θ*_i.
    pub theta: Vec<f64>,
    /// E τ − τ*.
    pub tau: f64,
}

/// Leading-order posterior-mean corrections. Both vanish for ν ∈ {1, 2}
/// and in the Jeffreys configuration.
pub fn posterior_bias(fit: &ModelFit) -> PosteriorBias {
    let d = fit.d();
    let PriorModel::Ggd { nu } = fit.prior else {
        return PosteriorBias {
            theta: vec![0.0; d],
            tau: 0.0,
        };
    };
    let tau = fit.tau;
    let st = tau.sqrt();
    let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
    let factor = nu * (nu - 1.0) * (nu - 2.0);
    let pre = 1.0 / st / (std::f64::consts::TAU.sqrt() * 6.0) * c * factor;
    let snr_pow: Vec<f64> = (0..d).map(|i| fit.snr_i(i).powf(-0.5 * nu)).collect();
    let terms: Vec<f64> = fit
        .theta
        .iter()
        .zip(&snr_pow)
        .map(|(t, p)| p * (st * t.abs()).powf(nu - 1.0) * t.signum() * (-0.5 * tau * t * t).exp())
        .collect();
    let total: f64 = terms.iter().sum();
    let theta = fit
        .theta
        .iter()
        .zip(terms.iter().zip(&snr_pow))
        .map(|(t, (own, p))| pre * (-0.5 * tau * t * t).exp() * (p * t.signum() + total - own))
        .collect();
    let s: f64 = fit
        .theta
        .iter()
        .zip(&snr_pow)
        .map(|(t, p)| p * (st * t.abs()).powf(nu - 2.0) * (t.signum() + st * t * (-0.5 * tau * t * t).exp()))
        .sum();
    let tau_bias = tau * factor * s / (fit.n - d) as f64;
    PosteriorBias { theta, tau: tau_bias }
}
