//! Prior entropies and the model-class prior D(p, q).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::GgdPrior;
use crate::special::ln_gamma;

/// Reference prior q against which the GGD prior p is weighed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Reference {
    /// Jeffreys prior; equivalent to a Gaussian (ν_q = 2) reference.
    Jeffreys,
    Ggd {
        nu_q: f64,
    },
    /// p ≡ q: D is constant and dropped.
    Same,
}

impl Reference {
    fn nu_q(&self) -> Option<f64> {
        match self {
            Reference::Jeffreys => Some(2.0),
            Reference::Ggd { nu_q } => Some(*nu_q),
            Reference::Same => None,
        }
    }
}

/// S(p_λ) = −d log(νη√λ/(2Γ(1/ν))) + d/ν.
pub fn entropy_ggd(prior: &GgdPrior, d: usize) -> f64 {
    prior.entropy(d)
}

/// Entropy of the Jeffreys prior on the ball of radius R, normalized
/// with the dτ/τ measure on (0, τ*) (needs d > 2).
pub fn entropy_jeffreys(n: usize, d: usize, radius: f64) -> Result<f64> {
    if d <= 2 {
        return Err(invalid("Jeffreys entropy needs d > 2"));
    }
    let h = n as f64 / 2.0;
    let df = d as f64;
    let ln_ball = 0.5 * df * std::f64::consts::PI.ln() + df * radius.ln() - ln_gamma(df / 2.0 + 1.0);
    Ok(0.5 * h.ln() + ((df - 2.0) / 2.0).ln() + ln_ball + 1.0 - 0.5 * h.ln() / h.sqrt())
}

/// Stirling form of [`entropy_jeffreys`], accurate to O(1/d).
pub fn entropy_jeffreys_stirling(n: usize, d: usize, radius: f64) -> Result<f64> {
    if d <= 2 {
        return Err(invalid("Jeffreys entropy needs d > 2"));
    }
    let h = n as f64 / 2.0;
    let df = d as f64;
    let e = std::f64::consts::E;
    Ok(0.5 * h.ln()
        + ((df - 2.0) / 2.0).ln()
        + 1.0
        + 0.5 * df * (std::f64::consts::TAU * e * radius * radius / (df + 2.0)).ln()
        - 0.5 * h.ln() / h.sqrt()
        + (e / std::f64::consts::PI.sqrt() / (df + 2.0).sqrt()).ln())
}

/// log D(p, q) evaluated at the plug-in α = α* = λ_p*/λ_q*.
/// Needs d ≥ 3; the Same reference gives 0.
pub fn model_class_log_d(nu_p: f64, reference: Reference, d: usize, c_lambda: f64, alpha_star: f64) -> Result<f64> {
    let Some(nu_q) = reference.nu_q() else {
        return Ok(0.0);
    };
    if d < 3 {
        return Err(invalid("model-class prior needs d >= 3"));
    }
    if !(c_lambda > 0.0 && c_lambda <= 1.0) {
        return Err(invalid(format!("C_lambda = {c_lambda} outside (0, 1]")));
    }
    if !(alpha_star > 0.0) {
        return Err(invalid("alpha* must be positive"));
    }
    let df = d as f64;
    let ratio = (1.0 + nu_p / nu_q) / (nu_p * (df + 2.0));
    let sub = (4.0 * c_lambda * alpha_star / (df - 2.0) * ratio.sqrt()).ln();
    Ok(-sub + log_d_leading(nu_p, reference, d, c_lambda))
}

/// Leading-order log D = (d/4) log(4C²(1+ν_p/ν_q)/(ν_p(d+2))).
pub fn log_d_leading(nu_p: f64, reference: Reference, d: usize, c_lambda: f64) -> f64 {
    let Some(nu_q) = reference.nu_q() else {
        return 0.0;
    };
    let df = d as f64;
    0.25 * df * (4.0 * c_lambda * c_lambda * (1.0 + nu_p / nu_q) / (nu_p * (df + 2.0))).ln()
}
