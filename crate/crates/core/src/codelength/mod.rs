//! Codelength mathematics for a selected coefficient subset: the invariant
//! Laplace marginal, renormalisation bounds, the model-class prior, the
//! approximation diagnostics, parameter discretisations and the NML
//! baseline. Everything is in nats.

mod bounds;
mod discretize;
mod marginal;
mod model_prior;
mod nml;
mod total;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{ggd_map_estimate, lambda_ml_ggd, GgdPrior, MapTable};

pub use bounds::{delta_taylor_envelope, ln_theta_integral_ggd, log_c_gamma_bounds};
pub use discretize::{discretizations, posterior_bias, Discretization, PosteriorBias};
pub use marginal::{diagnostics, ln_det_hessian, marginal_laplace, psi_lambda_lambda_ggd, tau_star};
pub use model_prior::{
    entropy_ggd, entropy_jeffreys, entropy_jeffreys_stirling, log_d_leading, model_class_log_d, Reference,
};
pub use nml::{ln_fisher_volume, nml_codelength, nml_codelength_with, NmlTerms};
pub use total::{codelength_delta_d, codelength_q, codelength_total, constant_terms, trace_terms, TraceRow, C_LAMBDA};

/// Closed interval [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(invalid(format!("interval [{lo}, {hi}] is not ordered")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// The set of coefficient positions treated as free parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelIndex {
    selected: Vec<usize>,
    n: usize,
}

impl ModelIndex {
    /// Positions are stored in the given order; they must be unique, in
    /// range and leave at least one coefficient unselected.
    pub fn new(selected: Vec<usize>, n: usize) -> Result<Self> {
        let d = selected.len();
        if d == 0 || d >= n {
            return Err(invalid(format!("model size {d} outside 0 < d < {n}")));
        }
        let mut seen = vec![false; n];
        for &i in &selected {
            if i >= n {
                return Err(invalid(format!("position {i} out of range for n = {n}")));
            }
            if seen[i] {
                return Err(invalid(format!("position {i} selected twice")));
            }
            seen[i] = true;
        }
        Ok(Self { selected, n })
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn d(&self) -> usize {
        self.selected.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.selected {
            m[i] = true;
        }
        m
    }

    /// Splits x into the selected values x∥ and the squared norm ‖x⊥‖².
    pub fn split(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if x.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mask = self.mask();
        let par = self.selected.iter().map(|&i| x[i]).collect();
        let perp = x.iter().zip(&mask).filter(|(_, m)| !**m).map(|(v, _)| v * v).sum();
        Ok((par, perp))
    }
}

/// Prior configuration on the selected coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorModel {
    /// Generalized Gaussian of shape ν with ML precision λ*.
    Ggd { nu: f64 },
    /// Joint Jeffreys prior on (θ, τ): flat in θ, no shrinkage.
    Jeffreys,
}

/// Point estimates for one model: θ*, the invariant noise precision τ* and
/// the prior precision λ*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub n: usize,
    pub x_par: Vec<f64>,
    pub x_perp_norm2: f64,
    pub theta: Vec<f64>,
    pub tau: f64,
    pub lambda: f64,
    pub prior: PriorModel,
    /// Per-coefficient prior scale w_i: coefficient i has prior precision
    /// λ·w_i. `None` means w_i = 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_scale: Option<Vec<f64>>,
}

impl ModelFit {
    pub fn d(&self) -> usize {
        self.x_par.len()
    }

    /// ‖x∥ − θ*‖².
    pub fn residual_norm2(&self) -> f64 {
        self.x_par.iter().zip(&self.theta).map(|(x, t)| (x - t) * (x - t)).sum()
    }

    pub fn nu(&self) -> Option<f64> {
        match self.prior {
            PriorModel::Ggd { nu } => Some(nu),
            PriorModel::Jeffreys => None,
        }
    }

    /// Fit from given GGD estimates θ*: τ* from the invariant formula and
    /// λ* from the ML rule.
    pub fn ggd(x: &[f64], gamma: &ModelIndex, nu: f64, theta: Vec<f64>) -> Result<Self> {
        Self::ggd_scaled(x, gamma, nu, theta, None)
    }

    /// As [`ModelFit::ggd`] with per-coefficient prior scales (one per
    /// selected coefficient); λ* is the ML value on the prior coordinates.
    pub fn ggd_scaled(
        x: &[f64],
        gamma: &ModelIndex,
        nu: f64,
        theta: Vec<f64>,
        scale: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (x_par, x_perp_norm2) = gamma.split(x)?;
        check_scale(scale.as_deref(), x_par.len())?;
        if theta.len() != x_par.len() {
            return Err(Error::ShapeMismatch {
                expected: x_par.len(),
                found: theta.len(),
            });
        }
        GgdPrior::new(nu, 1.0)?;
        if theta.iter().any(|t| *t == 0.0 || !t.is_finite()) {
            return Err(Error::Degenerate("a selected estimate is zero".into()));
        }
        let resid: f64 = x_par.iter().zip(&theta).map(|(a, b)| (a - b) * (a - b)).sum();
        let tau = tau_star(x_perp_norm2, resid, gamma.n(), gamma.d())?;
        let lambda = lambda_ml_ggd(&prior_coords(&theta, scale.as_deref()), nu)?;
        Ok(Self {
            n: gamma.n(),
            x_par,
            x_perp_norm2,
            theta,
            tau,
            lambda,
            prior: PriorModel::Ggd { nu },
            lambda_scale: scale,
        })
    }

    /// One MAP pass: θ* = MAP(x∥ | ν, λ, τ) under the given hyperparameters,
    /// then τ* and λ* re-derived from θ*.
    pub fn ggd_map(
        x: &[f64],
        gamma: &ModelIndex,
        prior: &GgdPrior,
        tau: f64,
        table: Option<&MapTable>,
    ) -> Result<Self> {
        Self::ggd_map_scaled(x, gamma, prior, tau, table, None)
    }

    /// MAP pass with per-coefficient prior precision λ·w_i.
    pub fn ggd_map_scaled(
        x: &[f64],
        gamma: &ModelIndex,
        prior: &GgdPrior,
        tau: f64,
        table: Option<&MapTable>,
        scale: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (x_par, _) = gamma.split(x)?;
        check_scale(scale.as_deref(), x_par.len())?;
        let theta = x_par
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let p = GgdPrior {
                    nu: prior.nu,
                    lambda: prior.lambda * scale.as_ref().map_or(1.0, |w| w[i]),
                };
                ggd_map_estimate(v, &p, tau, table)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::ggd_scaled(x, gamma, prior.nu, theta, scale)
    }

    /// Joint fixed point of θ* = MAP(x∥ | λ*, τ*), τ* = τ*(θ*), λ* = λ*(θ*),
    /// started from the flat-prior estimates.
    pub fn ggd_joint(
        x: &[f64],
        gamma: &ModelIndex,
        nu: f64,
        table: Option<&MapTable>,
        max_iter: usize,
    ) -> Result<Self> {
        let (x_par, perp) = gamma.split(x)?;
        let mut tau = tau_star(perp, 0.0, gamma.n(), gamma.d())?;
        let mut lambda = lambda_ml_ggd(&x_par, nu)?;
        let mut fit = None;
        for _ in 0..max_iter.max(1) {
            let prior = GgdPrior::new(nu, lambda)?;
            let next = Self::ggd_map(x, gamma, &prior, tau, table)?;
            let done = ((next.tau - tau) / tau).abs() < 1e-13 && ((next.lambda - lambda) / lambda).abs() < 1e-13;
            tau = next.tau;
            lambda = next.lambda;
            fit = Some(next);
            if done {
                break;
            }
        }
        Ok(fit.expect("at least one pass"))
    }

    /// Joint Jeffreys configuration: θ* = x∥ and τ* the ML precision
    /// n/‖x⊥‖² (the Jeffreys factor cancels the Fisher weight, so the
    /// stationary point is the likelihood maximum).
    pub fn jeffreys(x: &[f64], gamma: &ModelIndex) -> Result<Self> {
        let (x_par, perp) = gamma.split(x)?;
        if !(perp > 0.0) {
            return Err(Error::Degenerate("zero residual energy".into()));
        }
        let par2: f64 = x_par.iter().map(|v| v * v).sum();
        if !(par2 > 0.0) {
            return Err(Error::Degenerate("selected coefficients are all zero".into()));
        }
        let d = x_par.len() as f64;
        Ok(Self {
            n: gamma.n(),
            theta: x_par.clone(),
            x_par,
            x_perp_norm2: perp,
            tau: gamma.n() as f64 / perp,
            lambda: (d + 2.0) / par2,
            prior: PriorModel::Jeffreys,
            lambda_scale: None,
        })
    }

    /// Gaussian log-likelihood log f(x | τ*, θ*).
    pub fn ln_likelihood(&self) -> f64 {
        let n = self.n as f64;
        0.5 * n * (self.tau / std::f64::consts::TAU).ln() - 0.5 * self.tau * (self.x_perp_norm2 + self.residual_norm2())
    }

    /// (n/d)Ω(λ*, τ*) = τ*/λ*, the SNR of an unscaled coefficient.
    pub fn snr_ratio(&self) -> f64 {
        self.tau / self.lambda
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.lambda_scale.as_ref().map_or(1.0, |w| w[i])
    }

    /// Prior precision of selected coefficient i.
    pub fn lambda_i(&self, i: usize) -> f64 {
        self.lambda * self.scale(i)
    }

    /// τ*/λ_i.
    pub fn snr_i(&self, i: usize) -> f64 {
        self.tau / self.lambda_i(i)
    }

    /// √w_i·θ*_i, the coordinates in which the prior has precision λ*.
    pub fn prior_coords(&self) -> Vec<f64> {
        prior_coords(&self.theta, self.lambda_scale.as_deref())
    }

    /// Σ_i log π(θ*_i | λ_i).
    pub fn ln_prior(&self, nu: f64) -> Result<f64> {
        let mut s = 0.0;
        for (i, t) in self.theta.iter().enumerate() {
            s += GgdPrior::new(nu, self.lambda_i(i))?.ln_density(*t);
        }
        Ok(s)
    }
}

fn prior_coords(theta: &[f64], scale: Option<&[f64]>) -> Vec<f64> {
    match scale {
        None => theta.to_vec(),
        Some(w) => theta.iter().zip(w).map(|(t, w)| w.sqrt() * t).collect(),
    }
}

fn check_scale(scale: Option<&[f64]>, d: usize) -> Result<()> {
    if let Some(w) = scale {
        if w.len() != d {
            return Err(Error::ShapeMismatch {
                expected: d,
                found: w.len(),
            });
        }
        if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("prior scales must be positive and finite"));
        }
    }
    Ok(())
}

/// Approximation diagnostics for one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub zeta: f64,
    /// Σ_i μ_i, the sharpened replacement of (d/2)ζ.
    pub mu_sum: f64,
    pub kappa_bound: f64,
    pub xi_bound: f64,
    pub omega: f64,
    #[serde(rename = "X")]
    pub x_big: f64,
    pub n_big: f64,
    pub min_standardized_theta: f64,
    /// ζ < 1, X < 1 and N > 1.
    pub valid: bool,
}

/// Reported operating ranges (1-D tables).
pub const ZETA_MAX: f64 = 5e-2;
pub const KAPPA_MAX: f64 = 5e-2;
pub const OMEGA_MAX: f64 = 0.5;
pub const X_MAX: f64 = 2e-2;
pub const MIN_THETA_RANGE: (f64, f64) = (1.9, 4.0);

impl Diagnostics {
    /// Names of the operating-range checks that fail.
    pub fn range_violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !(self.zeta <= ZETA_MAX) {
            v.push("zeta");
        }
        if !(self.kappa_bound <= KAPPA_MAX) {
            v.push("kappa");
        }
        if !(self.omega <= OMEGA_MAX) {
            v.push("omega");
        }
        if !(self.x_big <= X_MAX) {
            v.push("X");
        }
        let (lo, hi) = MIN_THETA_RANGE;
        if !(self.min_standardized_theta > lo && self.min_standardized_theta < hi) {
            v.push("min_theta");
        }
        v
    }
}

/// Integration intervals and the Θ* shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalConfig {
    pub i_tau: Interval,
    pub i_lambda: Interval,
    pub j_tau_star: Interval,
    /// Inner and outer shell radii (r_ν, R_ν).
    pub theta_shell: (f64, f64),
    pub k_tauhat: f64,
}

/// Default k in the τ̂ half-width.
pub const K_TAUHAT: f64 = 2.0;
const LAMBDA_FLOOR: f64 = 1e-3;

impl IntervalConfig {
    /// I_τ: the widest interval allowed around τ* for the given N;
    /// I_λ = λ*(1 ± w) with w the λ discretisation (c = 1), floored at
    /// 1e-3 λ*; J_τ* = I_τ; shell r = τ*^{-1/2}, R = (Σ|θ*|^ν)^{1/ν}, both in
    /// prior coordinates.
    pub fn from_fit(fit: &ModelFit, n_big: f64) -> Result<Self> {
        if !(n_big > 1.0) {
            return Err(Error::ApproximationInvalid(format!(
                "N = {n_big} too small for an interval on tau"
            )));
        }
        let l = n_big.ln();
        let a = (l * l / n_big).sqrt();
        let b = (2.0 * l * l / n_big).sqrt();
        let i_tau = Interval::new(fit.tau * (-a).exp(), fit.tau * b.exp())?;
        let d = fit.d() as f64;
        let (w, r, big_r) = match fit.prior {
            PriorModel::Ggd { nu } => {
                let s: f64 = fit.prior_coords().iter().map(|t| t.abs().powf(nu)).sum();
                // Inner radius in prior coordinates: τ*^{-1/2} times the
                // order-ν power mean of √w_i (1 when unscaled).
                let m = match &fit.lambda_scale {
                    None => 1.0,
                    Some(sc) => (sc.iter().map(|w| w.powf(0.5 * nu)).sum::<f64>() / d).powf(1.0 / nu),
                };
                (2.0 / (nu * (d + 2.0)).sqrt(), m * fit.tau.powf(-0.5), s.powf(1.0 / nu))
            }
            PriorModel::Jeffreys => {
                let s: f64 = fit.theta.iter().map(|t| t * t).sum();
                (2f64.sqrt() / (d + 2.0).sqrt(), fit.tau.powf(-0.5), s.sqrt())
            }
        };
        let lo = (fit.lambda * (1.0 - w)).max(LAMBDA_FLOOR * fit.lambda);
        let i_lambda = Interval::new(lo, fit.lambda * (1.0 + w))?;
        Ok(Self {
            i_tau,
            i_lambda,
            j_tau_star: i_tau,
            theta_shell: (r, big_r),
            k_tauhat: K_TAUHAT,
        })
    }
}

/// Full codelength breakdown for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodelengthReport {
    pub d: usize,
    pub n: usize,
    pub l_total: f64,
    pub q: f64,
    pub delta_d: Interval,
    pub log_c_gamma: Interval,
    /// log D(p, q); Q carries −log D.
    pub log_d: f64,
    pub tau_star: f64,
    pub lambda_star: f64,
    pub nu: Option<f64>,
    /// n ln 2 + ln n, the constant index and size codes.
    pub constant_terms: f64,
    pub diagnostics: Diagnostics,
}
