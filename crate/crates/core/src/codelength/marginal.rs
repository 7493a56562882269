//! Invariant Laplace approximation of the marginal density and its
//! approximation diagnostics.

use crate::error::{invalid, Error, Result};
use crate::estimators::GgdPrior;
use crate::special::{ln_normal_cdf, LN_2PI};

use super::nml::ln_fisher_volume;
use super::{Diagnostics, IntervalConfig, ModelFit, PriorModel};

/// Invariant noise precision: 1/τ* = (‖x⊥‖² + ‖x∥ − θ*‖²)/(n − d + 2).
pub fn tau_star(x_perp_norm2: f64, residual_norm2: f64, n: usize, d: usize) -> Result<f64> {
    if d + 1 > n {
        return Err(invalid(format!("model size {d} too large for n = {n}")));
    }
    let s = x_perp_norm2 + residual_norm2;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate("zero total residual".into()));
    }
    Ok((n - d + 2) as f64 / s)
}

/// |Ψ_λλ(θ*, λ*)|^{1/2} = (1/λ*)·√(ν(d+2)/4) for a GGD prior at the ML λ*.
pub fn psi_lambda_lambda_ggd(lambda_star: f64, nu: f64, d: usize) -> f64 {
    (nu * (d as f64 + 2.0) / 4.0).sqrt() / lambda_star
}

/// Prior curvature Δ_i = h''(θ_i) = ν(ν−1)η^ν λ_i^{ν/2}|θ_i|^{ν−2}.
fn prior_curvature(fit: &ModelFit, nu: f64) -> Vec<f64> {
    let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
    fit.theta
        .iter()
        .enumerate()
        .map(|(i, t)| nu * (nu - 1.0) * c * fit.lambda_i(i).powf(0.5 * nu) * t.abs().powf(nu - 2.0))
        .collect()
}

/// log det of the (d+1)×(d+1) Hessian of Φ at (θ*, τ*):
/// Π(τ+Δ_i)·[(n−d+2)/(2τ²) − Σ(x_i−θ_i)²/(τ+Δ_i)] for a GGD prior, and
/// the Fisher determinant τ^d·n/(2τ²) in the Jeffreys configuration.
pub fn ln_det_hessian(fit: &ModelFit) -> Result<f64> {
    let tau = fit.tau;
    let d = fit.d();
    match fit.prior {
        PriorModel::Jeffreys => Ok(d as f64 * tau.ln() + (fit.n as f64 / (2.0 * tau * tau)).ln()),
        PriorModel::Ggd { nu } => {
            let curv = prior_curvature(fit, nu);
            let mut ln = 0.0;
            let mut schur = (fit.n - d + 2) as f64 / (2.0 * tau * tau);
            for ((c, x), t) in curv.iter().zip(&fit.x_par).zip(&fit.theta) {
                let diag = tau + c;
                if !(diag > 0.0) {
                    return Err(Error::ApproximationInvalid("singular Hessian".into()));
                }
                ln += diag.ln();
                schur -= (x - t) * (x - t) / diag;
            }
            if !(schur > 0.0) {
                return Err(Error::ApproximationInvalid("singular Hessian".into()));
            }
            Ok(ln + schur.ln())
        }
    }
}

fn l_nu(nu: f64, s: f64, snr: f64) -> f64 {
    if nu <= 1.0 {
        s.abs().powf(nu - 1.0) * snr.powf(-0.5 * nu)
    } else {
        snr.powf(-0.5) * (1.0 + s.abs() * snr.powf(-0.5))
    }
}

/// Upper bound on ξ for a GGD prior, maximised over the two ends of I_τ.
fn xi_bound(fit: &ModelFit, nu: f64, i_tau: (f64, f64)) -> f64 {
    let d = fit.d() as f64;
    let eta = crate::estimators::GgdPrior { nu, lambda: 1.0 }.eta();
    let par2: f64 = fit.x_par.iter().map(|v| v * v).sum();
    let coef = 2.0 * eta.powf(nu) * nu / (std::f64::consts::TAU).sqrt();
    let expo = |tau1: f64| {
        let mut e = d * (0.5 + std::f64::consts::LN_2) - 0.5 * tau1 * par2;
        for (i, &x) in fit.x_par.iter().enumerate() {
            let lam = fit.lambda_i(i);
            let s = tau1.sqrt() * x;
            e += -s.abs().ln() + (eta * lam.sqrt() * x.abs()).powf(nu) + coef * l_nu(nu, s, tau1 / lam);
        }
        e
    };
    let e = expo(i_tau.0).max(expo(i_tau.1));
    e.exp().exp_m1()
}

/// N(λ, ν, γ_d): the τ-curvature left after eliminating θ, with the
/// sign factor read as |·| so the value is symmetric in θ.
fn n_big(fit: &ModelFit, nu: f64, mu: &[f64]) -> f64 {
    let tau = fit.tau;
    let n = fit.n as f64;
    let d = fit.d() as f64;
    let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
    let mut v = 0.5 * (n - d + 2.0);
    for (i, ((x, t), m)) in fit.x_par.iter().zip(&fit.theta).zip(mu).enumerate() {
        let s = tau.sqrt() * t.abs();
        v += tau * (x - t) * (2.0 * t - x);
        v += c
            * nu
            * (nu - 1.0)
            * (fit.snr_i(i).powf(-0.5 * nu) * s.powf(nu - 1.0) - 0.25 * (fit.lambda_i(i).sqrt() * t.abs()).powf(nu));
        v -= 0.25 * m * m * tau * t * t;
    }
    v
}

/// κ bound: third-order Taylor remainder plus the two quadrant terms.
fn kappa_bound(fit: &ModelFit, nu: Option<f64>, zeta: f64, n_big: f64) -> f64 {
    let tau = fit.tau;
    let mut t1 = 0.0;
    if let Some(nu) = nu {
        let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
        let pre = 4.0 / 3.0 * (1.0 + zeta) * c * nu * (nu - 1.0).abs() * (nu - 2.0).abs();
        let s: f64 = fit
            .theta
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let z = tau * t * t;
                fit.snr_i(i).powf(-0.5 * nu)
                    * (tau.sqrt() * t.abs()).powf(nu - 1.0)
                    * t.signum()
                    * (1.0 + 2.0 / z)
                    * (-0.5 * z).exp()
            })
            .sum();
        t1 = pre * s.abs();
    }
    let t2: f64 = fit
        .theta
        .iter()
        .map(|t| {
            let z = tau * t * t;
            z * (-0.5 * z).exp()
        })
        .sum::<f64>()
        / n_big;
    let s3: f64 = fit
        .x_par
        .iter()
        .zip(&fit.theta)
        .map(|(x, t)| tau.sqrt() * (x - 0.5 * t) * (-0.5 * tau * t * t).exp())
        .sum();
    let t3 = s3 * s3 / (std::f64::consts::TAU.sqrt() * n_big);
    t1 + t2 + t3
}

/// Σ_i (τ*/λ_i)^{−h}; d·(τ*/λ*)^{−h} without prior scales.
pub(crate) fn snr_power_sum(fit: &ModelFit, h: f64) -> f64 {
    match fit.lambda_scale {
        None => fit.d() as f64 * fit.snr_ratio().powf(-h),
        Some(_) => (0..fit.d()).map(|i| fit.snr_i(i).powf(-h)).sum(),
    }
}

/// All diagnostics for a fit. ξ needs I_τ, which itself depends on N, so
/// the interval is derived here from the computed N.
pub fn diagnostics(fit: &ModelFit) -> Result<Diagnostics> {
    let d = fit.d() as f64;
    let n = fit.n as f64;
    let tau = fit.tau;
    let min_std = fit
        .theta
        .iter()
        .map(|t| tau.sqrt() * t.abs())
        .fold(f64::INFINITY, f64::min);
    match fit.prior {
        PriorModel::Jeffreys => {
            let n_big = 0.5 * n;
            Ok(Diagnostics {
                zeta: 0.0,
                mu_sum: 0.0,
                kappa_bound: kappa_bound(fit, None, 0.0, n_big),
                xi_bound: 0.0,
                omega: (2.0 / (d + 2.0)).sqrt(),
                x_big: 0.0,
                n_big,
                min_standardized_theta: min_std,
                valid: n_big > 1.0,
            })
        }
        PriorModel::Ggd { nu } => {
            let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
            let mu: Vec<f64> = fit
                .theta
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    c * nu * (nu - 1.0) * fit.snr_i(i).powf(-0.5 * nu) * (tau.sqrt() * t.abs()).powf(nu - 2.0)
                })
                .collect();
            let zeta = mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mu_sum = mu.iter().map(|v| v.abs()).sum();
            let nb = n_big(fit, nu, &mu);
            let h = if nu <= 1.0 { nu } else { 0.5 * nu };
            let x_big = snr_power_sum(fit, h) / (n - d + 2.0) * 2.0 * c * c * nu * nu / (1.0 - zeta);
            let kappa = kappa_bound(fit, Some(nu), zeta, nb);
            let xi = if nb > 1.0 {
                let iv = IntervalConfig::from_fit(fit, nb)?;
                xi_bound(fit, nu, (iv.i_tau.lo, iv.i_tau.hi))
            } else {
                f64::INFINITY
            };
            let valid = zeta < 1.0 && (0.0..1.0).contains(&x_big) && nb > 1.0;
            Ok(Diagnostics {
                zeta,
                mu_sum,
                kappa_bound: kappa,
                xi_bound: xi,
                omega: (nu / (d + 2.0)).sqrt(),
                x_big,
                n_big: nb,
                min_standardized_theta: min_std,
                valid,
            })
        }
    }
}

/// Log of the Laplace marginal
/// (2π)^{(d+2)/2} f(x|τ*,θ*) π(θ*|λ*) / (|I_τ||I_λ||H|^{1/2}|Ψ_λλ|^{1/2}) · Π P_G(√τ*|θ*_i|).
/// In the Jeffreys configuration π/|I_τ| is replaced by the normalized
/// Fisher weight and the P_G product by 1.
pub fn marginal_laplace(fit: &ModelFit, intervals: &IntervalConfig) -> Result<(f64, Diagnostics)> {
    let diag = diagnostics(fit)?;
    if !(diag.zeta < 1.0) {
        return Err(Error::ApproximationInvalid(format!("zeta = {} >= 1", diag.zeta)));
    }
    let d = fit.d();
    let base = 0.5 * (d as f64 + 2.0) * LN_2PI + fit.ln_likelihood()
        - 0.5 * ln_det_hessian(fit)?
        - intervals.i_lambda.width().ln();
    let ln_m = match fit.prior {
        PriorModel::Ggd { nu } => {
            let ln_pi = fit.ln_prior(nu)?;
            let ln_pg: f64 = fit.theta.iter().map(|t| ln_normal_cdf(fit.tau.sqrt() * t.abs())).sum();
            base + ln_pi - intervals.i_tau.width().ln() - psi_lambda_lambda_ggd(fit.lambda, nu, d).ln() + ln_pg
        }
        PriorModel::Jeffreys => {
            let radius = intervals.theta_shell.1;
            let ln_fisher = 0.5 * (fit.n as f64 / 2.0).ln() + (d as f64 / 2.0 - 1.0) * fit.tau.ln();
            let ln_psi = (0.5 * (d as f64 + 2.0)).sqrt().ln() - fit.lambda.ln();
            base + ln_fisher - ln_fisher_volume(fit.n, d, radius, intervals.i_tau)? - ln_psi
        }
    };
    Ok((ln_m, diag))
}
