//! Bounds on the marginal renormalisation constant C_γ and on the
//! codelength precision Δ_d.

use crate::error::{invalid, Error, Result};
use crate::estimators::GgdPrior;
use crate::special::{ln_gamma, ln_normal_cdf, LN_2PI};

use super::marginal::snr_power_sum;
use super::{Diagnostics, Interval, IntervalConfig, ModelFit, PriorModel};

/// log ∫_Θ π(θ|λ*)/|Ψ_λλ|^{1/2} dθ over the shell r^ν < Σ|θ_i|^ν < R^ν,
/// evaluated exactly through the Dirichlet volume of the ℓ_ν ball:
/// (ν(d+2)/4)^{-1/2} η^{-2} ((d+2)/ν)^{(d+2)/ν} e^{-(d+2)/ν} Γ(d/ν)^{-1}
/// (ν/2) r^{-2}(1 − (r/R)²).
pub fn ln_theta_integral_ggd(nu: f64, d: usize, r: f64, big_r: f64) -> Result<f64> {
    if !(r > 0.0 && r < big_r) {
        return Err(invalid(format!("shell radii r = {r}, R = {big_r} need 0 < r < R")));
    }
    let df = d as f64;
    let eta = GgdPrior { nu, lambda: 1.0 }.eta();
    let z = (df + 2.0) / nu;
    Ok(
        -0.5 * (nu * (df + 2.0) / 4.0).ln() - 2.0 * eta.ln() + z * (z.ln() - 1.0) - ln_gamma(df / nu) + (nu / 2.0).ln()
            - 2.0 * r.ln()
            + (-(r / big_r).powi(2)).ln_1p(),
    )
}

/// log of the renormalisation integral with the 1/|I_λ| and 1/|I_τ|
/// weights (J_τ* contributes |J_τ*|/|I_τ|).
pub fn ln_renorm_integral(fit: &ModelFit, iv: &IntervalConfig) -> Result<f64> {
    let tau_part = (iv.j_tau_star.width() / iv.i_tau.width()).ln();
    match fit.prior {
        PriorModel::Ggd { nu } => Ok(ln_theta_integral_ggd(nu, fit.d(), iv.theta_shell.0, iv.theta_shell.1)?
            - iv.i_lambda.width().ln()
            + tau_part),
        PriorModel::Jeffreys => Ok(-ln_psi_jeffreys(fit) - iv.i_lambda.width().ln() + tau_part),
    }
}

/// |Ψ_λλ|^{1/2} = √((d+2)/2)/λ* in the Jeffreys configuration.
pub(crate) fn ln_psi_jeffreys(fit: &ModelFit) -> f64 {
    (0.5 * (fit.d() as f64 + 2.0)).sqrt().ln() - fit.lambda.ln()
}

/// Sandwich on log C_γ. The Jeffreys configuration is exact.
pub fn log_c_gamma_bounds(fit: &ModelFit, iv: &IntervalConfig, diag: &Diagnostics) -> Result<Interval> {
    let n = fit.n as f64;
    let d = fit.d() as f64;
    let base = ((n - d) / (n - d + 2.0)).ln() + 0.5 * LN_2PI + ln_renorm_integral(fit, iv)?;
    match fit.prior {
        PriorModel::Jeffreys => Ok(Interval::point(base)),
        PriorModel::Ggd { nu } => {
            if !(diag.x_big < 1.0) {
                return Err(Error::ApproximationInvalid(format!("X = {} >= 1", diag.x_big)));
            }
            let c = GgdPrior { nu, lambda: 1.0 }.c_nu();
            let h = if nu <= 1.0 { nu } else { 0.5 * nu };
            let det_term = snr_power_sum(fit, h) * c * c * nu * nu / (n - d + 2.0);
            let lo =
                base - 0.5 * d * diag.zeta - 0.5 * (n - d) * det_term + d * ln_normal_cdf(diag.min_standardized_theta);
            let hi = base + 0.5 * d * diag.zeta;
            Interval::new(lo, hi)
        }
    }
}

/// Taylor envelope on Δ_d, valid when ρ = ‖x∥−θ*‖²/‖x⊥‖² < 1.
pub fn delta_taylor_envelope(fit: &ModelFit, iv: &IntervalConfig, diag: &Diagnostics) -> Result<Interval> {
    let rho = fit.residual_norm2() / fit.x_perp_norm2;
    if !(rho < 1.0) {
        return Err(Error::ApproximationInvalid(format!("residual ratio {rho} >= 1")));
    }
    let n = fit.n as f64;
    let d = fit.d() as f64;
    let c = log_c_gamma_bounds(fit, iv, diag)?;
    let ln_int = ln_renorm_integral(fit, iv)?;
    let k = -1.5 * LN_2PI - 0.5 * std::f64::consts::LN_2 - ln_int;
    let lo = c.lo + 0.5 * (n - d) * rho - 0.5 * d * diag.zeta + k;
    let hi =
        c.hi + 0.5 * (n - d + 14.0) * rho + 0.5 * d * diag.zeta - d * ln_normal_cdf(diag.min_standardized_theta) + k;
    Interval::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_integral_d2_gaussian() {
        // ν = 2, d = 2: π/|Ψ|^{1/2} = (λ*²/(2π√2))·exp(−2) with λ* = 4/‖θ‖²;
        // integrate over the annulus r < ‖θ‖ < R in polar coordinates.
        let (r, big_r) = (0.5, 3.0);
        let m = 200_000;
        let h = (big_r - r) / m as f64;
        let mut s = 0.0;
        for k in 0..m {
            let rho = r + (k as f64 + 0.5) * h;
            let lam = 4.0 / (rho * rho);
            s += lam * lam / (2.0 * std::f64::consts::PI * 2f64.sqrt())
                * (-2f64).exp()
                * 2.0
                * std::f64::consts::PI
                * rho
                * h;
        }
        let v = ln_theta_integral_ggd(2.0, 2, r, big_r).unwrap();
        assert!((v - s.ln()).abs() < 1e-6, "{v} vs {}", s.ln());
    }
}
