//! The selection codelength Q, its precision Δ_d and the total codelength.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{lambda_ml_ggd, GgdPrior};
use crate::special::{ln_normal_cdf, LN_2PI};

use super::bounds::{ln_psi_jeffreys, ln_renorm_integral, log_c_gamma_bounds};
use super::marginal::{diagnostics, marginal_laplace, psi_lambda_lambda_ggd};
use super::model_prior::{log_d_leading, model_class_log_d, Reference};
use super::{CodelengthReport, Diagnostics, Interval, IntervalConfig, ModelFit, PriorModel};

/// C_λ used in the model-class prior.
pub const C_LAMBDA: f64 = 1.0;

/// Every term of Q and Δ_d for one model, for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub d: usize,
    pub neg_log_d: f64,
    pub half_dof: f64,
    pub ln_i_tau: f64,
    pub ln_i_lambda: f64,
    pub dof_term: f64,
    pub ln_perp: f64,
    pub neg_ln_prior: f64,
    pub ln_psi: f64,
    pub ln_integral: f64,
    pub q: f64,
    pub log_c_lo: f64,
    pub log_c_hi: f64,
    pub ln_residual: f64,
    pub ln_rho: f64,
    pub neg_ln_pg: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub l_total: f64,
    pub zeta: f64,
    pub x_big: f64,
    pub valid: bool,
}

fn log_d_for(fit: &ModelFit, nu: f64, reference: Reference) -> Result<f64> {
    let d = fit.d();
    if d < 3 {
        return Ok(log_d_leading(nu, reference, d, C_LAMBDA));
    }
    let nu_q = match reference {
        Reference::Jeffreys => 2.0,
        Reference::Ggd { nu_q } => nu_q,
        Reference::Same => return Ok(0.0),
    };
    let alpha = fit.lambda / lambda_ml_ggd(&fit.prior_coords(), nu_q)?;
    model_class_log_d(nu, reference, d, C_LAMBDA, alpha)
}

fn ggd_terms(
    fit: &ModelFit,
    nu: f64,
    iv: &IntervalConfig,
    diag: &Diagnostics,
    reference: Reference,
) -> Result<TraceRow> {
    let n = fit.n as f64;
    let d = fit.d() as f64;
    let dof = n - d + 2.0;
    GgdPrior::new(nu, fit.lambda)?;
    let log_d = log_d_for(fit, nu, reference)?;
    let ln_int = ln_renorm_integral(fit, iv)?;
    let mut r = TraceRow {
        d: fit.d(),
        neg_log_d: -log_d,
        half_dof: 0.5 * dof,
        ln_i_tau: iv.i_tau.width().ln(),
        ln_i_lambda: iv.i_lambda.width().ln(),
        dof_term: -0.5 * (dof - 1.0) * (dof / std::f64::consts::TAU).ln(),
        ln_perp: 0.5 * dof * fit.x_perp_norm2.ln(),
        neg_ln_prior: -fit.ln_prior(nu)?,
        ln_psi: psi_lambda_lambda_ggd(fit.lambda, nu, fit.d()).ln(),
        ln_integral: ln_int,
        q: 0.0,
        log_c_lo: 0.0,
        log_c_hi: 0.0,
        ln_residual: 0.0,
        ln_rho: 0.0,
        neg_ln_pg: 0.0,
        delta_lo: 0.0,
        delta_hi: 0.0,
        l_total: 0.0,
        zeta: diag.zeta,
        x_big: diag.x_big,
        valid: diag.valid,
    };
    r.q = r.neg_log_d
        + r.half_dof
        + r.ln_i_tau
        + r.ln_i_lambda
        + r.dof_term
        + r.ln_perp
        + r.neg_ln_prior
        + r.ln_psi
        + r.ln_integral;

    let rho = fit.residual_norm2() / fit.x_perp_norm2;
    if !(rho < 1.0) {
        return Err(Error::ApproximationInvalid(format!("residual ratio {rho} >= 1")));
    }
    let c = log_c_gamma_bounds(fit, iv, diag)?;
    r.log_c_lo = c.lo;
    r.log_c_hi = c.hi;
    r.ln_residual = 0.5 * dof * rho.ln_1p();
    r.ln_rho = 0.5 * ((1.0 - rho) / (1.0 + rho)).ln();
    r.neg_ln_pg = -fit
        .theta
        .iter()
        .map(|t| ln_normal_cdf(fit.tau.sqrt() * t.abs()))
        .sum::<f64>();
    let rest = -ln_int + r.ln_residual - 1.5 * LN_2PI - 0.5 * std::f64::consts::LN_2 + r.ln_rho + r.neg_ln_pg;
    r.delta_lo = c.lo + rest;
    r.delta_hi = c.hi + rest;
    Ok(r)
}

/// Jeffreys configuration: L = −log m + log C with exact log C; Δ_d is the
/// point log((n−d)/(n−d+2)) and Q carries the rest.
fn jeffreys_terms(fit: &ModelFit, iv: &IntervalConfig, diag: &Diagnostics) -> Result<TraceRow> {
    let n = fit.n as f64;
    let d = fit.d() as f64;
    let (ln_m, _) = marginal_laplace(fit, iv)?;
    let c = log_c_gamma_bounds(fit, iv, diag)?;
    let delta = ((n - d) / (n - d + 2.0)).ln();
    let q = -ln_m + c.mid() - delta;
    Ok(TraceRow {
        d: fit.d(),
        neg_log_d: 0.0,
        half_dof: 0.0,
        ln_i_tau: iv.i_tau.width().ln(),
        ln_i_lambda: iv.i_lambda.width().ln(),
        dof_term: 0.0,
        ln_perp: 0.0,
        neg_ln_prior: 0.0,
        ln_psi: ln_psi_jeffreys(fit),
        ln_integral: ln_renorm_integral(fit, iv)?,
        q,
        log_c_lo: c.lo,
        log_c_hi: c.hi,
        ln_residual: 0.0,
        ln_rho: 0.0,
        neg_ln_pg: 0.0,
        delta_lo: delta,
        delta_hi: delta,
        l_total: 0.0,
        zeta: diag.zeta,
        x_big: diag.x_big,
        valid: diag.valid,
    })
}

/// Diagnostics, intervals and every codelength term for one fit.
pub fn trace_terms(fit: &ModelFit, reference: Reference) -> Result<(TraceRow, Diagnostics, IntervalConfig)> {
    let diag = diagnostics(fit)?;
    if !diag.valid {
        return Err(Error::ApproximationInvalid(format!(
            "diagnostics invalid at d = {}: zeta = {}, X = {}, N = {}",
            fit.d(),
            diag.zeta,
            diag.x_big,
            diag.n_big
        )));
    }
    let iv = IntervalConfig::from_fit(fit, diag.n_big)?;
    let mut row = match fit.prior {
        PriorModel::Ggd { nu } => ggd_terms(fit, nu, &iv, &diag, reference)?,
        PriorModel::Jeffreys => jeffreys_terms(fit, &iv, &diag)?,
    };
    row.l_total = row.q + 0.5 * (row.delta_lo + row.delta_hi) + constant_terms(fit.n);
    Ok((row, diag, iv))
}

/// n ln 2 + ln n: the index code and the size code.
pub fn constant_terms(n: usize) -> f64 {
    n as f64 * std::f64::consts::LN_2 + (n as f64).ln()
}

/// Q, the part of the codelength that drives the choice of d.
pub fn codelength_q(fit: &ModelFit, reference: Reference) -> Result<f64> {
    Ok(trace_terms(fit, reference)?.0.q)
}

/// Δ_d as an interval from the log C_γ sandwich.
pub fn codelength_delta_d(fit: &ModelFit, reference: Reference) -> Result<Interval> {
    let r = trace_terms(fit, reference)?.0;
    Interval::new(r.delta_lo, r.delta_hi)
}

/// Total codelength report: L = Q + mid(Δ_d) + n ln 2 + ln n.
pub fn codelength_total(fit: &ModelFit, reference: Reference) -> Result<CodelengthReport> {
    let (row, diag, _) = trace_terms(fit, reference)?;
    Ok(CodelengthReport {
        d: fit.d(),
        n: fit.n,
        l_total: row.l_total,
        q: row.q,
        delta_d: Interval::new(row.delta_lo, row.delta_hi)?,
        log_c_gamma: Interval::new(row.log_c_lo, row.log_c_hi)?,
        log_d: -row.neg_log_d,
        tau_star: fit.tau,
        lambda_star: fit.lambda,
        nu: fit.nu(),
        constant_terms: constant_terms(fit.n),
        diagnostics: diag,
    })
}
