//! The INMDL selection loop: magnitude-ordered models, a scan over the
//! model size d, and the NML-seeded fixed-point iteration on (τ*, λ*, θ*, ν).

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codelength::{
    codelength_total, nml_codelength, posterior_bias, CodelengthReport, ModelFit, ModelIndex, Reference,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    ggd_map_derivative, ggd_map_estimate, lambda_ml_ggd, nu_estimate, GgdPrior, MapTable, DEFAULT_GRID_STEP,
};

/// Range the re-estimated shape is clamped to.
pub const NU_CLAMP: (f64, f64) = (0.3, 2.0);
/// Relative change in d* that ends the iteration.
pub const STOP_FRACTION: f64 = 0.05;

/// Hyperparameters held fixed while scanning d.
#[derive(Debug, Clone)]
pub struct Hyper {
    pub nu: f64,
    pub lambda: f64,
    pub tau: f64,
    pub table: Option<MapTable>,
    /// Per-position prior scales (length n); coefficient i has prior
    /// precision λ·w_i. Used for whitened deconvolution data.
    pub weights: Option<Arc<Vec<f64>>>,
}

impl Hyper {
    /// Builds the MAP table when ν ∈ (0, 2) and `use_table` is set.
    pub fn new(nu: f64, lambda: f64, tau: f64, use_table: bool) -> Result<Self> {
        GgdPrior::new(nu, lambda)?;
        if !(tau > 0.0) {
            return Err(invalid("tau must be positive"));
        }
        let table = if use_table && nu < 2.0 {
            Some(MapTable::build(nu, DEFAULT_GRID_STEP)?)
        } else {
            None
        };
        Ok(Self {
            nu,
            lambda,
            tau,
            table,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: Option<Arc<Vec<f64>>>) -> Self {
        self.weights = weights;
        self
    }

    pub fn prior(&self) -> GgdPrior {
        GgdPrior {
            nu: self.nu,
            lambda: self.lambda,
        }
    }

    /// θ* for the selected coefficients of `x` and the derived fit.
    pub fn fit(&self, x: &[f64], gamma: &ModelIndex) -> Result<ModelFit> {
        let scale = self
            .weights
            .as_ref()
            .map(|w| gamma.selected().iter().map(|&i| w[i]).collect());
        ModelFit::ggd_map_scaled(x, gamma, &self.prior(), self.tau, self.table.as_ref(), scale)
    }

    /// MAP estimate of every position under its own prior precision.
    pub fn map_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(w) = &self.weights {
            if w.len() != x.len() {
                return Err(Error::ShapeMismatch {
                    expected: x.len(),
                    found: w.len(),
                });
            }
        }
        x.par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let p = GgdPrior {
                    nu: self.nu,
                    lambda: self.lambda * self.weights.as_ref().map_or(1.0, |w| w[i]),
                };
                ggd_map_estimate(v, &p, self.tau, self.table.as_ref())
            })
            .collect()
    }

    /// Candidate order: decreasing |x_i| without weights, decreasing MAP
    /// magnitude |θ*_i| under λ·w_i with them (ties by |x_i|, then index).
    pub fn order(&self, x: &[f64]) -> Result<Vec<usize>> {
        if self.weights.is_none() {
            return Ok(magnitude_order(x));
        }
        Ok(map_order(x, &self.map_all(x)?))
    }
}

fn map_order(x: &[f64], est: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        est[b]
            .abs()
            .total_cmp(&est[a].abs())
            .then(x[b].abs().total_cmp(&x[a].abs()))
            .then(a.cmp(&b))
    });
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionState {
    pub gamma: ModelIndex,
    pub tau_star: f64,
    pub lambda_star: f64,
    pub nu_star: f64,
    /// Length n; nonzero exactly on `gamma`.
    pub theta_star: Vec<f64>,
    pub x_perp_norm2: f64,
    pub iteration: usize,
    pub report: Option<CodelengthReport>,
    /// d* after each pass, starting with the NML model.
    pub d_history: Vec<usize>,
    pub converged: bool,
    /// No d passed the validity conditions; the state holds the NML model.
    pub nml_fallback: bool,
    pub warnings: Vec<String>,
}

impl SelectionState {
    fn from_fit(fit: &ModelFit, gamma: ModelIndex, nu: f64) -> Self {
        let mut theta_star = vec![0.0; gamma.n()];
        for (&i, &t) in gamma.selected().iter().zip(&fit.theta) {
            theta_star[i] = t;
        }
        Self {
            tau_star: fit.tau,
            lambda_star: fit.lambda,
            nu_star: nu,
            theta_star,
            x_perp_norm2: fit.x_perp_norm2,
            iteration: 0,
            report: None,
            d_history: vec![gamma.d()],
            converged: false,
            nml_fallback: false,
            warnings: Vec::new(),
            gamma,
        }
    }

    pub fn d(&self) -> usize {
        self.gamma.d()
    }

    /// θ* restricted to the selected positions.
    pub fn selected_theta(&self) -> Vec<f64> {
        self.gamma.selected().iter().map(|&i| self.theta_star[i]).collect()
    }
}

/// C(x∥(j) | S_{j−1}) for a candidate of magnitude `candidate_abs` under the
/// state's hyperparameters, GGD prior with ML λ*:
/// −(n−d+2)|x|/‖x⊥‖² + (d+2)|θ*_j|^{ν−1}(∂|θ*_j|/∂|x_j|)/Σ|θ*_i|^ν.
/// Candidates whose estimate vanishes get +∞.
pub fn selection_criterion(candidate_abs: f64, state: &SelectionState, table: Option<&MapTable>) -> Result<f64> {
    let prior = GgdPrior::new(state.nu_star, state.lambda_star)?;
    let a = candidate_abs.abs();
    let th = ggd_map_estimate(a, &prior, state.tau_star, table)?.abs();
    if th == 0.0 {
        return Ok(f64::INFINITY);
    }
    let slope = ggd_map_derivative(a, &prior, state.tau_star, table)?;
    let n = state.gamma.n() as f64;
    let d = state.d() as f64;
    let s: f64 = state.selected_theta().iter().map(|t| t.abs().powf(state.nu_star)).sum();
    if !(s > 0.0 && state.x_perp_norm2 > 0.0) {
        return Err(Error::Degenerate("state has no signal or no residual".into()));
    }
    Ok(-(n - d + 2.0) * a / state.x_perp_norm2 + (d + 2.0) * th.powf(state.nu_star - 1.0) * slope / s)
}

/// Indices of the d largest |x_i|, ties broken by index.
pub fn select_model_given_d(x: &[f64], d: usize) -> Result<ModelIndex> {
    let order = magnitude_order(x);
    ModelIndex::new(order[..d.min(order.len())].to_vec(), x.len())
}

/// All indices sorted by decreasing |x_i|, stable in the index.
pub fn magnitude_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    idx
}

/// One row of the `--trace-d` output; NaN where the model is inadmissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DTrace {
    pub d: usize,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Delta_lo")]
    pub delta_lo: f64,
    #[serde(rename = "Delta_hi")]
    pub delta_hi: f64,
    #[serde(rename = "L_total")]
    pub l_total: f64,
    pub zeta: f64,
    #[serde(rename = "X")]
    pub x_big: f64,
    pub valid: bool,
}

impl DTrace {
    fn invalid(d: usize) -> Self {
        Self {
            d,
            q: f64::NAN,
            delta_lo: f64::NAN,
            delta_hi: f64::NAN,
            l_total: f64::NAN,
            zeta: f64::NAN,
            x_big: f64::NAN,
            valid: false,
        }
    }

    pub const CSV_HEADER: &'static str = "d,Q,Delta_lo,Delta_hi,L_total,zeta,X,valid";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.d, self.q, self.delta_lo, self.delta_hi, self.l_total, self.zeta, self.x_big, self.valid
        )
    }
}

/// Result of a scan over d.
#[derive(Debug, Clone)]
pub struct DScan {
    pub d_star: usize,
    pub gamma: ModelIndex,
    pub fit: ModelFit,
    pub report: CodelengthReport,
    pub trace: Vec<DTrace>,
}

/// Default scan range 1..=n/2.
pub fn default_d_range(n: usize) -> (usize, usize) {
    (1, (n / 2).max(1))
}

/// Scans d over `d_range` (inclusive), selecting the d largest coefficients
/// and fitting θ* under `hyper`; returns the argmin of L_total (ties go to
/// the smaller d) and the per-d trace.
pub fn optimize_d(x: &[f64], hyper: &Hyper, reference: Reference, d_range: (usize, usize)) -> Result<DScan> {
    let n = x.len();
    let (lo, hi) = (d_range.0.max(1), d_range.1.min(n.saturating_sub(1)));
    if lo > hi {
        return Err(invalid(format!("empty d range {:?} for n = {n}", d_range)));
    }
    // With fixed hyperparameters θ*_i does not depend on d, so the MAP
    // estimates are computed once and every model reuses a prefix.
    let est = hyper.map_all(x)?;
    let order = match hyper.weights {
        None => magnitude_order(x),
        Some(_) => map_order(x, &est),
    };
    let rows: Vec<(DTrace, Option<(ModelFit, CodelengthReport)>)> = (lo..=hi)
        .into_par_iter()
        .map(|d| {
            let eval = || -> Result<(ModelFit, CodelengthReport)> {
                let gamma = ModelIndex::new(order[..d].to_vec(), n)?;
                let theta = gamma.selected().iter().map(|&i| est[i]).collect();
                let scale = hyper
                    .weights
                    .as_ref()
                    .map(|w| gamma.selected().iter().map(|&i| w[i]).collect());
                let fit = ModelFit::ggd_scaled(x, &gamma, hyper.nu, theta, scale)?;
                let report = codelength_total(&fit, reference)?;
                Ok((fit, report))
            };
            match eval() {
                Ok((fit, r)) if r.l_total.is_finite() => (
                    DTrace {
                        d,
                        q: r.q,
                        delta_lo: r.delta_d.lo,
                        delta_hi: r.delta_d.hi,
                        l_total: r.l_total,
                        zeta: r.diagnostics.zeta,
                        x_big: r.diagnostics.x_big,
                        valid: true,
                    },
                    Some((fit, r)),
                ),
                _ => (DTrace::invalid(d), None),
            }
        })
        .collect();
    let mut best: Option<(ModelFit, CodelengthReport)> = None;
    let mut trace = Vec::with_capacity(rows.len());
    for (row, fr) in rows {
        trace.push(row);
        if let Some((fit, r)) = fr {
            if best.as_ref().is_none_or(|(_, b)| r.l_total < b.l_total) {
                best = Some((fit, r));
            }
        }
    }
    let (fit, report) = best.ok_or_else(|| Error::ApproximationInvalid(format!("no admissible d in {lo}..={hi}")))?;
    debug_assert!(trace.iter().filter(|t| t.valid).all(|t| report.l_total <= t.l_total));
    let gamma = ModelIndex::new(order[..report.d].to_vec(), n)?;
    Ok(DScan {
        d_star: report.d,
        gamma,
        fit,
        report,
        trace,
    })
}

/// NML model: argmin over d of L′ for the d largest coefficients.
pub fn nml_select(x: &[f64], d_range: (usize, usize)) -> Result<(ModelIndex, f64)> {
    let n = x.len();
    let (lo, hi) = (d_range.0.max(1), d_range.1.min(n.saturating_sub(1)));
    let order = magnitude_order(x);
    let best = (lo..=hi)
        .into_par_iter()
        .filter_map(|d| {
            let gamma = ModelIndex::new(order[..d].to_vec(), n).ok()?;
            let l = nml_codelength(x, &gamma).ok()?.l_prime;
            l.is_finite().then_some((d, l))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::ApproximationInvalid("no admissible NML model".into()))?;
    Ok((ModelIndex::new(order[..best.0].to_vec(), n)?, best.1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InmdlConfig {
    pub max_iter: usize,
    /// Fixed shape; `None` re-estimates ν every pass.
    pub nu: Option<f64>,
    pub reference: Reference,
    /// Inclusive scan range; `None` uses 1..=n/2.
    pub d_range: Option<(usize, usize)>,
    pub use_table: bool,
}

impl Default for InmdlConfig {
    fn default() -> Self {
        Self {
            max_iter: 20,
            nu: None,
            reference: Reference::Jeffreys,
            d_range: None,
            use_table: true,
        }
    }
}

fn clamp_nu(nu: f64, warnings: &mut Vec<String>) -> f64 {
    let (lo, hi) = NU_CLAMP;
    if nu <= lo || nu > hi {
        let c = nu.clamp(lo + 1e-9, hi);
        warnings.push(format!("shape estimate {nu:.4} clamped to {c:.4}"));
        c
    } else {
        nu
    }
}

fn shape_for(theta: &[f64], config: &InmdlConfig, warnings: &mut Vec<String>) -> f64 {
    match config.nu {
        Some(nu) => nu,
        None => match nu_estimate(theta) {
            Ok(nu) => clamp_nu(nu, warnings),
            Err(_) => {
                warnings.push("shape estimate unavailable, using 1".into());
                1.0
            }
        },
    }
}

/// NML-seeded INMDL iteration. Each pass scans d with the hyperparameters of
/// the previous model, then re-derives τ*, λ*, θ* and ν from the new one;
/// stops when d* moves by at most 5%. A state that hits `max_iter` is
/// returned with `converged = false`.
pub fn inmdl_iterate(x: &[f64], config: &InmdlConfig) -> Result<SelectionState> {
    inmdl_iterate_weighted(x, config, None)
}

/// INMDL with per-position prior scales `weights` (length n).
pub fn inmdl_iterate_weighted(
    x: &[f64],
    config: &InmdlConfig,
    weights: Option<Arc<Vec<f64>>>,
) -> Result<SelectionState> {
    if config.max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }
    if let Some(nu) = config.nu {
        GgdPrior::new(nu, 1.0)?;
    }
    let n = x.len();
    let d_range = config.d_range.unwrap_or_else(|| default_d_range(n));
    let (gamma0, _) = nml_select(x, d_range)?;
    let ml = ModelFit::jeffreys(x, &gamma0)?;
    let u0: Vec<f64> = match &weights {
        None => ml.x_par.clone(),
        Some(w) => gamma0
            .selected()
            .iter()
            .zip(&ml.x_par)
            .map(|(&i, v)| w[i].sqrt() * v)
            .collect(),
    };
    let mut warnings = Vec::new();
    let nu0 = shape_for(&u0, config, &mut warnings);
    let lambda0 = lambda_ml_ggd(&u0, nu0)?;
    let mut hyper = Hyper::new(nu0, lambda0, ml.tau, config.use_table)?.with_weights(weights);
    let mut state = match hyper.fit(x, &gamma0) {
        Ok(fit) => SelectionState::from_fit(&fit, gamma0.clone(), nu0),
        Err(_) => SelectionState::from_fit(&ml, gamma0.clone(), nu0),
    };
    state.warnings = warnings;
    for it in 1..=config.max_iter {
        let scan = match optimize_d(x, &hyper, config.reference, d_range) {
            Ok(s) => s,
            Err(e) => {
                if it == 1 {
                    state.nml_fallback = true;
                    state
                        .warnings
                        .push(format!("no admissible model, keeping NML model: {e}"));
                    return Ok(state);
                }
                state.warnings.push(format!("pass {it}: {e}"));
                return Ok(state);
            }
        };
        let d_old = state.d();
        let gamma = scan.gamma.clone();
        let u = scan.fit.prior_coords();
        let mut warnings = std::mem::take(&mut state.warnings);
        let nu = shape_for(&u, config, &mut warnings);
        let mut history = std::mem::take(&mut state.d_history);
        history.push(scan.d_star);
        state = SelectionState::from_fit(&scan.fit, gamma, scan.fit.nu().unwrap_or(nu));
        state.iteration = it;
        state.report = Some(scan.report);
        state.d_history = history;
        state.warnings = warnings;
        let change = (scan.d_star as f64 - d_old as f64).abs() / d_old as f64;
        if change <= STOP_FRACTION {
            state.converged = true;
            break;
        }
        let lambda = lambda_ml_ggd(&u, nu)?;
        hyper = if (nu - hyper.nu).abs() > 0.0 {
            Hyper::new(nu, lambda, scan.fit.tau, config.use_table)?.with_weights(hyper.weights.clone())
        } else {
            Hyper {
                lambda,
                tau: scan.fit.tau,
                ..hyper
            }
        };
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    /// (E θ_i − θ*_i)/|θ*_i| over the selected positions.
    pub theta_rel: Vec<f64>,
    /// (E τ − τ*)/τ*.
    pub tau_rel: f64,
    /// Selected positions whose relative bias exceeds 1%.
    pub flagged: Vec<usize>,
}

/// Relative posterior biases of the state's estimates.
pub fn posterior_bias_report(x: &[f64], state: &SelectionState) -> Result<BiasReport> {
    let fit = ModelFit::ggd(x, &state.gamma, state.nu_star, state.selected_theta())?;
    let b = posterior_bias(&fit);
    let theta_rel: Vec<f64> = b.theta.iter().zip(&fit.theta).map(|(d, t)| d / t.abs()).collect();
    let flagged = theta_rel
        .iter()
        .zip(state.gamma.selected())
        .filter(|(r, _)| r.abs() > 0.01)
        .map(|(_, &i)| i)
        .collect();
    Ok(BiasReport {
        theta_rel,
        tau_rel: b.tau / fit.tau,
        flagged,
    })
}
