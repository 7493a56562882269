//! Generalized Gaussian prior and its MAP shrinkage rule.
//!
//! With Λ = 2η^ν λ^{ν/2}/τ and the rescaling x = Λ^{1/(2−ν)} x̄,
//! θ = Λ^{1/(2−ν)} θ̄, the MAP problem becomes: minimize
//! R(θ̄) = (x̄ − θ̄)² + |θ̄|^ν. Nonzero minimizers satisfy
//! x̄ = θ̄ + (ν/2)|θ̄|^{ν−1}, which is tabulated on a uniform θ̄ grid and
//! inverted by interpolation followed by a bracketed Newton polish.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::{bisect, ln_gamma};

/// Default node spacing in θ̄.
pub const DEFAULT_GRID_STEP: f64 = 1e-3;
const TABLE_END: f64 = 50.0;
const MAX_NODES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgdPrior {
    pub nu: f64,
    /// Precision; the prior variance is 1/λ.
    pub lambda: f64,
}

impl GgdPrior {
    pub fn new(nu: f64, lambda: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= 2.0) {
            return Err(invalid(format!("shape {nu} outside (0, 2]")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("precision {lambda} must be positive")));
        }
        Ok(Self { nu, lambda })
    }

    /// η(ν) = √(Γ(3/ν)/Γ(1/ν)).
    pub fn eta(&self) -> f64 {
        eta(self.nu)
    }

    /// C_ν = η(ν)^ν.
    pub fn c_nu(&self) -> f64 {
        self.eta().powf(self.nu)
    }

    /// log of the normalizing constant νη√λ/(2Γ(1/ν)).
    pub fn ln_norm(&self) -> f64 {
        (self.nu * self.eta()).ln() + 0.5 * self.lambda.ln() - std::f64::consts::LN_2 - ln_gamma(1.0 / self.nu)
    }

    pub fn ln_density(&self, theta: f64) -> f64 {
        self.ln_norm() - (self.eta() * self.lambda.sqrt() * theta.abs()).powf(self.nu)
    }

    /// Λ = 2η^ν λ^{ν/2}/τ.
    pub fn big_lambda(&self, tau: f64) -> f64 {
        2.0 * self.c_nu() * self.lambda.powf(self.nu / 2.0) / tau
    }

    /// Differential entropy of d independent coordinates, in nats.
    pub fn entropy(&self, d: usize) -> f64 {
        d as f64 * (1.0 / self.nu - self.ln_norm())
    }
}

pub fn eta(nu: f64) -> f64 {
    (0.5 * (ln_gamma(3.0 / nu) - ln_gamma(1.0 / nu))).exp()
}

/// Normalized switch point t̄_ν of the MAP rule (ν ≤ 1).
pub fn ggd_threshold(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid(format!("threshold needs 0 < nu <= 1, got {nu}")));
    }
    if nu == 1.0 {
        return Ok(0.5);
    }
    let e = 1.0 / (2.0 - nu);
    Ok(2f64.powf(-e) * (2.0 - nu) * (2.0 - 2.0 * nu).powf(-(1.0 - nu) * e))
}

/// Smallest nonzero normalized MAP value s̄_ν (ν < 1): the larger root of
/// t̄_ν = s + (ν/2)s^{ν−1}.
pub fn ggd_step(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid(format!("step needs 0 < nu < 1, got {nu}")));
    }
    let t = ggd_threshold(nu)?;
    let smin = (nu * (1.0 - nu) / 2.0).powf(1.0 / (2.0 - nu));
    let f = |s: f64| s + 0.5 * nu * s.powf(nu - 1.0) - t;
    Ok(bisect(f, smin, t, 1e-15))
}

/// Upper bound on the θ̄ grid spacing that keeps the interpolation error
/// below the posterior precision, for a model with d of n coefficients at
/// SNR Ω (clamped to at least 1).
pub fn ggd_step_bound(nu: f64, n: usize, d: usize, omega: f64) -> f64 {
    let omega = omega.max(1.0);
    let base = (n as f64 / d as f64) * omega / (2f64.powf(2.0 / nu) * eta(nu).powi(2));
    base.powf(0.5 * nu / (2.0 - nu)) / (n as f64).sqrt()
}

fn xbar_of(nu: f64, th: f64) -> f64 {
    th + 0.5 * nu * th.powf(nu - 1.0)
}

fn dxbar_of(nu: f64, th: f64) -> f64 {
    1.0 + 0.5 * nu * (nu - 1.0) * th.powf(nu - 2.0)
}

/// Solves x̄ = θ̄ + (ν/2)θ̄^{ν−1} on [lo, hi] (θ̄ > 0 branch) by Newton
/// steps safeguarded with bisection.
fn polish(nu: f64, xb: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut th = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = xbar_of(nu, th) - xb;
        if f == 0.0 {
            return th;
        }
        if f > 0.0 {
            hi = th;
        } else {
            lo = th;
        }
        let step = f / dxbar_of(nu, th);
        let mut next = th - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        // Relative tolerance: near ν = 2 the normalized roots can be tiny.
        if (next - th).abs() <= 1e-15 * th || hi - lo <= 1e-15 * hi {
            return next;
        }
        th = next;
    }
    th
}

/// Exact normalized MAP value θ̄*(x̄) without a table, for x̄ ≥ 0.
pub fn map_normalized_exact(nu: f64, xb: f64) -> f64 {
    let xb = xb.abs();
    if nu >= 2.0 {
        return xb / 2.0;
    }
    if nu == 1.0 {
        return (xb - 0.5).max(0.0);
    }
    if nu < 1.0 {
        let t = ggd_threshold(nu).expect("nu in range");
        if xb < t {
            return 0.0;
        }
        let smin = (nu * (1.0 - nu) / 2.0).powf(1.0 / (2.0 - nu));
        return polish(nu, xb, smin, xb.max(smin));
    }
    if xb == 0.0 {
        return 0.0;
    }
    polish(nu, xb, 0.0, xb)
}

/// Lookup table of (x̄, θ̄*) pairs for one shape ν ∈ (0, 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapTable {
    pub nu: f64,
    pub xbar: Vec<f64>,
    pub thbar: Vec<f64>,
    pub step: f64,
    /// Switch point t̄_ν (0 for ν > 1).
    pub tbar: f64,
    /// Jump size s̄_ν (0 for ν ≥ 1).
    pub sbar: f64,
}

impl MapTable {
    pub fn build(nu: f64, grid_step: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 2.0) {
            return Err(invalid(format!("table needs 0 < nu < 2, got {nu}")));
        }
        if !(grid_step > 0.0) {
            return Err(invalid("grid step must be positive"));
        }
        let (tbar, sbar) = if nu < 1.0 {
            (ggd_threshold(nu)?, ggd_step(nu)?)
        } else if nu == 1.0 {
            (0.5, 0.0)
        } else {
            (0.0, 0.0)
        };
        let span = TABLE_END - sbar;
        let count = ((span / grid_step).ceil() as usize).clamp(1, MAX_NODES - 1);
        let step = span / count as f64;
        let mut xbar = Vec::with_capacity(count + 1);
        let mut thbar = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let th = sbar + step * i as f64;
            let xb = if th == 0.0 {
                if nu == 1.0 {
                    0.5
                } else {
                    0.0
                }
            } else {
                xbar_of(nu, th)
            };
            thbar.push(th);
            xbar.push(xb);
        }
        Ok(Self {
            nu,
            xbar,
            thbar,
            step,
            tbar,
            sbar,
        })
    }

    fn bracket(&self, xb: f64) -> Option<usize> {
        if xb < self.xbar[0] || xb >= *self.xbar.last()? {
            return None;
        }
        let i = self.xbar.partition_point(|&v| v <= xb);
        Some(i - 1)
    }

    /// Piecewise-linear table value θ̄(x̄), for x̄ ≥ 0 within the table.
    pub fn interpolate(&self, xb: f64) -> f64 {
        let xb = xb.abs();
        if xb < self.tbar || xb < self.xbar[0] {
            return 0.0;
        }
        match self.bracket(xb) {
            Some(i) => {
                let w = (xb - self.xbar[i]) / (self.xbar[i + 1] - self.xbar[i]);
                self.thbar[i] + w * (self.thbar[i + 1] - self.thbar[i])
            }
            None => map_normalized_exact(self.nu, xb),
        }
    }

    /// θ̄*(x̄): the table bracket followed by a Newton polish. Odd in x̄.
    pub fn lookup(&self, xb: f64) -> f64 {
        let a = xb.abs();
        let v = if a < self.tbar || (self.nu > 1.0 && a == 0.0) {
            0.0
        } else if self.nu == 1.0 {
            (a - 0.5).max(0.0)
        } else {
            match self.bracket(a) {
                Some(i) => {
                    let lo = self.thbar[i];
                    let hi = self.thbar[i + 1];
                    if lo == 0.0 && a == 0.0 {
                        0.0
                    } else {
                        polish(self.nu, a, lo, hi)
                    }
                }
                None if a < self.xbar[0] => 0.0,
                None => polish(self.nu, a, *self.thbar.last().unwrap_or(&0.0), a),
            }
        };
        v.copysign(xb)
    }

    /// dθ̄*/dx̄ at x̄ (0 below the switch point).
    pub fn derivative(&self, xb: f64) -> f64 {
        let th = self.lookup(xb).abs();
        if th == 0.0 {
            return 0.0;
        }
        1.0 / dxbar_of(self.nu, th)
    }

    /// Bound on |interpolate(x̄) − θ̄*(x̄)|: distance to the nearer node
    /// times the largest slope dθ̄/dx̄ on the bracketing cell.
    pub fn interpolation_error_bound(&self, xb: f64) -> f64 {
        let a = xb.abs();
        let Some(i) = self.bracket(a) else {
            return 0.0;
        };
        if a < self.tbar {
            return 0.0;
        }
        let dist = (a - self.xbar[i]).min(self.xbar[i + 1] - a);
        let slope = |th: f64| {
            if th == 0.0 {
                if self.nu > 1.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                1.0 / dxbar_of(self.nu, th).abs()
            }
        };
        dist * slope(self.thbar[i]).max(slope(self.thbar[i + 1]))
    }

    /// CSV dump `xbar,thbar`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("xbar,thbar\n");
        for (x, t) in self.xbar.iter().zip(&self.thbar) {
            s.push_str(&format!("{x:.17e},{t:.17e}\n"));
        }
        s
    }
}

/// Smooth-branch MAP (1 < ν < 2) in the original coordinates: the root of
/// τ(θ − |x|) + νκθ^{ν−1} = 0 on (0, |x|), κ = (η√λ)^ν, with the slope
/// ∂|θ*|/∂|x|. The normalized form needs Λ^{1/(2−ν)}, which under- or
/// overflows as ν → 2.
fn map_direct(x: f64, prior: &GgdPrior, tau: f64) -> (f64, f64) {
    let nu = prior.nu;
    let kappa = (prior.eta() * prior.lambda.sqrt()).powf(nu);
    let a = x.abs();
    let g = |t: f64| tau * (t - a) + nu * kappa * t.powf(nu - 1.0);
    let dg = |t: f64| tau + nu * (nu - 1.0) * kappa * t.powf(nu - 2.0);
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let (mut lo, mut hi) = (0.0, a);
    let mut t = 0.5 * a;
    for _ in 0..200 {
        let f = g(t);
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - f / dg(t);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t || hi - lo <= 1e-15 * hi {
            t = next;
            break;
        }
        t = next;
    }
    (t.copysign(x), tau / dg(t))
}

/// θ* for one coefficient: the linear closed form at ν = 2, a direct solve
/// for 1 < ν < 2 and the normalized rule for ν ≤ 1 (through the table when
/// given; it must have been built for `prior.nu`).
pub fn ggd_map_estimate(x: f64, prior: &GgdPrior, tau: f64, table: Option<&MapTable>) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("tau must be positive"));
    }
    let nu = prior.nu;
    if nu >= 2.0 {
        return Ok(x * tau / (tau + 2.0 * eta(2.0).powi(2) * prior.lambda));
    }
    if let Some(t) = table {
        if (t.nu - nu).abs() > 1e-12 {
            return Err(invalid(format!("table built for nu={}, prior has {nu}", t.nu)));
        }
    }
    if nu > 1.0 {
        return Ok(map_direct(x, prior, tau).0);
    }
    let scale = prior.big_lambda(tau).powf(1.0 / (2.0 - nu));
    let xb = x / scale;
    let th = match table {
        Some(t) => t.lookup(xb),
        None => map_normalized_exact(nu, xb).copysign(xb),
    };
    Ok(scale * th)
}

/// ∂|θ*|/∂|x| at x, from the inverse slope 1/(dx̄/dθ̄) at the MAP value
/// (0 where the estimate vanishes). Scale-free, so no rescaling is needed.
pub fn ggd_map_derivative(x: f64, prior: &GgdPrior, tau: f64, table: Option<&MapTable>) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("tau must be positive"));
    }
    let nu = prior.nu;
    if nu >= 2.0 {
        return Ok(tau / (tau + 2.0 * eta(2.0).powi(2) * prior.lambda));
    }
    if nu > 1.0 {
        return Ok(map_direct(x, prior, tau).1);
    }
    let scale = prior.big_lambda(tau).powf(1.0 / (2.0 - nu));
    let xb = x.abs() / scale;
    let th = match table {
        Some(t) => t.lookup(xb),
        None => map_normalized_exact(nu, xb),
    };
    if th == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / dxbar_of(nu, th))
}
