//! Marginal oracle: Laplace marginal against direct quadrature.

use mdlshrink::codelength::{diagnostics, marginal_laplace, IntervalConfig, ModelFit, ModelIndex};
use mdlshrink::NoiseRng;

use super::{quad, Check};

/// One marginal-oracle instance: log of the quadrature marginal, the
/// Laplace value and the envelope half-widths (ln lo, ln hi).
pub struct MarginalCase {
    pub nu: f64,
    pub d: usize,
    pub n: usize,
    pub ln_quad: f64,
    pub ln_laplace: f64,
    pub ln_env: (f64, f64),
}

impl MarginalCase {
    pub fn inside(&self) -> bool {
        let r = self.ln_quad - self.ln_laplace;
        r >= self.ln_env.0 && r <= self.ln_env.1
    }
}

/// Direct quadrature of (1/|I_τ||I_λ|)∫∫∫ f(x|θ,τ)π(θ|λ) dθ dτ dλ. The θ
/// integral factorizes over coordinates; each factor, the λ integral and the
/// τ integral are done by adaptive Gauss–Kronrod.
pub fn quadrature_marginal(x_par: &[f64], perp: f64, n: usize, nu: f64, iv: &IntervalConfig, tau_ref: f64) -> f64 {
    let ln_f = |tau: f64| 0.5 * n as f64 * (tau / std::f64::consts::TAU).ln() - 0.5 * tau * perp;
    let base = ln_f(tau_ref);
    let coord = |x: f64, tau: f64, lambda: f64| {
        // density written out independently: νη√λ/(2Γ(1/ν)) exp(−(η√λ|θ|)^ν)
        let eta = (0.5 * (libm::lgamma(3.0 / nu) - libm::lgamma(1.0 / nu))).exp();
        let ln_c = (nu * eta).ln() + 0.5 * lambda.ln() - std::f64::consts::LN_2 - libm::lgamma(1.0 / nu);
        let s = eta * lambda.sqrt();
        let g = |t: f64| (-0.5 * tau * (x - t) * (x - t) + ln_c - (s * t.abs()).powf(nu)).exp();
        let w = 40.0 / tau.sqrt();
        let (lo, hi) = (x.min(0.0), x.max(0.0));
        quad::integrate_pieces(g, &[lo - w, lo, hi, hi + w], 1e-6)
    };
    let inner = |tau: f64| {
        let over_lambda = |lambda: f64| x_par.iter().map(|&x| coord(x, tau, lambda)).product::<f64>();
        let v = quad::integrate_pieces(over_lambda, &[iv.i_lambda.lo, iv.i_lambda.hi], 1e-5);
        (ln_f(tau) - base).exp() * v
    };
    let v = quad::integrate_pieces(inner, &[iv.i_tau.lo, tau_ref, iv.i_tau.hi], 1e-5);
    base + v.ln() - iv.i_tau.width().ln() - iv.i_lambda.width().ln()
}

/// A high-SNR instance: d strong coefficients (|√τθ| between 5 and 12)
/// among n − d unit-variance noise values.
pub fn marginal_case(d: usize, n: usize, nu: f64, rng: &mut NoiseRng) -> Option<MarginalCase> {
    let mut x = rng.normal_vec(n, 1.0);
    for v in x.iter_mut().take(d) {
        let a = 5.0 + 7.0 * rng.uniform();
        *v += if rng.uniform() < 0.5 { -a } else { a };
    }
    let gamma = ModelIndex::new((0..d).collect(), n).ok()?;
    let fit = ModelFit::ggd_joint(&x, &gamma, nu, None, 200).ok()?;
    let diag = diagnostics(&fit).ok()?;
    if !diag.valid {
        return None;
    }
    let iv = IntervalConfig::from_fit(&fit, diag.n_big).ok()?;
    let (ln_laplace, _) = marginal_laplace(&fit, &iv).ok()?;
    let (x_par, perp) = gamma.split(&x).ok()?;
    let ln_quad = quadrature_marginal(&x_par, perp, n, nu, &iv, fit.tau);
    let hi =
        (1.0 + diag.kappa_bound).ln() + (1.0 + diag.xi_bound).ln() + (1.0 + diag.zeta).ln() + (1.0 + diag.omega).ln();
    let lo =
        -(1.0 + diag.kappa_bound).ln() - (1.0 + diag.xi_bound).ln() + (1.0 - diag.zeta).ln() - (1.0 + diag.omega).ln();
    Some(MarginalCase {
        nu,
        d,
        n,
        ln_quad,
        ln_laplace,
        ln_env: (lo, hi),
    })
}

/// Combinations of (ν, d, n) covered by the oracle.
pub const GRID: [(f64, usize, usize); 12] = [
    (0.7, 1, 32),
    (0.7, 1, 64),
    (0.7, 2, 32),
    (0.7, 2, 64),
    (1.0, 1, 32),
    (1.0, 1, 64),
    (1.0, 2, 32),
    (1.0, 2, 64),
    (2.0, 1, 32),
    (2.0, 1, 64),
    (2.0, 2, 32),
    (2.0, 2, 64),
];

/// `count` instances cycling through [`GRID`]; passes when at least 95%
/// land inside their envelopes. Instances with invalid diagnostics are
/// redrawn.
pub fn marginal_oracle(count: usize, seed: u64) -> Check {
    let mut rng = NoiseRng::new(seed);
    let mut inside = 0;
    let mut worst = (f64::NEG_INFINITY, String::new());
    let mut mean_r = 0.0;
    for k in 0..count {
        let (nu, d, n) = GRID[k % GRID.len()];
        let case = loop {
            if let Some(c) = marginal_case(d, n, nu, &mut rng) {
                break c;
            }
        };
        let r = case.ln_quad - case.ln_laplace;
        mean_r += r / count as f64;
        if case.inside() {
            inside += 1;
        }
        // Fraction of the envelope half-width used, on the side r falls.
        let used = if r >= 0.0 { r / case.ln_env.1 } else { r / case.ln_env.0 };
        if used > worst.0 {
            worst = (
                used,
                format!(
                    "nu {nu} d {d} n {n} r {r:.4} env ({:.4}, {:.4})",
                    case.ln_env.0, case.ln_env.1
                ),
            );
        }
    }
    let frac = inside as f64 / count as f64;
    Check {
        name: "marginal oracle",
        pass: frac >= 0.95,
        detail: format!(
            "{inside}/{count} inside envelope, mean log ratio {mean_r:.3}, tightest {:.0}% of half-width ({})",
            100.0 * worst.0,
            worst.1
        ),
    }
}

/// Flat (Jeffreys) configuration: L − L′ − log((n−d)/(n−d+2)) over a
/// range of nested models on a sparse signal with n = 1024.
pub fn inmdl_nml_corollary(seed: u64) -> Check {
    use mdlshrink::codelength::{codelength_total, nml_codelength, Reference};
    let n = 1024;
    let mut rng = NoiseRng::new(seed);
    let mut x = rng.normal_vec(n, 1.0);
    for i in 0..200 {
        let a = 8.0 + 40.0 * rng.uniform();
        x[i * 5] += if i % 2 == 0 { a } else { -a };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| x[*b].abs().total_cmp(&x[*a].abs()));
    let mut vals = Vec::new();
    let mut errors = Vec::new();
    for d in 8..=128 {
        let g = ModelIndex::new(order[..d].to_vec(), n).unwrap();
        let fit = ModelFit::jeffreys(&x, &g).unwrap();
        match (codelength_total(&fit, Reference::Jeffreys), nml_codelength(&x, &g)) {
            (Ok(l), Ok(lp)) => vals.push(l.l_total - lp.l_prime - ((n - d) as f64 / (n - d + 2) as f64).ln()),
            (Err(e), _) | (_, Err(e)) => errors.push(format!("d {d}: {e}")),
        }
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Check {
        name: "INMDL-NML corollary",
        pass: errors.is_empty() && hi - lo <= 0.1,
        detail: format!(
            "{} models d in 8..=128, offset {lo:.4} nats, spread {:.1e} nats{}",
            vals.len(),
            hi - lo,
            if errors.is_empty() {
                String::new()
            } else {
                format!("; {}", errors.join(", "))
            }
        ),
    }
}
