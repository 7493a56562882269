//! Estimator oracles: brute-force MAP, SURE by Monte Carlo, the ν = 1
//! soft-threshold identity.

use mdlshrink::estimators::{ggd_map_estimate, ggd_threshold, sure_value, threshold, ThresholdKind};
use mdlshrink::{GgdPrior, MapTable, NoiseRng};

use super::Check;

/// Posterior objective ½τ(x − θ)² + (η√λ|θ|)^ν, written out directly.
fn objective(x: f64, theta: f64, nu: f64, lambda: f64, tau: f64) -> f64 {
    let eta = (0.5 * (libm::lgamma(3.0 / nu) - libm::lgamma(1.0 / nu))).exp();
    0.5 * tau * (x - theta).powi(2) + (eta * lambda.sqrt() * theta.abs()).powf(nu)
}

/// Grid minimization over [0, x] (the minimizer lies between 0 and x)
/// followed by golden-section refinement around the best node.
pub fn brute_force_map(x: f64, nu: f64, lambda: f64, tau: f64) -> f64 {
    let f = |t: f64| objective(x, t, nu, lambda, tau);
    let m = 20_000;
    let h = x / m as f64;
    let (mut best_k, mut best) = (0, f(0.0));
    for k in 1..=m {
        let v = f(k as f64 * h);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    if best_k == 0 {
        return 0.0;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best_k as f64 - 1.0) * h, ((best_k + 1).min(m) as f64) * h);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    if f(t) <= best {
        t
    } else {
        best_k as f64 * h
    }
}

/// Random (ν, λ, τ, x) draws; the MAP solver with and without a lookup
/// table against [`brute_force_map`].
pub fn map_oracle(cases: usize, seed: u64) -> Check {
    let mut rng = NoiseRng::new(seed);
    let mut worst = (0.0f64, String::new());
    for _ in 0..cases {
        let nu = 0.3 + 1.7 * rng.uniform();
        let lambda = (6.0 * rng.uniform() - 3.0).exp();
        let tau = (4.0 * rng.uniform() - 2.0).exp();
        let x = (16.0 * rng.uniform() - 8.0) / tau.sqrt();
        let prior = GgdPrior::new(nu, lambda).unwrap();
        let table = MapTable::build(nu, 1e-3).unwrap();
        let brute = brute_force_map(x, nu, lambda, tau);
        for t in [None, Some(&table)] {
            let got = ggd_map_estimate(x, &prior, tau, t).unwrap();
            let err = (got - brute).abs() / x.abs().max(1.0);
            if err > worst.0 {
                worst = (
                    err,
                    format!("nu {nu:.3} lambda {lambda:.3} tau {tau:.3} x {x:.4}: {got} vs {brute}"),
                );
            }
        }
    }
    Check {
        name: "GGD-MAP vs brute force",
        pass: worst.0 <= 1e-3,
        detail: format!("{cases} cases, worst scaled error {:.2e} ({})", worst.0, worst.1),
    }
}

/// E[SURE(x, t)] against the true soft-threshold risk E‖η_t(x) − μ‖² for
/// unit-variance Gaussian data around a fixed mean.
pub fn sure_monte_carlo(n: usize, replicates: usize, seed: u64) -> Check {
    let mut rng = NoiseRng::new(seed);
    let mu: Vec<f64> = (0..n)
        .map(|i| {
            if i % 8 == 0 {
                4.0 * rng.normal()
            } else {
                0.3 * rng.normal()
            }
        })
        .collect();
    let ts = [0.5, 1.5, 2.5];
    let mut sure = [0.0; 3];
    let mut risk = [0.0; 3];
    for _ in 0..replicates {
        let x: Vec<f64> = mu.iter().map(|m| m + rng.normal()).collect();
        for (k, &t) in ts.iter().enumerate() {
            sure[k] += sure_value(&x, t).unwrap();
            risk[k] += x
                .iter()
                .zip(&mu)
                .map(|(&v, m)| (threshold(v, ThresholdKind::Soft, t, None).unwrap() - m).powi(2))
                .sum::<f64>();
        }
    }
    let rel: Vec<f64> = sure.iter().zip(&risk).map(|(s, r)| (s - r).abs() / r).collect();
    let worst = rel.iter().cloned().fold(0.0, f64::max);
    Check {
        name: "SURE unbiasedness",
        pass: worst <= 0.02,
        detail: format!("n {n}, {replicates} replicates, relative gaps {rel:.4?} at t = {ts:?}"),
    }
}

/// t̄ at ν = 1 is one half, and the ν = 1 MAP rule is soft thresholding at
/// √(2λ)/τ.
pub fn laplace_is_soft_threshold(cases: usize, seed: u64) -> Check {
    let t_bar = ggd_threshold(1.0).unwrap();
    let mut rng = NoiseRng::new(seed);
    let table = MapTable::build(1.0, 1e-3).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let lambda = (4.0 * rng.uniform() - 2.0).exp();
        let tau = (4.0 * rng.uniform() - 2.0).exp();
        let x = 10.0 * (2.0 * rng.uniform() - 1.0) / tau.sqrt();
        let prior = GgdPrior::new(1.0, lambda).unwrap();
        let soft = threshold(x, ThresholdKind::Soft, (2.0 * lambda).sqrt() / tau, None).unwrap();
        for t in [None, Some(&table)] {
            let got = ggd_map_estimate(x, &prior, tau, t).unwrap();
            worst = worst.max((got - soft).abs() / x.abs().max(1.0));
        }
    }
    Check {
        name: "nu = 1 soft threshold",
        pass: t_bar == 0.5 && worst <= 1e-10,
        detail: format!("t_bar = {t_bar}, worst deviation {worst:.2e} over {cases} cases"),
    }
}

/// The three estimator oracles as one criterion.
pub fn estimator_oracles() -> Check {
    let parts = [
        map_oracle(1000, 31),
        sure_monte_carlo(256, 10_000, 32),
        laplace_is_soft_threshold(1000, 33),
    ];
    Check {
        name: "estimator oracles",
        pass: parts.iter().all(|c| c.pass),
        detail: parts.iter().map(|c| c.line()).collect::<Vec<_>>().join("; "),
    }
}
