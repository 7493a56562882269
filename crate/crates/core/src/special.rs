//! Small numeric helpers: Gaussian distribution function, log-gamma and
//! one-dimensional root finding.

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Standard normal distribution function P_G(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// log P_G(x), accurate in the far left tail.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x > -5.0 {
        normal_cdf(x).ln()
    } else {
        // Mills-ratio asymptotic; relative error below 1e-6 for x < -5.
        let t = 1.0 / (x * x);
        let series = 1.0 - t + 3.0 * t * t - 15.0 * t * t * t + 105.0 * t.powi(4);
        -0.5 * x * x - (-x).ln() - 0.5 * LN_2PI + series.ln()
    }
}

/// The symmetric normalisation used alongside P_G:
/// erf*(x) = ∫_{-x}^{x} (2π)^{-1/2} e^{-t²/2} dt = 2 P_G(x) − 1.
pub fn erf_sym(x: f64) -> f64 {
    2.0 * normal_cdf(x) - 1.0
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Bisection on a bracketing interval; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Median of a slice (copies; average of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
        assert!((erf_sym(1.0) - 0.682_689_492_137_086).abs() < 1e-12);
    }

    #[test]
    fn ln_cdf_tail_continuity() {
        let a = normal_cdf(-5.0).ln();
        let b = ln_normal_cdf(-5.000_000_1);
        assert!((a - b).abs() < 1e-4);
        // log P_G(-10) from mpmath: -53.23128515051247
        assert!((ln_normal_cdf(-10.0) + 53.231_285_150_512_47).abs() < 1e-6);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
