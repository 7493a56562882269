//! Separable circular blur kernels, unitary 2-D FFTs and the (truncated)
//! pseudo-inverse.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Axis responses at or below this magnitude count as zeros.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Identity,
    /// Response cos^p(π|k|/n) on each axis.
    Hyperbolic {
        px: f64,
        py: f64,
    },
    /// Centred k×k box (odd k) with unit sum.
    Boxcar {
        k: usize,
    },
}

/// A separable, symmetric blur on a `rows x cols` periodic grid. The
/// Fourier response is real: û(ky, kx) = uy(ky)·ux(kx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlurKernel {
    pub kind: KernelKind,
    pub rows: usize,
    pub cols: usize,
    resp_x: Vec<f64>,
    resp_y: Vec<f64>,
}

/// |k| folded into [0, n/2].
pub fn folded_frequency(k: usize, n: usize) -> usize {
    k.min(n - k)
}

fn axis_response(kind: KernelKind, n: usize, p: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let f = folded_frequency(k, n) as f64;
            match kind {
                KernelKind::Identity => 1.0,
                KernelKind::Hyperbolic { .. } => (std::f64::consts::PI * f / n as f64).cos().powf(p),
                KernelKind::Boxcar { k: width } => {
                    let h = (width / 2) as i64;
                    (-h..=h)
                        .map(|m| (std::f64::consts::TAU * m as f64 * f / n as f64).cos())
                        .sum::<f64>()
                        / width as f64
                }
            }
        })
        .collect()
}

impl BlurKernel {
    pub fn new(kind: KernelKind, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("kernel grid must be non-empty"));
        }
        let (px, py) = match kind {
            KernelKind::Hyperbolic { px, py } => {
                if !(px >= 0.0 && py >= 0.0 && px.is_finite() && py.is_finite()) {
                    return Err(invalid("hyperbolic exponents must be finite and non-negative"));
                }
                (px, py)
            }
            KernelKind::Boxcar { k } => {
                if k == 0 || k % 2 == 0 {
                    return Err(invalid(format!("boxcar width {k} must be odd")));
                }
                if k > cols || (rows > 1 && k > rows) {
                    return Err(invalid(format!("boxcar width {k} exceeds the grid")));
                }
                (1.0, 1.0)
            }
            KernelKind::Identity => (1.0, 1.0),
        };
        let resp_x = axis_response(kind, cols, px);
        let resp_y = if rows == 1 {
            vec![1.0]
        } else {
            axis_response(kind, rows, py)
        };
        Ok(Self {
            kind,
            rows,
            cols,
            resp_x,
            resp_y,
        })
    }

    /// `identity`, `hyperbolic:p=3`, `hyperbolic:px=2,py=3` or `boxcar:9`.
    pub fn parse(spec: &str, rows: usize, cols: usize) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = Vec::new();
        for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').unwrap_or(("", part));
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad kernel parameter `{part}`")))?;
            kv.push((k.trim().to_string(), v));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
        let kind = match name {
            "identity" | "none" => KernelKind::Identity,
            "hyperbolic" => {
                let p = get("p").or_else(|| get("")).unwrap_or(3.0);
                KernelKind::Hyperbolic {
                    px: get("px").unwrap_or(p),
                    py: get("py").unwrap_or(p),
                }
            }
            "boxcar" => {
                let k = get("k").or_else(|| get("")).unwrap_or(9.0);
                if k.fract() != 0.0 || k < 1.0 {
                    return Err(Error::Parse(format!("boxcar width `{k}` is not a positive integer")));
                }
                KernelKind::Boxcar { k: k as usize }
            }
            _ => {
                return Err(Error::Unknown {
                    kind: "kernel",
                    name: spec.to_string(),
                })
            }
        };
        Self::new(kind, rows, cols)
    }

    pub fn is_identity(&self) -> bool {
        self.kind == KernelKind::Identity
    }

    /// Response along the columns (x) axis, indexed by DFT bin.
    pub fn response_x(&self) -> &[f64] {
        &self.resp_x
    }

    /// Response along the rows (y) axis; `[1]` for a 1-D grid.
    pub fn response_y(&self) -> &[f64] {
        &self.resp_y
    }

    pub fn response(&self, ky: usize, kx: usize) -> f64 {
        self.resp_y[ky] * self.resp_x[kx]
    }

    /// Per-axis pass masks of the truncated inverse: |u| > ZERO_TOL and
    /// folded |k| < k_c.
    pub fn passband(&self, k_c: Option<f64>) -> (Vec<bool>, Vec<bool>) {
        let mask = |resp: &[f64]| -> Vec<bool> {
            let n = resp.len();
            resp.iter()
                .enumerate()
                .map(|(k, u)| u.abs() > ZERO_TOL && k_c.is_none_or(|c| (folded_frequency(k, n) as f64) < c))
                .collect()
        };
        let my = if self.rows == 1 { vec![true] } else { mask(&self.resp_y) };
        (mask(&self.resp_x), my)
    }
}

/// Unitary DFT of a real `rows x cols` array.
pub fn fft2(x: &[f64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut buf, rows, cols, false);
    buf
}

/// Real part of the unitary inverse DFT.
pub fn ifft2_real(spec: &[Complex64], rows: usize, cols: usize) -> Vec<f64> {
    let mut buf = spec.to_vec();
    transform(&mut buf, rows, cols, true);
    buf.iter().map(|c| c.re).collect()
}

fn transform(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let mut plan = |n| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    let fx = plan(cols);
    for row in buf.chunks_exact_mut(cols) {
        fx.process(row);
    }
    if rows > 1 {
        let fy = plan(rows);
        let mut col = vec![Complex64::new(0.0, 0.0); rows];
        for c in 0..cols {
            for r in 0..rows {
                col[r] = buf[r * cols + c];
            }
            fy.process(&mut col);
            for r in 0..rows {
                buf[r * cols + c] = col[r];
            }
        }
    }
    let s = 1.0 / ((rows * cols) as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= s;
    }
}

fn check_len(x: &[f64], kernel: &BlurKernel) -> Result<()> {
    if x.len() != kernel.rows * kernel.cols {
        return Err(Error::ShapeMismatch {
            expected: kernel.rows * kernel.cols,
            found: x.len(),
        });
    }
    Ok(())
}

/// Circular convolution u ⊛ x.
pub fn circular_convolve(x: &[f64], kernel: &BlurKernel) -> Result<Vec<f64>> {
    check_len(x, kernel)?;
    if kernel.is_identity() {
        return Ok(x.to_vec());
    }
    let (rows, cols) = (kernel.rows, kernel.cols);
    let mut s = fft2(x, rows, cols);
    for (i, v) in s.iter_mut().enumerate() {
        *v *= kernel.response(i / cols, i % cols);
    }
    Ok(ifft2_real(&s, rows, cols))
}

/// Spectrum of the truncated pseudo-inverse Ŷ/û on the passband, zero
/// elsewhere (unitary scaling).
pub fn deconvolved_spectrum(y: &[f64], kernel: &BlurKernel, k_c: Option<f64>) -> Result<Vec<Complex64>> {
    check_len(y, kernel)?;
    let (rows, cols) = (kernel.rows, kernel.cols);
    let (mx, my) = kernel.passband(k_c);
    let mut s = fft2(y, rows, cols);
    for (i, v) in s.iter_mut().enumerate() {
        let (ky, kx) = (i / cols, i % cols);
        if mx[kx] && my[ky] {
            *v /= kernel.response(ky, kx);
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(s)
}

/// Truncated pseudo-inverse: frequencies with a zero response or folded
/// |k| ≥ k_c are dropped. The identity kernel without a cutoff returns `y`.
pub fn pseudo_inverse_deconvolve(y: &[f64], kernel: &BlurKernel, k_c: Option<f64>) -> Result<Vec<f64>> {
    check_len(y, kernel)?;
    if kernel.is_identity() && k_c.is_none() {
        return Ok(y.to_vec());
    }
    let (mx, my) = kernel.passband(k_c);
    if !mx.iter().any(|v| *v) || !my.iter().any(|v| *v) {
        return Err(invalid("kernel response is zero on every retained frequency"));
    }
    Ok(ifft2_real(
        &deconvolved_spectrum(y, kernel, k_c)?,
        kernel.rows,
        kernel.cols,
    ))
}
