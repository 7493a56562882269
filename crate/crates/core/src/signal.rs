//! Test signals, noise injection, error metrics and dataset I/O.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::NoiseRng;

/// Mean-square level every test signal is rescaled to (root-mean-square 7).
pub const REFERENCE_MEAN_SQUARE: f64 = 49.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    D1(usize),
    D2 { rows: usize, cols: usize },
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::D1(n) => n,
            Shape::D2 { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (rows, cols); a 1-D signal is a single row.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Shape::D1(n) => (1, n),
            Shape::D2 { rows, cols } => (rows, cols),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (r, c) = self.dims();
        for v in [r, c] {
            if !v.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub values: Vec<f64>,
    pub shape: Shape,
    pub truth: Option<Vec<f64>>,
    pub noise_sigma: Option<f64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>, shape: Shape) -> Result<Self> {
        shape.validate()?;
        if values.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: shape.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            values,
            shape,
            truth: None,
            noise_sigma: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same shape and metadata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            shape: self.shape,
            truth: self.truth.clone(),
            noise_sigma: self.noise_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// √(‖θ−θ*‖²τ/N), as a fraction (multiply by 100 for percent).
    pub rmse_scaled: f64,
    pub snr_hat_db: f64,
    /// d/N.
    pub sparsity_fraction: f64,
    pub nu_estimate: Option<f64>,
    pub tv: Option<f64>,
}

pub const SIGNAL_NAMES: [&str; 4] = ["blocks", "bumps", "heavisine", "doppler"];

const BREAKS: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BLOCK_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMP_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_WIDTHS: [f64; 11] = [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005];

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unscaled Donoho–Johnstone closed form at t ∈ [0,1).
pub fn raw_signal(name: &str, t: f64) -> Result<f64> {
    Ok(match name {
        "blocks" => BREAKS
            .iter()
            .zip(BLOCK_HEIGHTS)
            .map(|(&tj, h)| if t >= tj { h } else { 0.0 })
            .sum(),
        "bumps" => BREAKS
            .iter()
            .zip(BUMP_HEIGHTS)
            .zip(BUMP_WIDTHS)
            .map(|((&tj, h), w)| h * (1.0 + ((t - tj) / w).abs()).powi(-4))
            .sum(),
        "heavisine" => 4.0 * (4.0 * std::f64::consts::PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t),
        "doppler" => (t * (1.0 - t)).sqrt() * (2.0 * std::f64::consts::PI * 1.05 / (t + 0.05)).sin(),
        _ => {
            return Err(Error::Unknown {
                kind: "signal",
                name: name.to_string(),
            })
        }
    })
}

/// Noiseless test signal sampled at t = i/n and rescaled so that
/// ‖θ‖²/n equals [`REFERENCE_MEAN_SQUARE`].
pub fn gen_test_signal(name: &str, n: usize) -> Result<Dataset> {
    if n < 8 || !n.is_power_of_two() {
        return Err(invalid(format!("signal length {n} must be a power of two >= 8")));
    }
    let raw: Vec<f64> = (0..n)
        .map(|i| raw_signal(name, i as f64 / n as f64))
        .collect::<Result<_>>()?;
    let ms = raw.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let scale = (REFERENCE_MEAN_SQUARE / ms).sqrt();
    let values: Vec<f64> = raw.iter().map(|v| v * scale).collect();
    let mut ds = Dataset::new(values.clone(), Shape::D1(n))?;
    ds.truth = Some(values);
    Ok(ds)
}

/// Per-sample noise variance τ^{-1} giving `snr_db` for a signal of the
/// given energy and length.
pub fn noise_variance_for_snr(energy: f64, n: usize, snr_db: f64) -> f64 {
    energy / (n as f64 * 10f64.powf(snr_db / 10.0))
}

/// Adds Gaussian noise with variance ‖θ‖²/(N·10^{snr/10}).
pub fn add_noise_at_snr(truth: &Dataset, snr_db: f64, seed: u64) -> Result<Dataset> {
    let energy: f64 = truth.values.iter().map(|v| v * v).sum();
    if energy <= 0.0 {
        return Err(Error::Degenerate("zero-energy truth".into()));
    }
    let sigma = noise_variance_for_snr(energy, truth.len(), snr_db).sqrt();
    let mut rng = NoiseRng::new(seed);
    let values = truth.values.iter().map(|v| v + sigma * rng.normal()).collect();
    Ok(Dataset {
        values,
        shape: truth.shape,
        truth: Some(truth.values.clone()),
        noise_sigma: Some(sigma),
    })
}

/// Scaled RMSE, output SNR and sparsity of an estimate.
pub fn metrics(estimate: &[f64], truth: &[f64], tau_inv: f64, d: usize) -> Result<MetricsRow> {
    if estimate.len() != truth.len() {
        return Err(Error::ShapeMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if !(tau_inv > 0.0) {
        return Err(invalid("tau_inv must be positive"));
    }
    let n = truth.len() as f64;
    let err: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    let sig: f64 = truth.iter().map(|v| v * v).sum();
    let snr_hat_db = if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (sig / err).log10()
    };
    Ok(MetricsRow {
        rmse_scaled: (err / (tau_inv * n)).sqrt(),
        snr_hat_db,
        sparsity_fraction: d as f64 / n,
        nu_estimate: None,
        tv: None,
    })
}

/// Discrete total variation with periodic wrap.
pub fn tv_measure(values: &[f64], rows: usize, cols: usize) -> Result<f64> {
    if values.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: rows * cols,
            found: values.len(),
        });
    }
    let at = |m: usize, n: usize| values[(m % rows) * cols + (n % cols)];
    let mut tv = 0.0;
    for m in 0..rows {
        for n in 0..cols {
            let dx = at(m, n + 1) - at(m, n);
            let dy = at(m + 1, n) - at(m, n);
            tv += (dx * dx + dy * dy).sqrt();
        }
    }
    Ok(tv)
}

/// Reads an 8-bit binary PGM (P5).
pub fn read_pgm<R: Read>(mut reader: R) -> Result<Dataset> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let mut pos = 0usize;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < buf.len() && buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < buf.len() && buf[pos] == b'#' {
            while pos < buf.len() && buf[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&buf[start..pos]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(Error::Parse(format!("expected P5, found {}", tokens[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
    let (cols, rows, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported maxval {maxval}")));
    }
    pos += 1;
    let need = rows * cols;
    if buf.len() < pos + need {
        return Err(Error::Parse("truncated PGM raster".into()));
    }
    let values = buf[pos..pos + need].iter().map(|&b| b as f64).collect();
    Dataset::new(values, Shape::D2 { rows, cols })
}

/// Writes an 8-bit binary PGM, rounding and clamping to [0, 255].
pub fn write_pgm<W: Write>(mut writer: W, values: &[f64], rows: usize, cols: usize) -> Result<()> {
    write!(writer, "P5\n{cols} {rows}\n255\n")?;
    let bytes: Vec<u8> = values.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    writer.write_all(&bytes)?;
    Ok(())
}

/// Reads a signal as whitespace/comma separated decimals.
pub fn read_signal_csv<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut values = Vec::new();
    for line in reader.lines() {
        let line = line?;
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            values.push(tok.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
    }
    let n = values.len();
    Dataset::new(values, Shape::D1(n))
}

pub fn write_signal_csv<W: Write>(mut writer: W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(writer, "{v:.17e}")?;
    }
    Ok(())
}
