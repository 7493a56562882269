//! Orthogonal filter tables.
//!
//! Symmlets are named by filter length: `symmletN` has N taps and N/2
//! vanishing moments. `symK` (K vanishing moments) is accepted as an alias
//! for `symmlet{2K}`. The least-asymmetric root selection was computed in
//! extended precision; values are rounded to 20 significant digits.

#![allow(clippy::excessive_precision)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    pub name: String,
    /// Lowpass filter.
    pub h: Vec<f64>,
    /// Conjugate mirror highpass, g[k] = (-1)^k h[L-1-k].
    pub g: Vec<f64>,
}

pub const FILTER_NAMES: [&str; 4] = ["haar", "symmlet12", "symmlet16", "symmlet20"];

/// 12 taps, 6 vanishing moments.
const SYMMLET12: [f64; 12] = [
    0.015404109327044824299,
    0.0034907120842221625153,
    -0.1179901111485200254,
    -0.048311742585698054971,
    0.49105594192797373304,
    0.78764114102865099607,
    0.33792942172816583271,
    -0.072637522786376583464,
    -0.021060292512370847992,
    0.044724901770781384663,
    0.001767711864254007741,
    -0.0078007083250323804142,
];

/// 16 taps, 8 vanishing moments.
const SYMMLET16: [f64; 16] = [
    0.0018899503327676891843,
    -0.00030292051472413308126,
    -0.014952258337062199118,
    0.0038087520138944894631,
    0.049137179673730286787,
    -0.027219029917103486322,
    -0.051945838107881800736,
    0.36444189483617893676,
    0.77718575169962802862,
    0.48135965125905339159,
    -0.061273359067811077843,
    -0.14329423835127266284,
    0.0076074873249766081919,
    0.031695087811525991431,
    -0.00054213233180001068935,
    -0.0033824159510050025955,
];

/// 20 taps, 10 vanishing moments.
const SYMMLET20: [f64; 20] = [
    0.00086257822622597242902,
    0.00071542054205433971798,
    -0.0070567640625873042175,
    0.00059568278374251904276,
    0.049686126646942881579,
    0.026240365058448987227,
    -0.12155210554854894421,
    -0.01501923883913785974,
    0.51370987334802634488,
    0.766954836560609561,
    0.34021601302346215243,
    -0.087878711511975135017,
    -0.067089907808381801748,
    0.033842354663575221373,
    -0.00086875210968925813854,
    -0.023005461353497509884,
    -0.0011404297952173284664,
    0.0050716491985317990153,
    0.00034014926631480986305,
    -0.00041011591580439833378,
];

impl FilterPair {
    /// Builds the pair from a lowpass filter and checks the QMF conditions.
    pub fn from_lowpass(name: impl Into<String>, h: Vec<f64>) -> Result<Self> {
        let l = h.len();
        if l < 2 || !l.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "filter length {l} must be even and at least 2"
            )));
        }
        let g = (0..l)
            .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
            .collect();
        let pair = Self {
            name: name.into(),
            h,
            g,
        };
        let err = pair.orthonormality_error();
        if err > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "filter {} violates the QMF conditions by {err:e}",
                pair.name
            )));
        }
        Ok(pair)
    }

    /// Looks up an embedded table by name (case-insensitive).
    pub fn named(name: &str) -> Result<Self> {
        let mut key = name.trim().to_ascii_lowercase();
        if !key.starts_with("symmlet") {
            if let Some(k) = key.strip_prefix("sym").and_then(|k| k.parse::<usize>().ok()) {
                key = format!("symmlet{}", 2 * k);
            }
        }
        let h: Vec<f64> = match key.as_str() {
            "haar" => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            "symmlet12" => SYMMLET12.to_vec(),
            "symmlet16" => SYMMLET16.to_vec(),
            "symmlet20" => SYMMLET20.to_vec(),
            _ => {
                return Err(Error::Unknown {
                    kind: "wavelet",
                    name: name.to_string(),
                })
            }
        };
        Self::from_lowpass(key, h)
    }

    pub fn haar() -> Self {
        Self::named("haar").expect("embedded table")
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Largest deviation from Σ h[k]h[k+2m] = δ_m, Σ g[k]g[k+2m] = δ_m and
    /// Σ h[k]g[k+2m] = 0 over all shifts.
    pub fn orthonormality_error(&self) -> f64 {
        let l = self.h.len() as isize;
        let corr = |a: &[f64], b: &[f64], s: isize| -> f64 {
            (0..l)
                .filter(|&k| k + s >= 0 && k + s < l)
                .map(|k| a[k as usize] * b[(k + s) as usize])
                .sum()
        };
        let mut worst: f64 = 0.0;
        let mut m = -(l / 2);
        while m <= l / 2 {
            let s = 2 * m;
            let delta = if m == 0 { 1.0 } else { 0.0 };
            worst = worst
                .max((corr(&self.h, &self.h, s) - delta).abs())
                .max((corr(&self.g, &self.g, s) - delta).abs())
                .max(corr(&self.h, &self.g, s).abs());
            m += 1;
        }
        worst
    }
}
