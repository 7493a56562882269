//! Experiment harness: one configuration in, one metrics row out.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codelength::{CodelengthReport, ModelIndex, Reference};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    ggd_map_estimate, lambda_moment, median_noise_sigma, riskshrink_denoise, sureshrink_denoise, GgdPrior, MapTable,
    DEFAULT_GRID_STEP,
};
use crate::selection::{default_d_range, inmdl_iterate, nml_select, InmdlConfig, SelectionState};
use crate::signal::{add_noise_at_snr, gen_test_signal, metrics, Dataset, MetricsRow, SIGNAL_NAMES};
use crate::wavelet::{FilterPair, WaveletBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Riskshrink,
    Sureshrink,
    GgdMap,
    Nml,
    Inmdl,
    Mwt,
    Wiener,
    InmdlDeconv,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Riskshrink,
        Method::Sureshrink,
        Method::GgdMap,
        Method::Nml,
        Method::Inmdl,
        Method::Mwt,
        Method::Wiener,
        Method::InmdlDeconv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Riskshrink => "riskshrink",
            Method::Sureshrink => "sureshrink",
            Method::GgdMap => "ggd_map",
            Method::Nml => "nml",
            Method::Inmdl => "inmdl",
            Method::Mwt => "mwt",
            Method::Wiener => "wiener",
            Method::InmdlDeconv => "inmdl_deconv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "method",
                name: s.to_string(),
            })
    }

    pub fn is_deconvolution(&self) -> bool {
        matches!(self, Method::Mwt | Method::Wiener | Method::InmdlDeconv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub signal_name: Option<String>,
    #[serde(default)]
    pub image_path: Option<String>,
    /// Signal length (or image side for synthetic images).
    #[serde(default = "default_n")]
    pub n: usize,
    pub target_snr_db: f64,
    pub wavelet: String,
    pub method: Method,
    /// Numeric method parameters: `nu` (ggd_map, inmdl), `max_iter`,
    /// `alpha` (wiener), `k_c` (mwt, deconvolution cutoff), `q` (boxcar
    /// basis constraint).
    #[serde(default)]
    pub method_params: BTreeMap<String, f64>,
    /// Blur kernel for the deconvolution methods, e.g. `hyperbolic:p=3`.
    #[serde(default)]
    pub kernel: Option<String>,
    pub seed: u64,
}

fn default_n() -> usize {
    1024
}

impl ExperimentConfig {
    pub fn param(&self, key: &str) -> Option<f64> {
        self.method_params.get(key).copied()
    }

    pub fn validate(&self) -> Result<()> {
        let f = FilterPair::named(&self.wavelet)?;
        if f.len() % 2 != 0 {
            return Err(invalid("wavelet filter length must be even"));
        }
        if self.signal_name.is_none() && self.image_path.is_none() {
            return Err(invalid("config needs signal_name or image_path"));
        }
        if self.method.is_deconvolution() && self.kernel.is_none() {
            return Err(invalid(format!("method {} needs a kernel", self.method.name())));
        }
        Ok(())
    }

    /// Label used in the `signal` CSV column.
    pub fn signal_label(&self) -> String {
        self.signal_name
            .clone()
            .or_else(|| self.image_path.clone())
            .unwrap_or_default()
    }
}

/// One experiment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub metrics: MetricsRow,
    pub report: Option<CodelengthReport>,
    pub estimate: Vec<f64>,
    pub d: usize,
    pub runtime_ms: f64,
    /// Warnings and diagnostic flags raised along the way.
    pub notes: Vec<String>,
}

/// Column order of the metrics CSV.
pub const CSV_HEADER: &str = "method,signal,snr_in_db,rmse_pct,snr_out_db,sparsity_pct,nu,runtime_ms";

impl ExperimentResult {
    pub fn csv_line(&self, config: &ExperimentConfig) -> String {
        let nu = self.metrics.nu_estimate.map(|v| format!("{v:.2}")).unwrap_or_default();
        format!(
            "{},{},{},{:.1},{:.1},{:.2},{},{:.0}",
            method_label(config),
            config.signal_label(),
            config.target_snr_db,
            100.0 * self.metrics.rmse_scaled,
            self.metrics.snr_hat_db,
            100.0 * self.metrics.sparsity_fraction,
            nu,
            self.runtime_ms
        )
    }
}

/// Method name, with the shape for the MAP estimator (`ggd_map(0.5)`).
pub fn method_label(config: &ExperimentConfig) -> String {
    match (config.method, config.param("nu")) {
        (Method::GgdMap, Some(nu)) => format!("ggd_map({nu:.1})"),
        (m, _) => m.name().to_string(),
    }
}

/// Wavelet used for a named 1-D test signal: Haar for the piecewise
/// constant Blocks, the 12-tap symmlet otherwise.
pub fn default_wavelet(signal: &str) -> &'static str {
    if signal == "blocks" {
        "haar"
    } else {
        "symmlet12"
    }
}

/// Noise level from the finest detail subbands (median estimator).
pub fn estimate_sigma(coeffs: &[f64], basis: &WaveletBasis) -> Result<f64> {
    let finest: Vec<f64> = basis
        .leaves()
        .iter()
        .filter(|l| l.xpath.len().max(l.ypath.len()) == 1 && l.xpath.iter().chain(&l.ypath).any(|&b| b == 1))
        .flat_map(|l| l.indices(basis.cols).map(|i| coeffs[i]).collect::<Vec<_>>())
        .collect();
    median_noise_sigma(&finest)
}

/// GGD-MAP shrinkage of every coefficient with τ from the median estimator
/// and λ from the moment estimator over all coefficients.
pub fn tmap_denoise(coeffs: &[f64], sigma: f64, nu: f64) -> Result<(Vec<f64>, usize)> {
    let tau = sigma.powi(-2);
    let inv_lambda = lambda_moment(coeffs, sigma * sigma);
    if !(inv_lambda > 0.0) {
        return Ok((vec![0.0; coeffs.len()], 0));
    }
    let prior = GgdPrior::new(nu, 1.0 / inv_lambda)?;
    let table = if nu < 2.0 {
        Some(MapTable::build(nu, DEFAULT_GRID_STEP)?)
    } else {
        None
    };
    let out = coeffs
        .iter()
        .map(|&x| ggd_map_estimate(x, &prior, tau, table.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let d = out.iter().filter(|v| **v != 0.0).count();
    Ok((out, d))
}

/// NML denoising: keep the NML-selected coefficients unchanged.
pub fn nml_denoise(coeffs: &[f64]) -> Result<(Vec<f64>, ModelIndex)> {
    let (gamma, _) = nml_select(coeffs, default_d_range(coeffs.len()))?;
    let mut out = vec![0.0; coeffs.len()];
    for &i in gamma.selected() {
        out[i] = coeffs[i];
    }
    Ok((out, gamma))
}

/// INMDL denoising of a coefficient vector.
pub fn inmdl_denoise(coeffs: &[f64], config: &InmdlConfig) -> Result<SelectionState> {
    inmdl_iterate(coeffs, config)
}

/// Noisy dataset for a configuration: synthetic signals and images are
/// generated, files are read; noise is added at the target SNR.
pub fn prepare_data(config: &ExperimentConfig) -> Result<(Dataset, Vec<f64>)> {
    let truth = if let Some(name) = &config.signal_name {
        if SIGNAL_NAMES.contains(&name.as_str()) {
            gen_test_signal(name, config.n)?
        } else {
            crate::deconv::gen_test_image(name, config.n, config.seed)?
        }
    } else {
        let path = config.image_path.as_ref().expect("validated");
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let mut ds = crate::signal::read_pgm(std::io::BufReader::new(file))?;
        ds.truth = Some(ds.values.clone());
        ds
    };
    let clean = truth.truth.clone().unwrap_or_else(|| truth.values.clone());
    let observed = if config.method.is_deconvolution() {
        let (rows, cols) = truth.shape.dims();
        let kernel = crate::deconv::BlurKernel::parse(config.kernel.as_deref().unwrap_or(""), rows, cols)?;
        let blurred = truth.with_values(crate::deconv::circular_convolve(&clean, &kernel)?);
        let mut noisy = add_noise_at_snr(&blurred, config.target_snr_db, config.seed)?;
        noisy.truth = Some(clean.clone());
        noisy
    } else {
        add_noise_at_snr(&truth, config.target_snr_db, config.seed)?
    };
    Ok((observed, clean))
}

fn basis_for(config: &ExperimentConfig, ds: &Dataset) -> Result<WaveletBasis> {
    let f = FilterPair::named(&config.wavelet)?;
    let (rows, cols) = ds.shape.dims();
    if rows == 1 {
        WaveletBasis::dwt(f, cols, None)
    } else {
        WaveletBasis::dwt2(f, rows, cols, None)
    }
}

/// Runs one configuration end to end.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let ctx = |e: Error| e.context(format!("{} on {}", config.method.name(), config.signal_label()));
    let (data, truth) = prepare_data(config).map_err(ctx)?;
    let sigma_true = data.noise_sigma.expect("noise added");
    let mut notes = Vec::new();
    let mut report = None;
    let mut nu_out = None;
    let (estimate, d) = if config.method.is_deconvolution() {
        let out = crate::deconv::restore_for_experiment(config, &data).map_err(ctx)?;
        report = out.report;
        nu_out = out.nu;
        notes.extend(out.notes);
        (out.estimate, out.d)
    } else {
        let basis = basis_for(config, &data).map_err(ctx)?;
        let coeffs = basis.forward(&data.values).map_err(ctx)?;
        let (c, d) = match config.method {
            Method::Riskshrink => {
                let s = estimate_sigma(&coeffs, &basis).map_err(ctx)?;
                riskshrink_denoise(&coeffs, &basis, s)
            }
            Method::Sureshrink => {
                let s = estimate_sigma(&coeffs, &basis).map_err(ctx)?;
                let (c, _, d) = sureshrink_denoise(&coeffs, &basis, s);
                (c, d)
            }
            Method::GgdMap => {
                let s = estimate_sigma(&coeffs, &basis).map_err(ctx)?;
                let nu = config.param("nu").unwrap_or(1.0);
                nu_out = Some(nu);
                tmap_denoise(&coeffs, s, nu).map_err(ctx)?
            }
            Method::Nml => {
                let (c, g) = nml_denoise(&coeffs).map_err(ctx)?;
                (c, g.d())
            }
            Method::Inmdl => {
                let cfg = InmdlConfig {
                    max_iter: config.param("max_iter").map(|v| v as usize).unwrap_or(20),
                    nu: config.param("nu"),
                    reference: Reference::Jeffreys,
                    d_range: None,
                    use_table: true,
                };
                let state = inmdl_denoise(&coeffs, &cfg).map_err(ctx)?;
                notes.extend(state_notes(&state));
                nu_out = Some(state.nu_star);
                report = state.report.clone();
                (state.theta_star.clone(), state.d())
            }
            _ => unreachable!("deconvolution handled above"),
        };
        (basis.inverse(&c).map_err(ctx)?, d)
    };
    let mut m = metrics(&estimate, &truth, sigma_true * sigma_true, d).map_err(ctx)?;
    m.nu_estimate = nu_out;
    if data.shape.dims().0 > 1 {
        let (r, c) = data.shape.dims();
        m.tv = Some(crate::signal::tv_measure(&estimate, r, c)?);
    }
    Ok(ExperimentResult {
        metrics: m,
        report,
        estimate,
        d,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        notes,
    })
}

/// Flags carried by a selection state, as notes.
pub fn state_notes(state: &SelectionState) -> Vec<String> {
    let mut notes = state.warnings.clone();
    if !state.converged {
        notes.push(format!("not converged after {} passes", state.iteration));
    }
    if state.nml_fallback {
        notes.push("fell back to the NML model".into());
    }
    if let Some(r) = &state.report {
        for v in r.diagnostics.range_violations() {
            notes.push(format!("diagnostic {v} outside reported range"));
        }
    }
    notes
}

/// Configurations of the 1-D denoising table: four signals at 10 and
/// 20 dB, with RiskShrink, SureShrink, T_MAP(0.5), T_MAP(1.0), NML and
/// INMDL (ν fixed at 1).
pub fn table_configs(seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for signal in SIGNAL_NAMES {
        for snr in [10.0, 20.0] {
            let methods: [(Method, Option<f64>); 6] = [
                (Method::Riskshrink, None),
                (Method::Sureshrink, None),
                (Method::GgdMap, Some(0.5)),
                (Method::GgdMap, Some(1.0)),
                (Method::Nml, None),
                (Method::Inmdl, Some(1.0)),
            ];
            for (method, nu) in methods {
                let mut params = BTreeMap::new();
                if let Some(nu) = nu {
                    params.insert("nu".to_string(), nu);
                }
                out.push(ExperimentConfig {
                    signal_name: Some(signal.to_string()),
                    image_path: None,
                    n: 1024,
                    target_snr_db: snr,
                    wavelet: default_wavelet(signal).to_string(),
                    method,
                    method_params: params,
                    kernel: None,
                    seed,
                });
            }
        }
    }
    out
}

/// Runs a named table (`1d`) in parallel; rows keep the config order.
pub fn run_table(name: &str, seed: u64) -> Result<Vec<(ExperimentConfig, Result<ExperimentResult>)>> {
    let configs = match name {
        "1d" | "signals" => table_configs(seed),
        _ => {
            return Err(Error::Unknown {
                kind: "table",
                name: name.to_string(),
            })
        }
    };
    Ok(configs
        .into_par_iter()
        .map(|c| {
            let r = run_experiment(&c);
            (c, r)
        })
        .collect())
}
