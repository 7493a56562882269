//! `mdlshrink` command line: single experiments, tables, image restoration
//! and codelength traces.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mdlshrink::codelength::trace_terms;
use mdlshrink::deconv::restore_for_experiment;
use mdlshrink::experiment::{run_experiment, run_table, CSV_HEADER};
use mdlshrink::rng::seed_from_env;
use mdlshrink::selection::{default_d_range, inmdl_iterate, optimize_d, Hyper};
use mdlshrink::signal::{read_pgm, read_signal_csv, write_pgm, write_signal_csv};
use mdlshrink::{ExperimentConfig, FilterPair, InmdlConfig, Method, ModelIndex, Shape, WaveletBasis};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "mdlshrink",
    version,
    about = "Wavelet denoising and restoration with INMDL model selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config and print its CSV row.
    Denoise {
        #[arg(long)]
        config: PathBuf,
        /// Write the estimate (CSV for signals, PGM for images).
        #[arg(long)]
        estimate: Option<PathBuf>,
        /// Write the full result (metrics, codelength report, notes) as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a named table of experiments and write the metrics CSV.
    Experiment {
        #[arg(long)]
        table: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Restore a blurred noisy PGM image.
    Restore {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// `identity`, `hyperbolic:p=<p>` or `boxcar:<width>`.
        #[arg(long)]
        kernel: String,
        #[arg(long, value_enum, default_value_t = RestoreMethod::Inmdl)]
        method: RestoreMethod,
        /// Wiener regularization weight.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value = "symmlet16")]
        wavelet: String,
        /// Fourier cutoff; 0 disables it, the default follows the kernel.
        #[arg(long)]
        k_c: Option<f64>,
    },
    /// INMDL codelength of a 1-D signal (CSV), with optional per-d traces.
    Codelen {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "symmlet12")]
        wavelet: String,
        /// Fix the prior shape instead of estimating it.
        #[arg(long)]
        nu: Option<f64>,
        /// CSV of every codelength term per d under the final hyperparameters.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// CSV of d, Q, Delta_lo, Delta_hi, L_total, zeta, X, valid.
        #[arg(long)]
        trace_d: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RestoreMethod {
    Mwt,
    Inmdl,
    Wiener,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn write_values(path: &Path, values: &[f64], shape: Shape) -> Result<()> {
    let mut w = create(path)?;
    match shape {
        Shape::D2 { rows, cols } => write_pgm(&mut w, values, rows, cols)?,
        Shape::D1(_) => write_signal_csv(&mut w, values)?,
    }
    w.flush()?;
    Ok(())
}

fn denoise(config: &Path, estimate: Option<&Path>, report: Option<&Path>) -> Result<()> {
    let mut cfg: ExperimentConfig =
        serde_json::from_reader(open(config)?).with_context(|| format!("parsing {}", config.display()))?;
    cfg.seed = seed_from_env(cfg.seed);
    let r = run_experiment(&cfg)?;
    println!("{CSV_HEADER}");
    println!("{}", r.csv_line(&cfg));
    for note in &r.notes {
        eprintln!("note: {note}");
    }
    if let Some(path) = estimate {
        let shape = mdlshrink::experiment::prepare_data(&cfg)?.0.shape;
        write_values(path, &r.estimate, shape)?;
    }
    if let Some(path) = report {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &json!({ "config": cfg, "result": r }))?;
        w.flush()?;
    }
    Ok(())
}

fn experiment(table: &str, out: &Path, seed: u64) -> Result<()> {
    let seed = seed_from_env(seed);
    let rows = run_table(table, seed)?;
    let mut w = create(out)?;
    writeln!(w, "{CSV_HEADER}")?;
    let mut failed = 0;
    for (c, r) in rows {
        match r {
            Ok(r) => writeln!(w, "{}", r.csv_line(&c))?,
            Err(e) => {
                failed += 1;
                eprintln!("{} {}: {e}", c.method.name(), c.signal_label());
            }
        }
    }
    w.flush()?;
    if failed > 0 {
        bail!("{failed} rows failed");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn restore(
    input: &Path,
    output: &Path,
    kernel: &str,
    method: RestoreMethod,
    alpha: f64,
    wavelet: &str,
    k_c: Option<f64>,
) -> Result<()> {
    let data = read_pgm(open(input)?)?;
    let method = match method {
        RestoreMethod::Mwt => Method::Mwt,
        RestoreMethod::Inmdl => Method::InmdlDeconv,
        RestoreMethod::Wiener => Method::Wiener,
    };
    let mut params = std::collections::BTreeMap::from([("alpha".to_string(), alpha)]);
    if let Some(k) = k_c {
        params.insert("k_c".into(), k);
    }
    let cfg = ExperimentConfig {
        signal_name: None,
        image_path: Some(input.display().to_string()),
        n: data.shape.dims().1,
        target_snr_db: f64::NAN,
        wavelet: wavelet.to_string(),
        method,
        method_params: params,
        kernel: Some(kernel.to_string()),
        seed: 0,
    };
    let r = restore_for_experiment(&cfg, &data)?;
    for note in &r.notes {
        eprintln!("note: {note}");
    }
    eprintln!("{}: {} coefficients kept", method.name(), r.d);
    write_values(output, &r.estimate, data.shape)
}

fn codelen(input: &Path, wavelet: &str, nu: Option<f64>, trace: Option<&Path>, trace_d: Option<&Path>) -> Result<()> {
    let signal = read_signal_csv(open(input)?)?;
    let basis = WaveletBasis::dwt(FilterPair::named(wavelet)?, signal.len(), None)?;
    let x = basis.forward(&signal.values)?;
    let config = InmdlConfig {
        nu,
        ..InmdlConfig::default()
    };
    let state = inmdl_iterate(&x, &config)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "d": state.d(),
            "nu": state.nu_star,
            "lambda": state.lambda_star,
            "tau": state.tau_star,
            "iterations": state.iteration,
            "d_history": state.d_history,
            "converged": state.converged,
            "nml_fallback": state.nml_fallback,
            "warnings": state.warnings,
            "report": state.report,
        }))?
    );
    if trace.is_none() && trace_d.is_none() {
        return Ok(());
    }
    let hyper = Hyper::new(state.nu_star, state.lambda_star, state.tau_star, config.use_table)?;
    let range = default_d_range(x.len());
    if let Some(path) = trace_d {
        let scan = optimize_d(&x, &hyper, config.reference, range)?;
        let mut w = csv::Writer::from_writer(create(path)?);
        for row in &scan.trace {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    if let Some(path) = trace {
        let order = hyper.order(&x)?;
        let mut w = csv::Writer::from_writer(create(path)?);
        for d in range.0..=range.1 {
            let gamma = ModelIndex::new(order[..d].to_vec(), x.len())?;
            // Models outside the approximation's validity range are skipped.
            if let Ok((row, _, _)) = hyper.fit(&x, &gamma).and_then(|f| trace_terms(&f, config.reference)) {
                w.serialize(row)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Denoise {
            config,
            estimate,
            report,
        } => denoise(&config, estimate.as_deref(), report.as_deref()),
        Command::Experiment { table, out, seed } => experiment(&table, &out, seed),
        Command::Restore {
            input,
            output,
            kernel,
            method,
            alpha,
            wavelet,
            k_c,
        } => restore(&input, &output, &kernel, method, alpha, &wavelet, k_c),
        Command::Codelen {
            input,
            wavelet,
            nu,
            trace,
            trace_d,
        } => codelen(&input, &wavelet, nu, trace.as_deref(), trace_d.as_deref()),
    }
}
