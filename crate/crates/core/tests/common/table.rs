//! The 1-D denoising table against its reference values, and the
//! diagnostics operating ranges on the INMDL rows.

use mdlshrink::experiment::{run_table, ExperimentConfig, ExperimentResult, Method};

use super::Check;

/// Method columns in table order.
pub const COLUMNS: [&str; 6] = [
    "riskshrink",
    "sureshrink",
    "ggd_map(0.5)",
    "ggd_map(1.0)",
    "nml",
    "inmdl",
];

/// One reference cell block: signal, input dB, then per column the scaled
/// RMSE (%), the output SNR (dB) and the nonzero fraction (%).
pub struct Reference {
    pub signal: &'static str,
    pub snr_in: f64,
    pub rmse: [f64; 6],
    pub snr_out: [f64; 6],
    pub sparsity: [f64; 6],
}

pub const REFERENCE: [Reference; 8] = [
    Reference {
        signal: "blocks",
        snr_in: 10.0,
        rmse: [48.5, 44.9, 45.4, 69.0, 57.5, 46.9],
        snr_out: [16.3, 16.7, 16.8, 13.2, 14.9, 16.6],
        sparsity: [3.71, 11.8, 7.81, 66.4, 9.18, 6.83],
    },
    Reference {
        signal: "blocks",
        snr_in: 20.0,
        rmse: [30.5, 46.3, 62.9, 89.4, 38.9, 38.5],
        snr_out: [30.3, 26.6, 24.0, 21.0, 28.2, 28.3],
        sparsity: [5.96, 15.0, 20.6, 90.7, 6.64, 6.64],
    },
    Reference {
        signal: "bumps",
        snr_in: 10.0,
        rmse: [57.9, 47.2, 46.7, 61.7, 63.1, 52.8],
        snr_out: [14.6, 16.1, 16.4, 14.0, 14.1, 15.5],
        sparsity: [4.39, 8.79, 6.35, 53.8, 11.1, 7.62],
    },
    Reference {
        signal: "bumps",
        snr_in: 20.0,
        rmse: [53.8, 56.0, 63.0, 87.9, 56.2, 54.8],
        snr_out: [25.4, 24.9, 24.0, 21.1, 25.0, 25.2],
        sparsity: [8.20, 15.7, 18.8, 89.6, 9.38, 9.18],
    },
    Reference {
        signal: "heavisine",
        snr_in: 10.0,
        rmse: [22.5, 23.5, 30.3, 57.4, 49.4, 46.7],
        snr_out: [23.1, 22.4, 20.5, 14.9, 16.3, 16.8],
        sparsity: [1.07, 1.56, 2.44, 55.0, 4.69, 4.49],
    },
    Reference {
        signal: "heavisine",
        snr_in: 20.0,
        rmse: [36.1, 35.0, 54.2, 86.3, 35.4, 36.4],
        snr_out: [28.9, 29.0, 25.4, 21.3, 29.1, 28.8],
        sparsity: [1.95, 4.30, 12.5, 88.0, 2.93, 3.42],
    },
    Reference {
        signal: "doppler",
        snr_in: 10.0,
        rmse: [42.7, 45.5, 39.4, 57.3, 58.7, 52.0],
        snr_out: [17.3, 16.4, 17.9, 14.6, 14.7, 15.7],
        sparsity: [2.64, 5.18, 4.30, 50.1, 8.98, 7.03],
    },
    Reference {
        signal: "doppler",
        snr_in: 20.0,
        rmse: [47.7, 57.2, 56.5, 86.0, 49.8, 47.1],
        snr_out: [26.4, 24.7, 24.9, 21.3, 26.0, 26.5],
        sparsity: [5.27, 12.7, 12.7, 87.7, 7.23, 6.83],
    },
];

pub const RMSE_REL_TOL: f64 = 0.15;
pub const SNR_DB_TOL: f64 = 1.5;
pub const SPARSITY_REL_TOL: f64 = 0.5;

pub type Rows = Vec<(ExperimentConfig, ExperimentResult)>;

pub fn run_rows(seed: u64) -> Rows {
    run_table("1d", seed)
        .unwrap()
        .into_iter()
        .map(|(c, r)| {
            let r = r.unwrap_or_else(|e| panic!("{}: {e}", c.signal_label()));
            (c, r)
        })
        .collect()
}

fn label(c: &ExperimentConfig) -> String {
    mdlshrink::experiment::method_label(c)
}

/// Every cell of every row within tolerance.
pub fn table_reproduction(rows: &Rows) -> Check {
    let mut cells = 0;
    let mut misses = Vec::new();
    for (c, r) in rows {
        let reference = REFERENCE
            .iter()
            .find(|t| Some(t.signal) == c.signal_name.as_deref() && t.snr_in == c.target_snr_db)
            .expect("row has a reference");
        let col = COLUMNS.iter().position(|m| *m == label(c)).expect("known column");
        let rmse = 100.0 * r.metrics.rmse_scaled;
        let snr = r.metrics.snr_hat_db;
        let sp = 100.0 * r.metrics.sparsity_fraction;
        let tag = format!("{} {} dB {}", reference.signal, reference.snr_in, COLUMNS[col]);
        if (rmse / reference.rmse[col] - 1.0).abs() > RMSE_REL_TOL {
            misses.push(format!("{tag} rmse {rmse:.1} vs {}", reference.rmse[col]));
        }
        if (snr - reference.snr_out[col]).abs() > SNR_DB_TOL {
            misses.push(format!("{tag} snr {snr:.1} vs {}", reference.snr_out[col]));
        }
        if (sp / reference.sparsity[col] - 1.0).abs() > SPARSITY_REL_TOL {
            misses.push(format!("{tag} nonzero {sp:.2} vs {}", reference.sparsity[col]));
        }
        cells += 3;
    }
    Check {
        name: "1-D table reproduction",
        pass: misses.is_empty(),
        detail: format!(
            "{}/{cells} cells within tolerance{}{}",
            cells - misses.len(),
            if misses.is_empty() { "" } else { "; outside: " },
            misses.join(", ")
        ),
    }
}

/// Operating ranges of the approximation diagnostics on the INMDL rows.
pub fn diagnostics_ranges(rows: &Rows) -> Check {
    let mut bad = Vec::new();
    let mut seen = 0;
    let mut min_theta = (f64::INFINITY, f64::NEG_INFINITY);
    // max of zeta, kappa, omega, X
    let mut peak = [0.0f64; 4];
    for (c, r) in rows.iter().filter(|(c, _)| c.method == Method::Inmdl) {
        seen += 1;
        let tag = format!("{} {} dB", c.signal_label(), c.target_snr_db);
        match &r.report {
            Some(rep) => {
                let v = rep.diagnostics.range_violations();
                let t = rep.diagnostics.min_standardized_theta;
                min_theta = (min_theta.0.min(t), min_theta.1.max(t));
                let dg = &rep.diagnostics;
                for (p, v) in peak.iter_mut().zip([dg.zeta, dg.kappa_bound, dg.omega, dg.x_big]) {
                    *p = p.max(v);
                }
                if !v.is_empty() {
                    bad.push(format!("{tag}: {}", v.join("/")));
                }
            }
            None => bad.push(format!("{tag}: no codelength report")),
        }
    }
    Check {
        name: "diagnostics ranges",
        pass: seen > 0 && bad.is_empty(),
        detail: format!(
            "{seen} INMDL runs, {} out of range, max zeta {:.1e} kappa {:.1e} omega {:.2} X {:.1e}, min |sqrt(tau) theta| in [{:.2}, {:.2}]{}",
            bad.len(),
            peak[0],
            peak[1],
            peak[2],
            peak[3],
            min_theta.0,
            min_theta.1,
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    }
}
