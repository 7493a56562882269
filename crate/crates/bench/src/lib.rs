//! Benchmark fixtures shared by the criterion targets.

use mdlshrink::signal::{add_noise_at_snr, gen_test_signal};
use mdlshrink::Dataset;

/// Noisy test signal at the table operating point.
pub fn noisy_signal(name: &str, n: usize, snr_db: f64) -> Dataset {
    let truth = gen_test_signal(name, n).expect("known signal");
    add_noise_at_snr(&truth, snr_db, 1).expect("nonzero signal")
}
