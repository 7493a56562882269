//! Runs the 1-D denoising table and prints it as CSV.
//!
//! `cargo run --release --example table -- [seed]`

use mdlshrink::experiment::{run_table, CSV_HEADER};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    println!("{CSV_HEADER}");
    for (c, r) in run_table("1d", seed).expect("known table") {
        match r {
            Ok(r) => println!("{}", r.csv_line(&c)),
            Err(e) => eprintln!("{} {}: {e}", c.method.name(), c.signal_label()),
        }
    }
}
