//! Optimized costs of both solvers across m/n at q = 251, as CSV.
//!
//! Usage: cargo run --release --example sweep_ratio [n]

use pkp::estimator::{sweep, SolverKind, CSV_HEADER};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut ms: Vec<usize> = (27..=48)
        .map(|i| (i as f64 * 0.02 * n as f64).round() as usize)
        .collect();
    ms.dedup();
    ms.retain(|&m| m + 1 < n);
    println!("{CSV_HEADER}");
    for pt in sweep(n, 251, &ms, &[SolverKind::Baseline, SolverKind::Filtered], None) {
        println!("{}", pt.csv_row());
    }
}
