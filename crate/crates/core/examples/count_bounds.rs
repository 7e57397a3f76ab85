//! Bounds on the expected number of small-support subcodes of a random
//! code, and the predicted cost of finding one.
//!
//! Usage: cargo run --example count_bounds [n k q]

use pkp::isd::{count_bounds, isd_cost, success_probability};

fn main() -> pkp::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (n, k, q) = match args[..] {
        [n, k, q] => (n as usize, k as usize, q),
        _ => (69, 42, 251),
    };
    println!("n={n} k={k} q={q}");
    println!(
        "{:>3} {:>3} {:>12} {:>12} {:>12} {:>10}",
        "d", "w", "log2 lower", "log2 upper", "log2 p", "log2 cost"
    );
    for d in 1..=3.min(k) {
        for w in d..=n + d - k {
            let b = count_bounds(n, k, w, d, q)?;
            // only print the region where subcodes start to exist
            if b.upper < -3.0 {
                continue;
            }
            let p = success_probability(n, k, d, w).log2();
            let cost = isd_cost(n, k, w, d, q)?;
            println!(
                "{d:>3} {w:>3} {:>12.3} {:>12.3} {p:>12.3} {cost:>10.3}{}",
                b.lower,
                b.upper,
                if b.expects_one() { "" } else { "  (none expected)" }
            );
            if b.lower > 3.0 {
                break;
            }
        }
    }
    Ok(())
}
