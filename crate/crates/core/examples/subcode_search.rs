//! Finds a small-support subcode of the dual code of an instance, the
//! first step of the filtered solver.
//!
//! Usage: cargo run --release --example subcode_search [d w seed]

use pkp::isd::{count_bounds, find_subcode};
use pkp::{extend, generate_instance, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pkp::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (d, w, seed) = match args[..] {
        [d, w, seed] => (d as usize, w as usize, seed),
        _ => (2, 10, 3),
    };
    let (q, n, m) = (251, 15, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = generate_instance(PrimeField::new(q)?, n, m, &mut rng)?;
    let ext = extend(&inst)?;
    let r = ext.r();
    let b = count_bounds(n, r, w, d, q)?;
    println!(
        "q={q} n={n} r={r} d={d} w={w}: log2 expected count in [{:.2}, {:.2}]",
        b.lower, b.upper
    );

    let found = find_subcode(ext.h(), w, d, &mut rng, None)?;
    println!(
        "found after {} iterations, support {:?}",
        found.iterations,
        found.subcode.support()
    );
    let g = found.subcode.generator();
    for row in 0..g.rows() {
        println!("  {:?}", g.row(row));
    }
    Ok(())
}
