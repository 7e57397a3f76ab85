//! Lists every solution of a small instance by exhaustive search and
//! compares with the exhaustive filtered solver.
//!
//! Usage: cargo run --release --example brute_force [seed]

use pkp::filtered::{solve_filtered, FilteredParams};
use pkp::instance::{brute_force_solve, BRUTE_FORCE_DEFAULT_CAP};
use pkp::solve::SolveOptions;
use pkp::{extend, generate_instance, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pkp::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let (q, n, m) = (11, 8, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = generate_instance(PrimeField::new(q)?, n, m, &mut rng)?;

    let mut brute: Vec<Vec<usize>> = brute_force_solve(&inst, BRUTE_FORCE_DEFAULT_CAP)?
        .iter()
        .map(|p| p.to_one_based())
        .collect();
    brute.sort();
    println!("brute force: {} solutions", brute.len());
    for p in &brute {
        println!("  {p:?}");
    }

    // w = n + d - r always admits a subcode
    let params = FilteredParams::new(n, m, 1, 2, 3, 2)?;
    let opts = SolveOptions {
        max_isd_iters: Some(10_000),
        ..SolveOptions::exhaustive()
    };
    let out = solve_filtered(&extend(&inst)?, inst.c(), &params, &mut rng, &opts)?;
    let mut filtered: Vec<Vec<usize>> = out.solutions.iter().map(|p| p.to_one_based()).collect();
    filtered.sort();
    println!("filtered solver agrees: {}", filtered == brute);
    Ok(())
}
