//! Planted instance at desk scale, solved with subcode pre-filtering.
//! Parameters come from the cost optimizer.
//!
//! Usage: cargo run --release --example filtered_attack [seed]

use pkp::estimator::optimize_filtered;
use pkp::filtered::solve_filtered;
use pkp::solve::SolveOptions;
use pkp::{extend, generate_instance, verify, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pkp::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let (q, n, m) = (251, 15, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = generate_instance(PrimeField::new(q)?, n, m, &mut rng)?;
    let ext = extend(&inst)?;
    let best = optimize_filtered(n, m, q, None).expect("feasible parameters exist");
    println!(
        "q={q} n={n} m={m} params={:?} predicted log2 cost {:.2}",
        best.params, best.total
    );

    let out = solve_filtered(&ext, inst.c(), &best.params, &mut rng, &SolveOptions::default())?;
    for st in &out.stages {
        println!("{st}");
    }
    let pi = out.first().expect("solver returns at least one solution");
    println!("solution (1-based): {:?}", pi.to_one_based());
    println!("verified: {}", verify(&inst, pi)?);
    Ok(())
}
