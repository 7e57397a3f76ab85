//! Generates a planted instance, writes it in the text format, reads it
//! back and checks the planted permutation.
//!
//! Usage: cargo run --example generate_instance [q n m seed]

use pkp::instance::log2_expected_solutions;
use pkp::{generate_instance, verify, PkpInstance, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pkp::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (q, n, m, seed) = match args[..] {
        [q, n, m, seed] => (q, n as usize, m as usize, seed),
        _ => (251, 12, 4, 1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = generate_instance(PrimeField::new(q)?, n, m, &mut rng)?;
    let text = inst.to_text();
    print!("{text}");

    let back = PkpInstance::from_text(&text)?;
    assert_eq!(back.to_text(), text);
    let planted = back.planted().expect("planted line survives the round trip");
    println!("# planted solution verifies: {}", verify(&back, planted)?);
    println!(
        "# log2 expected number of solutions: {:.2}",
        log2_expected_solutions(q, n, m)
    );
    if let Some(w) = back.hardness_warning() {
        println!("# warning: {w}");
    }
    Ok(())
}
