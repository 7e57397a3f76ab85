//! Cost breakdown of both solvers on the two PKP-DSS parameter sets.

use pkp::estimator::{cost_filtered, optimize_baseline, optimize_filtered};
use pkp::filtered::FilteredParams;

fn main() -> pkp::Result<()> {
    let rows = [(69, 41, 251, (1, 2, 20, 16)), (94, 54, 509, (1, 2, 29, 22))];
    for (n, m, q, (d, w1, w2, l)) in rows {
        let params = FilteredParams::new(n, m, d, w1, w2, l)?;
        let c = cost_filtered(n, m, q, &params)?;
        println!("q={q} n={n} m={m}  {params:?}");
        println!(
            "  t_isd={:.2} t_k={:.2} t_l={:.2} t_final={:.2} total={:.2}",
            c.t_isd, c.t_k, c.t_l, c.t_final, c.total
        );
        if let Some(b) = optimize_baseline(n, m, q) {
            println!("  baseline optimum {:.2} at {:?}", b.total, b.params);
        }
        if let Some(f) = optimize_filtered(n, m, q, None) {
            println!("  filtered optimum {:.2} at {:?}", f.total, f.params);
        }
    }
    Ok(())
}
