//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. The process exits non-zero if
//! any criterion fails.

use pkp::baseline::solve_baseline;
use pkp::estimator::{cost_filtered, optimize_baseline, optimize_filtered};
use pkp::filtered::{solve_filtered, FilteredParams};
use pkp::instance::{brute_force_solve, extend, generate_instance, verify, Permutation};
use pkp::isd::{count_bounds, isd_iteration, success_probability};
use pkp::list::{merge, TaggedList};
use pkp::solve::SolveOptions;
use pkp::{Elem, Matrix, PrimeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn mean_and_sigma(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn gf(q: u64) -> PrimeField {
    PrimeField::new(q).unwrap()
}

fn dss_point(n: usize, m: usize, q: u64, p: (usize, usize, usize, usize), target: f64) -> Outcome {
    let (d, w1, w2, l) = p;
    let params = FilteredParams::new(n, m, d, w1, w2, l).unwrap();
    let c = cost_filtered(n, m, q, &params).unwrap();
    outcome(
        within(c.total, target, 0.5),
        format!("log2 total {:.4}, target {target} +/- 0.5", c.total),
    )
}

fn criterion_1() -> Outcome {
    dss_point(69, 41, 251, (1, 2, 20, 16), 125.47)
}

fn criterion_2() -> Outcome {
    dss_point(94, 54, 509, (1, 2, 29, 22), 189.77)
}

fn criterion_3() -> Outcome {
    let a = optimize_baseline(69, 41, 251).unwrap();
    let b = optimize_baseline(94, 54, 509).unwrap();
    outcome(
        within(a.total, 130.0, 1.0) && within(b.total, 193.0, 1.0),
        format!(
            "baseline optimum {:.4} at (69,41,251) (target 130 +/- 1), {:.4} at (94,54,509) (target 193 +/- 1)",
            a.total, b.total
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, m, tb, tf) in [(50, 27, 92.03, 90.59), (75, 60, 71.25, 67.30)] {
        let b = optimize_baseline(n, m, 251).unwrap().total;
        let f = optimize_filtered(n, m, 251, None).unwrap().total;
        pass &= within(b, tb, 1.5) && within(f, tf, 1.5);
        parts.push(format!("({n},{m}) baseline {b:.4} vs {tb}, filtered {f:.4} vs {tf}"));
    }
    outcome(pass, parts.join("; "))
}

/// All `d`-dimensional subspaces of GF(3)^4, each as its full element list
/// (base-3 encoded coefficient vectors).
fn subspaces_gf3_4(d: usize) -> Vec<Vec<[u32; 4]>> {
    let decode = |x: u32| [x % 3, (x / 3) % 3, (x / 9) % 3, (x / 27) % 3];
    let add = |a: [u32; 4], b: [u32; 4], s: u32| {
        let mut o = [0; 4];
        for i in 0..4 {
            o[i] = (a[i] + s * b[i]) % 3;
        }
        o
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut gens = vec![0u32; d];
    loop {
        let mut span = BTreeSet::new();
        span.insert([0u32; 4]);
        for &g in &gens {
            let v = decode(g);
            let cur: Vec<[u32; 4]> = span.iter().copied().collect();
            for x in cur {
                span.insert(add(x, v, 1));
                span.insert(add(x, v, 2));
            }
        }
        if span.len() == 3usize.pow(d as u32) && seen.insert(span.clone()) {
            out.push(span.into_iter().collect());
        }
        // odometer over d-tuples of nonzero vectors
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            gens[i] += 1;
            if gens[i] < 81 {
                break;
            }
            gens[i] = 1;
            i += 1;
        }
        if gens.contains(&0) {
            for g in gens.iter_mut() {
                *g = (*g).max(1);
            }
        }
    }
}

fn criterion_5() -> Outcome {
    let (q, n, k, codes) = (3u64, 8usize, 4usize, 2000usize);
    let f = gf(q);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spaces: Vec<Vec<Vec<[u32; 4]>>> = (1..=2).map(subspaces_gf3_4).collect();
    let expected_sizes = [40usize, 130];
    if spaces[0].len() != expected_sizes[0] || spaces[1].len() != expected_sizes[1] {
        return outcome(false, "subspace enumeration is wrong");
    }
    // counts[d-1][w][code]
    let mut counts = vec![vec![vec![0f64; codes]; n + 1]; 2];
    for code in 0..codes {
        let g = Matrix::random_full_rank(f, k, n, &mut rng).unwrap();
        for (di, family) in spaces.iter().enumerate() {
            for space in family {
                let mut support = [false; 8];
                for coeffs in space {
                    let cw = g.left_mul(coeffs);
                    for (s, &v) in support.iter_mut().zip(&cw) {
                        *s |= v != 0;
                    }
                }
                let w = support.iter().filter(|&&s| s).count();
                counts[di][w][code] += 1.0;
            }
        }
    }
    let mut pass = true;
    let mut worst = String::new();
    let mut checked = 0;
    for d in 1..=2usize {
        for w in d..=n {
            let b = count_bounds(n, k, w, d, q).unwrap();
            let (lo, hi) = (b.lower.exp2(), b.upper.exp2());
            if d == 1 && (b.lower - b.upper).abs() > 1e-10 * b.lower.abs().max(1.0) {
                pass = false;
                worst = format!("d=1 w={w}: bounds differ ({} vs {})", b.lower, b.upper);
            }
            let (mean, sigma) = mean_and_sigma(&counts[d - 1][w]);
            let ok = mean + 3.0 * sigma >= lo && mean - 3.0 * sigma <= hi;
            checked += 1;
            if !ok {
                pass = false;
                worst = format!("d={d} w={w}: mean {mean:.4} +/- {sigma:.4} outside [{lo:.4}, {hi:.4}]");
            }
        }
    }
    let detail = if pass {
        format!("{checked} (d, w) cells over {codes} codes inside [lower, upper] within 3 sigma; d=1 bounds coincide")
    } else {
        worst
    };
    outcome(pass, detail)
}

fn criterion_6() -> Outcome {
    let (q, n, k, w, iters) = (251u64, 30usize, 12usize, 8usize, 10_000usize);
    let f = gf(q);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let support: Vec<usize> = {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..w {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
        }
        let mut s = idx[..w].to_vec();
        s.sort();
        s
    };
    let g = loop {
        let mut g = Matrix::random(f, k, n, &mut rng);
        for j in 0..n {
            let v = if support.contains(&j) {
                f.random_nonzero(&mut rng)
            } else {
                0
            };
            g.set(0, j, v);
        }
        if g.rank() == k {
            break g;
        }
    };
    let mut hits = 0usize;
    for _ in 0..iters {
        if let Some(sub) = isd_iteration(&g, w, 1, &mut rng).unwrap().found() {
            if sub.support() == support.as_slice() {
                hits += 1;
            }
        }
    }
    let p = success_probability(n, k, 1, w);
    let sigma = (p * (1.0 - p) / iters as f64).sqrt();
    let rate = hits as f64 / iters as f64;
    outcome(
        within(rate, p, 3.0 * sigma),
        format!("hit rate {rate:.5} vs p = {p:.5} (3 sigma = {:.5})", 3.0 * sigma),
    )
}

fn as_set(sols: Vec<Permutation>) -> BTreeSet<Vec<usize>> {
    sols.into_iter().map(|p| p.as_slice().to_vec()).collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes = [(11u64, 8usize, 3usize), (13, 9, 4), (251, 9, 5), (17, 8, 4), (31, 7, 2)];
    let mut total_solutions = 0;
    for i in 0..50 {
        let (q, n, m) = shapes[i % shapes.len()];
        let inst = generate_instance(gf(q), n, m, &mut rng).unwrap();
        let ext = extend(&inst).unwrap();
        let r = m + 1;
        let brute = as_set(brute_force_solve(&inst, 10).unwrap());
        total_solutions += brute.len();

        let bp = optimize_baseline(n, m, q).unwrap().params;
        let base = match solve_baseline(&ext, inst.c(), &bp, &mut rng, &SolveOptions::exhaustive()) {
            Ok(o) => as_set(o.solutions),
            Err(e) => return outcome(false, format!("instance {i}: baseline failed: {e}")),
        };

        // the largest admissible support always carries a subcode
        let w = n + 1 - r;
        let l = 2.min(r).max(w.saturating_sub(n - r));
        let fp = FilteredParams::new(n, m, 1, w / 2, w - w / 2, l).unwrap();
        let opts = SolveOptions {
            max_isd_iters: Some(100_000),
            ..SolveOptions::exhaustive()
        };
        let filt = match solve_filtered(&ext, inst.c(), &fp, &mut rng, &opts) {
            Ok(o) => as_set(o.solutions),
            Err(e) => return outcome(false, format!("instance {i}: filtered failed: {e}")),
        };
        if brute != base || brute != filt {
            return outcome(
                false,
                format!(
                    "instance {i} (q={q} n={n} m={m}): brute {} / baseline {} / filtered {} solutions",
                    brute.len(),
                    base.len(),
                    filt.len()
                ),
            );
        }
    }
    outcome(
        true,
        format!("50 instances, {total_solutions} solutions in total, identical sets"),
    )
}

fn criterion_8() -> Outcome {
    let (q, n, m) = (251u64, 15usize, 6usize);
    let params = optimize_filtered(n, m, q, None).unwrap().params;
    let mut ok = 0;
    let mut slowest = Duration::ZERO;
    let mut other_failures = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let inst = generate_instance(gf(q), n, m, &mut rng).unwrap();
        let ext = extend(&inst).unwrap();
        let start = Instant::now();
        let res = solve_filtered(&ext, inst.c(), &params, &mut rng, &SolveOptions::default());
        let took = start.elapsed();
        slowest = slowest.max(took);
        match res {
            Ok(out) => {
                if out.solutions.iter().all(|p| verify(&inst, p).unwrap()) && took <= Duration::from_secs(60) {
                    ok += 1;
                } else {
                    other_failures.push(format!("seed {seed}: unverified or slow ({took:?})"));
                }
            }
            Err(pkp::PkpError::Exhausted { .. }) => {}
            Err(e) => other_failures.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(
        ok >= 95 && other_failures.is_empty(),
        format!(
            "{ok}/100 solved and verified with d={} w={} w1={} w2={} l={}, slowest {:.2}s{}",
            params.d,
            params.w,
            params.w1,
            params.w2,
            params.l,
            slowest.as_secs_f64(),
            if other_failures.is_empty() {
                String::new()
            } else {
                format!(", non-ISD failures: {}", other_failures.join("; "))
            }
        ),
    )
}

fn criterion_9() -> Outcome {
    let (q, n, m) = (251u64, 12usize, 4usize);
    let r = m + 1;
    let params = FilteredParams::new(n, m, 1, 4, 4, 2).unwrap();
    let runs = 120;
    let mut ks = Vec::with_capacity(runs);
    let mut ls = Vec::with_capacity(runs);
    let opts = SolveOptions {
        exhaustive: true,
        ..SolveOptions::default()
    };
    for seed in 0..runs as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let inst = generate_instance(gf(q), n, m, &mut rng).unwrap();
        let ext = extend(&inst).unwrap();
        let out = match solve_filtered(&ext, inst.c(), &params, &mut rng, &opts) {
            Ok(o) => o,
            Err(e) => return outcome(false, format!("run {seed}: {e}")),
        };
        ks.push(out.stage("K").unwrap().measured as f64);
        ls.push(out.stage("L").unwrap().measured as f64);
    }
    let fall = |k: usize| ((n - k + 1)..=n).map(|i| i as f64).product::<f64>();
    let qf = q as f64;
    let k_expect = fall(params.w) / qf.powi(params.d as i32);
    let l_expect = fall(n - r + params.l) / qf.powi(params.l as i32);
    let (km, ksig) = mean_and_sigma(&ks);
    let (lm, lsig) = mean_and_sigma(&ls);
    outcome(
        within(km, k_expect, 3.0 * ksig) && within(lm, l_expect, 3.0 * lsig),
        format!(
            "{runs} runs: mean |K| {km:.1} vs {k_expect:.1} (sigma {ksig:.1}), mean |L| {lm:.1} vs {l_expect:.1} (sigma {lsig:.1})"
        ),
    )
}

fn naive_join(a: &TaggedList, b: &TaggedList) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    for (va, ta) in a.iter() {
        for (vb, tb) in b.iter() {
            if ta == tb && va.iter().all(|x| !vb.contains(x)) {
                out.push([va, vb].concat());
            }
        }
    }
    out.sort();
    out
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let source: Vec<Elem> = (0..7).collect();
    let mut total = 0usize;
    for i in 0..1000 {
        let mut lists = Vec::new();
        for _ in 0..2 {
            let width = rng.gen_range(1..=3);
            let mut l = TaggedList::new(width, 1);
            for _ in 0..rng.gen_range(0..=60) {
                let mut pool = source.clone();
                let vals: Vec<Elem> = (0..width).map(|_| pool.remove(rng.gen_range(0..pool.len()))).collect();
                l.push(&vals, &[rng.gen_range(0..7)]);
            }
            l.sort();
            lists.push(l);
        }
        let got: Vec<Vec<Elem>> = merge(&lists[0], &lists[1], "merge", usize::MAX)
            .unwrap()
            .iter()
            .map(|(v, _)| v.to_vec())
            .collect();
        let want = naive_join(&lists[0], &lists[1]);
        total += want.len();
        if got != want {
            return outcome(
                false,
                format!(
                    "pair {i}: merge gives {} rows, quadratic join {}",
                    got.len(),
                    want.len()
                ),
            );
        }
    }
    outcome(true, format!("1000 random pairs, {total} joined rows, all equal"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("PKP-DSS-128 filtered cost", criterion_1),
        ("PKP-DSS-192 filtered cost", criterion_2),
        ("claimed baseline costs 130 / 193", criterion_3),
        ("m/n sweep spot checks", criterion_4),
        ("subcode count bounds vs enumeration", criterion_5),
        ("ISD per-iteration success probability", criterion_6),
        ("exhaustive solver agreement", criterion_7),
        ("desk-scale filtered attack", criterion_8),
        ("K and L stage sizes", criterion_9),
        ("merge vs quadratic join", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2}: {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
