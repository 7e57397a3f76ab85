//! Small-support subcodes: how many a random code has, how to find one
//! with information set decoding, and what the search costs.
//!
//! A `d`-dimensional subcode with support size `w` of the dual code is a set
//! of `d` independent parity equations touching only `w` coordinates. For a
//! random `[n, k]` code the expected number of them is bracketed by
//! [`count_bounds`]; [`isd_iteration`] is one randomized attempt at finding
//! one, and [`isd_cost`] is the expected work of repeating it until success.

use crate::error::{PkpError, Result};
use crate::instance::Permutation;
use crate::logmath::{log2_pow_diff, log2_pow_minus_one, LogFactorials};
use crate::matrix::Matrix;
use rand::Rng;

/// A `d x n` generator of a subcode together with its support.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcode {
    generator: Matrix,
    support: Vec<usize>,
}

impl Subcode {
    pub fn new(generator: Matrix) -> Self {
        let support = generator.support();
        Self { generator, support }
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }
    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }
    /// Sorted column indices where some generator row is nonzero.
    pub fn support(&self) -> &[usize] {
        &self.support
    }
    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// `log2` of the Gaussian binomial `[k, d]_q`, the number of
/// `d`-dimensional subspaces of a `k`-dimensional space over GF(q).
pub fn gaussian_binomial(k: usize, d: usize, q: u64) -> f64 {
    assert!(d <= k, "gaussian_binomial needs d <= k");
    let q = q as f64;
    (0..d)
        .map(|i| log2_pow_minus_one(q, (k - i) as u32) - log2_pow_minus_one(q, (i + 1) as u32))
        .sum()
}

/// Bounds on the mean number of `d`-dimensional subcodes with support size
/// `w` of a random `[n, k]` code, both in log2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcodeCountBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SubcodeCountBounds {
    /// Rule of thumb for "at least one such subcode exists".
    pub fn expects_one(&self) -> bool {
        self.lower > 0.0
    }
}

fn check_domain(n: usize, k: usize, w: usize, d: usize) -> Result<()> {
    if d == 0 || d > w.min(k) || w > n || k > n {
        return Err(PkpError::InvalidParams(format!(
            "subcode bounds need 1 <= d <= min(w, k), w <= n, k <= n; got n={n} k={k} w={w} d={d}"
        )));
    }
    Ok(())
}

pub(crate) fn count_bounds_with(
    lf: &LogFactorials,
    n: usize,
    k: usize,
    w: usize,
    d: usize,
    q: u64,
) -> SubcodeCountBounds {
    let qf = q as f64;
    let common = lf.binomial(n, w) + gaussian_binomial(k, d, q) - gaussian_binomial(n, d, q);
    let per_col = log2_pow_minus_one(qf, d as u32);
    let lower = common + (w - d) as f64 * per_col;
    let basis_changes: f64 = (0..d).map(|i| log2_pow_diff(qf, d as u32, i as u32)).sum();
    let upper = lower + (d as f64 * per_col - basis_changes);
    SubcodeCountBounds { lower, upper }
}

pub fn count_bounds(n: usize, k: usize, w: usize, d: usize, q: u64) -> Result<SubcodeCountBounds> {
    check_domain(n, k, w, d)?;
    Ok(count_bounds_with(&LogFactorials::new(n), n, k, w, d, q))
}

/// Probability that one iteration isolates a fixed subcode:
/// `C(w, d) C(n - w, k - d) / C(n, k)`.
pub fn success_probability(n: usize, k: usize, d: usize, w: usize) -> f64 {
    success_probability_with(&LogFactorials::new(n), n, k, d, w)
}

pub(crate) fn success_probability_with(lf: &LogFactorials, n: usize, k: usize, d: usize, w: usize) -> f64 {
    if d > w || k < d || k - d > n - w {
        return 0.0;
    }
    (lf.binomial(w, d) + lf.binomial(n - w, k - d) - lf.binomial(n, k)).exp2()
}

/// `1 - (1 - p)^N` with `N = 2^log2_count`.
fn at_least_one(p: f64, log2_count: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    -(log2_count.exp2() * (-p).ln_1p()).exp_m1()
}

/// Expected cost `(k^3 + C(k, d)) / (1 - (1 - p)^N_low)` in log2. The
/// constant hidden in the asymptotic notation is taken as 1.
pub fn isd_cost(n: usize, k: usize, w: usize, d: usize, q: u64) -> Result<f64> {
    check_domain(n, k, w, d)?;
    if w + k > n + d {
        return Err(PkpError::InvalidParams(format!(
            "ISD needs w <= n + d - k, got w={w} > {}",
            n + d - k
        )));
    }
    let lf = LogFactorials::new(n);
    Ok(isd_cost_with(&lf, n, k, w, d, q))
}

pub(crate) fn isd_cost_with(lf: &LogFactorials, n: usize, k: usize, w: usize, d: usize, q: u64) -> f64 {
    let p = success_probability_with(lf, n, k, d, w);
    let bounds = count_bounds_with(lf, n, k, w, d, q);
    isd_cost_from(p, bounds.lower, k, d, lf)
}

pub(crate) fn isd_cost_from(p: f64, log2_count: f64, k: usize, d: usize, lf: &LogFactorials) -> f64 {
    let succ = at_least_one(p, log2_count);
    if succ <= 0.0 {
        return f64::INFINITY;
    }
    let work = (k as f64).powi(3) + lf.binomial(k, d).exp2();
    work.log2() - succ.log2()
}

/// Result of a single ISD attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum IsdStep {
    Found(Subcode),
    /// The first `k` permuted columns were not an information set.
    SingularBlock,
    /// No `d` rows of the systematic form had the requested support.
    NoMatch,
}

impl IsdStep {
    pub fn found(self) -> Option<Subcode> {
        match self {
            IsdStep::Found(s) => Some(s),
            _ => None,
        }
    }
}

fn check_iteration(g: &Matrix, w: usize, d: usize) -> Result<()> {
    let (k, n) = (g.rows(), g.cols());
    check_domain(n, k, w, d)?;
    if w + k > n + d {
        return Err(PkpError::InvalidParams(format!(
            "ISD needs w <= n + d - k, got w={w} > {}",
            n + d - k
        )));
    }
    Ok(())
}

/// One ISD iteration on the code generated by `g` (`k x n`).
///
/// Permutes the columns at random, puts the first `k` columns in identity
/// form, and scans the `d`-subsets of rows in lexicographic order for one
/// whose non-identity part has support exactly `w - d`.
pub fn isd_iteration<R: Rng + ?Sized>(g: &Matrix, w: usize, d: usize, rng: &mut R) -> Result<IsdStep> {
    check_iteration(g, w, d)?;
    let (k, n) = (g.rows(), g.cols());
    let sigma = Permutation::random(n, rng);
    let permuted = g.permute_columns(sigma.as_slice());
    let info_set: Vec<usize> = (0..k).collect();
    let Some(sys) = permuted.rref(&info_set) else {
        return Ok(IsdStep::SingularBlock);
    };

    let words = (n - k).div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = (0..k)
        .map(|r| {
            let mut m = vec![0u64; words];
            for (j, &v) in sys.row(r)[k..].iter().enumerate() {
                if v != 0 {
                    m[j / 64] |= 1 << (j % 64);
                }
            }
            m
        })
        .collect();

    let Some(rows) = first_subset_with_support(&masks, d, w - d) else {
        return Ok(IsdStep::NoMatch);
    };
    let gen = sys.select_rows(&rows).permute_columns(sigma.inverse().as_slice());
    Ok(IsdStep::Found(Subcode::new(gen)))
}

/// Lexicographically first `d`-subset of rows whose OR-ed masks have
/// exactly `target` bits set. The union only grows, so branches that
/// already exceed `target` are pruned.
fn first_subset_with_support(masks: &[Vec<u64>], d: usize, target: usize) -> Option<Vec<usize>> {
    fn rec(masks: &[Vec<u64>], start: usize, d: usize, target: usize, acc: &[u64], chosen: &mut Vec<usize>) -> bool {
        let weight: usize = acc.iter().map(|w| w.count_ones() as usize).sum();
        if weight > target {
            return false;
        }
        if chosen.len() == d {
            return weight == target;
        }
        let remaining = d - chosen.len();
        for i in start..=masks.len() - remaining {
            let next: Vec<u64> = acc.iter().zip(&masks[i]).map(|(a, b)| a | b).collect();
            chosen.push(i);
            if rec(masks, i + 1, d, target, &next, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let words = masks.first().map_or(1, |m| m.len());
    let mut chosen = Vec::with_capacity(d);
    rec(masks, 0, d, target, &vec![0; words], &mut chosen).then_some(chosen)
}

/// Outcome of [`find_subcode`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubcodeSearch {
    pub subcode: Subcode,
    /// 1-based index of the successful iteration.
    pub iterations: u64,
}

/// Iteration budget targeting a residual failure probability of `2^-10`.
pub fn default_max_iters(n: usize, k: usize, w: usize, d: usize, q: u64) -> Result<u64> {
    check_domain(n, k, w, d)?;
    let lf = LogFactorials::new(n);
    let p = success_probability_with(&lf, n, k, d, w);
    let log2_count = count_bounds_with(&lf, n, k, w, d, q).lower.max(0.0);
    let p_hat = at_least_one(p, log2_count);
    if p_hat <= 0.0 {
        return Err(PkpError::InvalidParams(format!(
            "ISD cannot succeed for n={n} k={k} w={w} d={d}"
        )));
    }
    let iters = (1024f64.ln() / p_hat).ceil();
    Ok(if iters >= u64::MAX as f64 {
        u64::MAX
    } else {
        iters as u64
    })
}

/// Repeats [`isd_iteration`] until a subcode with dimension `d` and
/// support size `w` is found, checking the result against `g`.
pub fn find_subcode<R: Rng + ?Sized>(
    g: &Matrix,
    w: usize,
    d: usize,
    rng: &mut R,
    max_iters: Option<u64>,
) -> Result<SubcodeSearch> {
    check_iteration(g, w, d)?;
    let (k, n) = (g.rows(), g.cols());
    let q = g.field().modulus() as u64;
    let bounds = count_bounds(n, k, w, d, q)?;
    if !bounds.expects_one() {
        log::warn!(
            "expected subcode count 2^{:.2} <= 1 for n={n} k={k} w={w} d={d}; search will likely fail",
            bounds.lower
        );
    }
    let budget = match max_iters {
        Some(b) => b,
        None => default_max_iters(n, k, w, d, q)?,
    };
    for it in 1..=budget {
        let Some(sub) = isd_iteration(g, w, d, rng)?.found() else {
            continue;
        };
        if sub.support_size() == w
            && sub.generator().rank() == d
            && Matrix::solve_row_combination(sub.generator(), g).is_ok()
        {
            return Ok(SubcodeSearch {
                subcode: sub,
                iterations: it,
            });
        }
    }
    Err(PkpError::Exhausted {
        what: "subcode",
        iters: budget,
    })
}
