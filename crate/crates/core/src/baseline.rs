//! Split-list meet-in-the-middle solver.
//!
//! With `H'` the systematic form of `H` on its last `r` columns, the first
//! `l` rows of `H'` only touch the first `n - r + l` coordinates. The
//! solver enumerates those coordinates as two halves of lengths `l1` and
//! `l2`, keeps the pairs whose partial syndromes collide, and completes
//! each survivor on the remaining coordinates.

use crate::error::{PkpError, Result};
use crate::field::Elem;
use crate::instance::{log2_expected_solutions, ExtendedSystem, Permutation, Reconstructor, ValueIndex};
use crate::list::{build_list, merge_with, Affine, TaggedList};
use crate::logmath::LogFactorials;
use crate::matrix::Matrix;
use crate::solve::{FinalTest, SolveOptions, SolveOutcome, StageLog};
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineParams {
    pub l: usize,
    pub l1: usize,
    pub l2: usize,
}

impl BaselineParams {
    /// Derives `l = l1 + l2 - (n - r)` with `r = m + 1` and checks
    /// `1 <= l <= r`, `l1, l2 >= 1`.
    pub fn new(n: usize, m: usize, l1: usize, l2: usize) -> Result<Self> {
        let r = m + 1;
        if r > n || l1 == 0 || l2 == 0 || l1 + l2 <= n - r || l1 + l2 > n {
            return Err(PkpError::InvalidParams(format!(
                "baseline needs l1, l2 >= 1 and n-r < l1+l2 <= n; got n={n} r={r} l1={l1} l2={l2}"
            )));
        }
        Ok(Self {
            l: l1 + l2 - (n - r),
            l1,
            l2,
        })
    }

    fn check(&self, n: usize, r: usize) -> Result<()> {
        let again = Self::new(n, r - 1, self.l1, self.l2)?;
        if again != *self {
            return Err(PkpError::InvalidParams(format!(
                "l = {} inconsistent with l1 + l2 - (n - r) = {}",
                self.l, again.l
            )));
        }
        Ok(())
    }
}

/// The two half-lists plus the column order they were built in.
#[derive(Debug, Clone)]
pub struct BaselineLists {
    pub left: TaggedList,
    pub right: TaggedList,
    /// Column `i` of the solved system is column `column_order[i]` of `H`.
    pub column_order: Permutation,
    /// `H` with columns rearranged by `column_order`.
    pub system: ExtendedSystem,
}

/// Systematic form of `[H | s^T]` on the last `r` columns, resampling a
/// random column order when that block is singular.
fn systematic_on_tail<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    rng: &mut R,
    max_resamples: usize,
) -> Result<(Permutation, ExtendedSystem, Matrix)> {
    let (n, r) = (ext.n(), ext.r());
    let tail: Vec<usize> = (n - r..n).collect();
    let mut order = Permutation::identity(n);
    for attempt in 0..=max_resamples {
        if attempt > 0 {
            order = Permutation::random(n, rng);
        }
        let h = ext.h().permute_columns(order.as_slice());
        if let Some(red) = h.with_column(ext.s()).rref(&tail) {
            if attempt > 0 {
                log::debug!("tail block singular; resampled column order after {attempt} attempts");
            }
            return Ok((order, ExtendedSystem::new(h, ext.s().to_vec())?, red));
        }
    }
    Err(PkpError::ResampleLimit(max_resamples))
}

pub fn build_baseline_lists<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    c: &[Elem],
    params: &BaselineParams,
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<BaselineLists> {
    build_lists_logged(ext, c, params, rng, opts, &mut StageLog::new())
}

fn build_lists_logged<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    c: &[Elem],
    params: &BaselineParams,
    rng: &mut R,
    opts: &SolveOptions,
    log: &mut StageLog,
) -> Result<BaselineLists> {
    let (n, r) = (ext.n(), ext.r());
    if c.len() != n {
        return Err(PkpError::DimensionMismatch(format!("|c| = {} but n = {n}", c.len())));
    }
    params.check(n, r)?;
    let f = ext.field();
    let (order, system, red) = systematic_on_tail(ext, rng, opts.max_resamples)?;

    let width = n - r + params.l;
    let rows: Vec<usize> = (0..params.l).collect();
    let block = red.select_rows(&rows);
    let s_tilde: Vec<Elem> = block.column(n);
    let left_cols: Vec<usize> = (0..params.l1).collect();
    let right_cols: Vec<usize> = (params.l1..width).collect();
    let h_left = block.select_columns(&left_cols);
    let h_right = block.select_columns(&right_cols);

    let lf = LogFactorials::new(n);
    let cap = opts.memory_cap;
    let left = log.time("L1", lf.falling(n, params.l1), || {
        let l = build_list(f, c, params.l1, &h_left, Affine::Raw, "L1", cap)?;
        let len = l.len() as u64;
        Ok((l, len))
    })?;
    let right = log.time("L2", lf.falling(n, params.l2), || {
        let l = build_list(f, c, params.l2, &h_right, Affine::OffsetMinus(&s_tilde), "L2", cap)?;
        let len = l.len() as u64;
        Ok((l, len))
    })?;
    Ok(BaselineLists {
        left,
        right,
        column_order: order,
        system,
    })
}

/// Solves `pi(c) H^T = s` with the split-list method. Returns the first
/// solution in canonical list order, or all of them in exhaustive mode.
pub fn solve_baseline<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    c: &[Elem],
    params: &BaselineParams,
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let mut log = StageLog::new();
    let lists = build_lists_logged(ext, c, params, rng, opts, &mut log)?;
    let (n, r) = (ext.n(), ext.r());
    let q = ext.field().modulus() as u64;
    let lf = LogFactorials::new(n);

    let free: Vec<usize> = (0..n - r).collect();
    let recon = Reconstructor::new(&lists.system, &free)?;
    let index = ValueIndex::new(c);
    let mut test = FinalTest {
        recon: &recon,
        index: &index,
        column_order: &lists.column_order,
        scratch: vec![0; n],
        original: vec![0; n],
    };
    let mut found = BTreeSet::new();
    let mut candidate = Vec::with_capacity(n - r + params.l);
    let merged_pred = lf.falling(n, n - r + params.l) - params.l as f64 * (q as f64).log2();
    log.time("L", merged_pred, || {
        let count = merge_with(&lists.left, &lists.right, |x, y| {
            candidate.clear();
            candidate.extend_from_slice(x);
            candidate.extend_from_slice(y);
            if let Some(p) = test.check(&candidate[..n - r]) {
                found.insert(p);
                return opts.exhaustive;
            }
            true
        });
        Ok(((), count))
    })?;
    log.time("final", log2_expected_solutions(q, n, r - 1), || {
        Ok(((), found.len() as u64))
    })?;
    log.finish(found)
}
