//! Meet-in-the-middle solver with subcode pre-filtering.
//!
//! A `d`-dimensional subcode of the dual with support size `w` gives `d`
//! equations on only `w` coordinates. The solver first enumerates those
//! `w` coordinates and keeps the assignments satisfying the subcode
//! equations (the K-stage), then extends them to `n - r + l` coordinates
//! against `l - d` further systematic rows (the L-stage), and finally
//! completes each survivor on the rest.
//!
//! Coordinates are rearranged by a column order `sigma` so that the
//! support occupies positions `[n-r+l-w, n-r+l)`:
//!
//! ```text
//!   0 ........ n-r+l-w ...... n-r+l ........ n
//!   | L1 block |  support (K)  |  completed   |
//! ```

use crate::error::{PkpError, Result};
use crate::field::Elem;
use crate::instance::{log2_expected_solutions, ExtendedSystem, Permutation, Reconstructor, ValueIndex};
use crate::isd::{count_bounds, find_subcode, isd_cost, Subcode};
use crate::list::{build_list, merge, merge_unsorted, merge_with, Affine, TaggedList};
use crate::logmath::LogFactorials;
use crate::matrix::Matrix;
use crate::solve::{FinalTest, SolveOptions, SolveOutcome, StageLog};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilteredParams {
    pub d: usize,
    pub w: usize,
    pub w1: usize,
    pub w2: usize,
    pub l: usize,
}

impl FilteredParams {
    /// Builds the parameter set with `w = w1 + w2` and checks it against an
    /// instance with `n` columns and `m` rows (`r = m + 1`).
    pub fn new(n: usize, m: usize, d: usize, w1: usize, w2: usize, l: usize) -> Result<Self> {
        let p = Self {
            d,
            w: w1 + w2,
            w1,
            w2,
            l,
        };
        p.check(n, m + 1)?;
        Ok(p)
    }

    pub fn check(&self, n: usize, r: usize) -> Result<()> {
        let Self { d, w, w1, w2, l } = *self;
        let bad = |why: &str| {
            Err(PkpError::InvalidParams(format!(
                "filtered params d={d} w={w} w1={w1} w2={w2} l={l} (n={n}, r={r}): {why}"
            )))
        };
        if r >= n {
            return bad("need r < n");
        }
        if w1 == 0 || w2 == 0 || w1 + w2 != w {
            return bad("need w1, w2 >= 1 and w = w1 + w2");
        }
        if d == 0 || d > l || l > r {
            return bad("need 1 <= d <= l <= r");
        }
        if d > w {
            return bad("need d <= w");
        }
        if w > n - r + l {
            return bad("need w <= n - r + l");
        }
        if w + r > n + d {
            return bad("need w <= n + d - r");
        }
        Ok(())
    }

    /// Length of the coordinate block enumerated directly in the L-stage.
    pub fn l1_width(&self, n: usize, r: usize) -> usize {
        n - r + self.l - self.w
    }
}

/// The system after moving the subcode support into place and putting the
/// last `r` columns in identity form.
#[derive(Debug, Clone)]
pub struct AlignedSystem {
    /// Subcode generator in the new column order (`d x n`).
    pub z: Matrix,
    /// Syndrome of the planted vector under `z`.
    pub s_subcode: Vec<Elem>,
    /// Column `i` of the aligned system is column `sigma[i]` of `H`.
    pub sigma: Permutation,
    /// `M` with `M sigma(H) = (U | I_r)`.
    pub m: Matrix,
    /// `(U | I_r)`
    pub h_sys: Matrix,
    /// `s M^T`
    pub s_sys: Vec<Elem>,
    /// Rows `d..l` and columns `0..n-r+l` of `h_sys`.
    pub block: Matrix,
    pub s_block: Vec<Elem>,
    /// `sigma(H)` with `s`, for completing candidates.
    pub system: ExtendedSystem,
}

fn support_layout(n: usize, support: &[usize], start: usize, others: &[usize]) -> Permutation {
    let mut map = Vec::with_capacity(n);
    map.extend_from_slice(&others[..start]);
    map.extend_from_slice(support);
    map.extend_from_slice(&others[start..]);
    Permutation::new(map).expect("support and complement partition the columns")
}

/// Moves the subcode support to positions `[n-r+l-w, n-r+l)` (ascending)
/// and derives the systematic form. The first attempt keeps every column
/// in ascending order; later attempts shuffle the support and the other
/// columns within their blocks, until the last `r` columns are invertible
/// and the `l - d` block rows are independent of the subcode.
pub fn align<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    subcode: &Subcode,
    params: &FilteredParams,
    rng: &mut R,
    max_resamples: usize,
) -> Result<AlignedSystem> {
    let (n, r) = (ext.n(), ext.r());
    params.check(n, r)?;
    let FilteredParams { d, w, l, .. } = *params;
    if subcode.dimension() != d || subcode.support_size() != w {
        return Err(PkpError::InvalidParams(format!(
            "subcode has dimension {} and support {}, expected d={d}, w={w}",
            subcode.dimension(),
            subcode.support_size()
        )));
    }
    let s_mat = Matrix::solve_row_combination(subcode.generator(), ext.h())?;
    let s_subcode = s_mat.syndrome(ext.s());

    let start = n - r + l - w;
    let mut support = subcode.support().to_vec();
    let mut others: Vec<usize> = (0..n).filter(|i| support.binary_search(i).is_err()).collect();
    let tail: Vec<usize> = (n - r..n).collect();
    let block_rows: Vec<usize> = (d..l).collect();
    let head: Vec<usize> = (0..n - r + l).collect();

    for attempt in 0..=max_resamples {
        if attempt > 0 {
            others.shuffle(rng);
            support.shuffle(rng);
        }
        let sigma = support_layout(n, &support, start, &others);
        let hs = ext.h().permute_columns(sigma.as_slice());
        let Some(m) = hs.select_columns(&tail).inverse() else {
            continue;
        };
        let h_sys = m.mul(&hs)?;
        let z = subcode.generator().permute_columns(sigma.as_slice());
        let sys_rows = h_sys.select_rows(&block_rows);
        if z.vstack(&sys_rows)?.rank() != l {
            continue;
        }
        if attempt > 0 {
            log::debug!("alignment needed {attempt} resamples");
        }
        let s_sys = m.syndrome(ext.s());
        return Ok(AlignedSystem {
            block: sys_rows.select_columns(&head),
            s_block: s_sys[d..l].to_vec(),
            system: ExtendedSystem::new(hs, ext.s().to_vec())?,
            z,
            s_subcode: s_subcode.clone(),
            sigma,
            m,
            h_sys,
            s_sys,
        });
    }
    Err(PkpError::ResampleLimit(max_resamples))
}

/// The list of assignments to the support block satisfying the subcode
/// equations, built from two halves of lengths `w1` and `w2`.
pub fn k_stage(aligned: &AlignedSystem, c: &[Elem], params: &FilteredParams, cap: usize) -> Result<TaggedList> {
    let f = aligned.z.field();
    let (z1, z2) = split_subcode(aligned, params);
    let k1 = build_list(f, c, params.w1, &z1, Affine::Raw, "K1", cap)?;
    let k2 = build_list(f, c, params.w2, &z2, Affine::OffsetMinus(&aligned.s_subcode), "K2", cap)?;
    merge(&k1, &k2, "K", cap)
}

/// Columns of `z` covering the first `w1` and the last `w2` support positions.
fn split_subcode(aligned: &AlignedSystem, params: &FilteredParams) -> (Matrix, Matrix) {
    let n = aligned.z.cols();
    let r = aligned.m.rows();
    let start = n - r + params.l - params.w;
    let k1_cols: Vec<usize> = (start..start + params.w1).collect();
    let k2_cols: Vec<usize> = (start + params.w1..start + params.w).collect();
    (aligned.z.select_columns(&k1_cols), aligned.z.select_columns(&k2_cols))
}

/// Runs subcode search, alignment, the K- and L-stages and the final test.
pub fn solve_filtered<R: Rng + ?Sized>(
    ext: &ExtendedSystem,
    c: &[Elem],
    params: &FilteredParams,
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let (n, r) = (ext.n(), ext.r());
    if c.len() != n {
        return Err(PkpError::DimensionMismatch(format!("|c| = {} but n = {n}", c.len())));
    }
    params.check(n, r)?;
    let FilteredParams { d, w, w1, w2, l } = *params;
    let f = ext.field();
    let q = f.modulus() as u64;
    let log2q = (q as f64).log2();
    let lf = LogFactorials::new(n);
    let cap = opts.memory_cap;
    let mut log = StageLog::new();

    let bounds = count_bounds(n, r, w, d, q)?;
    if !bounds.expects_one() {
        log::warn!(
            "dual code expects 2^{:.2} subcodes with d={d}, w={w}; search may fail",
            bounds.lower
        );
    }
    let search = log.time("isd", isd_cost(n, r, w, d, q)?, || {
        let s = find_subcode(ext.h(), w, d, rng, opts.max_isd_iters)?;
        let it = s.iterations;
        Ok((s, it))
    })?;
    let aligned = align(ext, &search.subcode, params, rng, opts.max_resamples)?;

    let (z1, z2) = split_subcode(&aligned, params);
    let k1 = log.time("K1", lf.falling(n, w1), || {
        let list = build_list(f, c, w1, &z1, Affine::Raw, "K1", cap)?;
        let len = list.len() as u64;
        Ok((list, len))
    })?;
    let k2 = log.time("K2", lf.falling(n, w2), || {
        let list = build_list(f, c, w2, &z2, Affine::OffsetMinus(&aligned.s_subcode), "K2", cap)?;
        let len = list.len() as u64;
        Ok((list, len))
    })?;
    let k_pred = lf.falling(n, w) - d as f64 * log2q;
    let k = log.time("K", k_pred, || {
        let list = merge_unsorted(&k1, &k2, "K", cap)?;
        let len = list.len() as u64;
        Ok((list, len))
    })?;
    drop((k1, k2));

    let a = params.l1_width(n, r);
    let width = n - r + l;
    let right_cols: Vec<usize> = (a..width).collect();
    let h_right = aligned.block.select_columns(&right_cols);
    let l2 = log.time("L2", k_pred, || {
        let mut list = k;
        list.retag(f, &h_right, Affine::OffsetMinus(&aligned.s_block));
        let len = list.len() as u64;
        Ok((list, len))
    })?;

    let free: Vec<usize> = (0..n - r).collect();
    let recon = Reconstructor::new(&aligned.system, &free)?;
    let index = ValueIndex::new(c);
    let mut test = FinalTest {
        recon: &recon,
        index: &index,
        column_order: &aligned.sigma,
        scratch: vec![0; n],
        original: vec![0; n],
    };
    let mut found = BTreeSet::new();
    let l_pred = lf.falling(n, width) - l as f64 * log2q;

    if a == 0 {
        // nothing to enumerate in front of the support: the K entries whose
        // block tag vanishes are the survivors
        log.time("L", l_pred, || {
            let mut count = 0u64;
            for (v, tag) in l2.iter() {
                if tag.iter().any(|&t| t != 0) {
                    continue;
                }
                count += 1;
                if let Some(p) = test.check(&v[..n - r]) {
                    found.insert(p);
                    if !opts.exhaustive {
                        break;
                    }
                }
            }
            Ok(((), count))
        })?;
    } else {
        let left_cols: Vec<usize> = (0..a).collect();
        let h_left = aligned.block.select_columns(&left_cols);
        let l1 = log.time("L1", lf.falling(n, a), || {
            let list = build_list(f, c, a, &h_left, Affine::Raw, "L1", cap)?;
            let len = list.len() as u64;
            Ok((list, len))
        })?;
        let mut candidate = Vec::with_capacity(width);
        log.time("L", l_pred, || {
            let count = merge_with(&l1, &l2, |x, y| {
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
    }
    log.time("final", log2_expected_solutions(q, n, r - 1), || {
        Ok(((), found.len() as u64))
    })?;
    log.finish(found)
}
