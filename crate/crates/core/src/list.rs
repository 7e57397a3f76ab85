//! Tagged candidate lists and the collision merge shared by both solvers.
//!
//! An entry is a partial assignment (a sequence of distinct values of `c`)
//! plus a tag in GF(q)^t. Lists are kept sorted by `(tag, values)` so that
//! merging two lists is a linear scan over equal-tag groups.

use crate::error::{PkpError, Result};
use crate::field::{Elem, PrimeField};
use crate::matrix::Matrix;
use rayon::prelude::*;
use std::cmp::Ordering;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedList {
    width: usize,
    tag_width: usize,
    values: Vec<Elem>,
    tags: Vec<Elem>,
}

impl TaggedList {
    pub fn new(width: usize, tag_width: usize) -> Self {
        assert!(width > 0, "entries need at least one value");
        Self {
            width,
            tag_width,
            values: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn tag_width(&self) -> usize {
        self.tag_width
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, values: &[Elem], tag: &[Elem]) {
        assert_eq!(values.len(), self.width);
        assert_eq!(tag.len(), self.tag_width);
        self.values.extend_from_slice(values);
        self.tags.extend_from_slice(tag);
    }

    pub fn values(&self, i: usize) -> &[Elem] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn tag(&self, i: usize) -> &[Elem] {
        &self.tags[i * self.tag_width..(i + 1) * self.tag_width]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Elem], &[Elem])> + '_ {
        (0..self.len()).map(move |i| (self.values(i), self.tag(i)))
    }

    fn cmp_entries(&self, a: usize, b: usize) -> Ordering {
        self.tag(a)
            .cmp(self.tag(b))
            .then_with(|| self.values(a).cmp(self.values(b)))
    }

    /// Order-preserving packing of `(tag, values)` into one integer, when
    /// the entry fits in 128 bits.
    fn packed_keys(&self, bits: u32) -> Option<Vec<(u128, u32)>> {
        let total = (self.width + self.tag_width) as u32 * bits;
        if total > 128 || self.len() > u32::MAX as usize {
            return None;
        }
        let key = |i: usize| {
            self.tag(i)
                .iter()
                .chain(self.values(i))
                .fold(0u128, |acc, &x| (acc << bits) | x as u128)
        };
        Some(if self.len() > PAR_THRESHOLD {
            (0..self.len()).into_par_iter().map(|i| (key(i), i as u32)).collect()
        } else {
            (0..self.len()).map(|i| (key(i), i as u32)).collect()
        })
    }

    /// Sorts into canonical `(tag, values)` order.
    pub fn sort(&mut self) {
        let max = self.values.iter().chain(&self.tags).copied().max().unwrap_or(0);
        let bits = (32 - max.leading_zeros()).max(1);
        let par = self.len() > PAR_THRESHOLD;
        let order: Vec<usize> = match self.packed_keys(bits) {
            Some(mut keys) => {
                if par {
                    keys.par_sort_unstable();
                } else {
                    keys.sort_unstable();
                }
                keys.into_iter().map(|(_, i)| i as usize).collect()
            }
            None => {
                let mut order: Vec<usize> = (0..self.len()).collect();
                if par {
                    order.par_sort_unstable_by(|&a, &b| self.cmp_entries(a, b));
                } else {
                    order.sort_unstable_by(|&a, &b| self.cmp_entries(a, b));
                }
                order
            }
        };
        let mut values = Vec::with_capacity(self.values.len());
        let mut tags = Vec::with_capacity(self.tags.len());
        for &i in &order {
            values.extend_from_slice(self.values(i));
            tags.extend_from_slice(self.tag(i));
        }
        self.values = values;
        self.tags = tags;
    }

    pub fn is_sorted(&self) -> bool {
        (1..self.len()).all(|i| self.cmp_entries(i - 1, i) != Ordering::Greater)
    }

    /// Replaces every tag with the affine image of `values . tag_matrix^T`
    /// and re-sorts. `tag_matrix` is `t x width`.
    pub fn retag(&mut self, field: PrimeField, tag_matrix: &Matrix, affine: Affine<'_>) {
        let t = tag_matrix.rows();
        assert_eq!(tag_matrix.cols(), self.width);
        let retag_one = |v: &[Elem]| {
            let mut syn = tag_matrix.syndrome(v);
            affine.apply(field, &mut syn);
            syn
        };
        let tags: Vec<Elem> = if self.len() > PAR_THRESHOLD {
            self.values.par_chunks(self.width).flat_map_iter(retag_one).collect()
        } else {
            self.values.chunks(self.width).flat_map(retag_one).collect()
        };
        self.tag_width = t;
        self.tags = tags;
        self.sort();
    }
}

/// How a raw product `x . M^T` becomes a tag: `raw` or `offset - raw`.
#[derive(Debug, Clone, Copy)]
pub enum Affine<'a> {
    Raw,
    OffsetMinus(&'a [Elem]),
}

impl Affine<'_> {
    fn apply(&self, f: PrimeField, raw: &mut [Elem]) {
        if let Affine::OffsetMinus(off) = self {
            for (x, &o) in raw.iter_mut().zip(off.iter()) {
                *x = f.sub(o, *x);
            }
        }
    }
}

fn cap_check(stage: &'static str, predicted: u128, cap: usize) -> Result<()> {
    if predicted > cap as u128 {
        return Err(PkpError::ResourceCap { stage, predicted, cap });
    }
    Ok(())
}

/// Every length-`len` sequence of distinct entries of `source`, tagged with
/// the affine image of `x . tag_matrix^T` (`tag_matrix` is `t x len`).
/// Fails with `ResourceCap` before allocating if the list would exceed `cap`.
pub fn build_list(
    field: PrimeField,
    source: &[Elem],
    len: usize,
    tag_matrix: &Matrix,
    affine: Affine<'_>,
    stage: &'static str,
    cap: usize,
) -> Result<TaggedList> {
    assert!(len >= 1 && len <= source.len());
    assert_eq!(tag_matrix.cols(), len);
    let n = source.len();
    let predicted = (0..len as u128).fold(1u128, |acc, i| acc.saturating_mul(n as u128 - i));
    cap_check(stage, predicted, cap)?;

    let t = tag_matrix.rows();
    // columns of the tag matrix, one per position
    let cols: Vec<Vec<Elem>> = (0..len).map(|j| tag_matrix.column(j)).collect();

    let build_branch = |first: usize| -> TaggedList {
        let mut out = TaggedList::new(len, t);
        let mut used = vec![false; n];
        let mut chosen = vec![0 as Elem; len];
        // acc[d] holds the running product after fixing positions < d
        let mut acc = vec![vec![0 as Elem; t]; len + 1];
        used[first] = true;
        chosen[0] = source[first];
        for (a, &m) in acc[1].iter_mut().zip(&cols[0]) {
            *a = field.mul(source[first], m);
        }
        fn rec(
            f: PrimeField,
            depth: usize,
            source: &[Elem],
            cols: &[Vec<Elem>],
            used: &mut [bool],
            chosen: &mut [Elem],
            acc: &mut [Vec<Elem>],
            affine: Affine<'_>,
            out: &mut TaggedList,
        ) {
            if depth == chosen.len() {
                out.values.extend_from_slice(chosen);
                let at = out.tags.len();
                out.tags.extend_from_slice(&acc[depth]);
                affine.apply(f, &mut out.tags[at..]);
                return;
            }
            for i in 0..source.len() {
                if used[i] {
                    continue;
                }
                used[i] = true;
                chosen[depth] = source[i];
                let (lo, hi) = acc.split_at_mut(depth + 1);
                for ((nx, &pv), &m) in hi[0].iter_mut().zip(&lo[depth]).zip(&cols[depth]) {
                    *nx = f.mul_add(pv, source[i], m);
                }
                rec(f, depth + 1, source, cols, used, chosen, acc, affine, out);
                used[i] = false;
            }
        }
        rec(
            field,
            1,
            source,
            &cols,
            &mut used,
            &mut chosen,
            &mut acc,
            affine,
            &mut out,
        );
        out
    };

    let parts: Vec<TaggedList> = if predicted as usize > PAR_THRESHOLD {
        (0..n).into_par_iter().map(build_branch).collect()
    } else {
        (0..n).map(build_branch).collect()
    };
    let mut list = TaggedList::new(len, t);
    list.values.reserve(predicted as usize * len);
    list.tags.reserve(predicted as usize * t);
    for p in parts {
        list.values.extend(p.values);
        list.tags.extend(p.tags);
    }
    list.sort();
    Ok(list)
}

fn disjoint(a: &[Elem], b: &[Elem]) -> bool {
    b.iter().all(|x| !a.contains(x))
}

/// Visits every pair `(left[i], right[j])` with equal tags and disjoint
/// value sets, in sorted order. Both lists must be sorted. Returns the
/// number of pairs visited; `visit` returning `false` stops early.
pub fn merge_with<F>(left: &TaggedList, right: &TaggedList, mut visit: F) -> u64
where
    F: FnMut(&[Elem], &[Elem]) -> bool,
{
    assert_eq!(left.tag_width, right.tag_width, "tag widths differ");
    debug_assert!(left.is_sorted() && right.is_sorted());
    let (nl, nr) = (left.len(), right.len());
    let (mut i, mut j) = (0, 0);
    let mut count = 0u64;
    while i < nl && j < nr {
        match left.tag(i).cmp(right.tag(j)) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                let tag = left.tag(i);
                let i_end = (i..nl).find(|&x| left.tag(x) != tag).unwrap_or(nl);
                let j_end = (j..nr).find(|&y| right.tag(y) != tag).unwrap_or(nr);
                for a in i..i_end {
                    let va = left.values(a);
                    for b in j..j_end {
                        let vb = right.values(b);
                        if disjoint(va, vb) {
                            count += 1;
                            if !visit(va, vb) {
                                return count;
                            }
                        }
                    }
                }
                i = i_end;
                j = j_end;
            }
        }
    }
    count
}

/// Materialized merge: concatenated values, empty tags, sorted.
pub fn merge(left: &TaggedList, right: &TaggedList, stage: &'static str, cap: usize) -> Result<TaggedList> {
    let mut out = merge_unsorted(left, right, stage, cap)?;
    out.sort();
    Ok(out)
}

/// [`merge`] without the final sort, for callers that retag right away.
pub fn merge_unsorted(left: &TaggedList, right: &TaggedList, stage: &'static str, cap: usize) -> Result<TaggedList> {
    let mut out = TaggedList::new(left.width + right.width, 0);
    let mut overflow = false;
    let count = merge_with(left, right, |a, b| {
        if out.values.len() / out.width >= cap {
            overflow = true;
            return false;
        }
        out.values.extend_from_slice(a);
        out.values.extend_from_slice(b);
        true
    });
    if overflow {
        return Err(PkpError::ResourceCap {
            stage,
            predicted: count as u128,
            cap,
        });
    }
    Ok(out)
}
