//! PKP instances, the extended system `(H, s)`, reconstruction from a
//! partial assignment, and the brute-force oracle.

use crate::error::{PkpError, Result};
use crate::field::{Elem, PrimeField};
use crate::matrix::Matrix;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::fmt::Write as _;

/// A permutation of `{0, .., n-1}`. Applied to a vector it reorders
/// entries as `pi(a) = (a[pi[0]], .., a[pi[n-1]])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return Err(PkpError::InvalidParams(format!("{map:?} is not a permutation")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }

    /// From 1-based indices, as used in the instance file format.
    pub fn from_one_based(idx: &[usize]) -> Result<Self> {
        let map = idx
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| PkpError::InvalidParams("index 0 in 1-based permutation".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply<T: Copy>(&self, a: &[T]) -> Vec<T> {
        assert_eq!(a.len(), self.map.len(), "permutation length mismatch");
        self.map.iter().map(|&i| a[i]).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self { map: inv }
    }

    /// `self.then(other).apply(a) == other.apply(&self.apply(a))`
    pub fn then(&self, other: &Permutation) -> Self {
        Self {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        }
    }
}

/// An instance `(A, c)` of the Permuted Kernel Problem, optionally with the
/// planted solution it was generated around.
#[derive(Debug, Clone, PartialEq)]
pub struct PkpInstance {
    field: PrimeField,
    a: Matrix,
    c: Vec<Elem>,
    planted: Option<Permutation>,
}

/// Emitted when `n! / q^m >= 1`, i.e. the instance is expected to carry
/// spurious solutions besides the planted one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardnessWarning {
    pub log2_expected_solutions: f64,
}

impl std::fmt::Display for HardnessWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "n!/q^m = 2^{:.2} >= 1: instance is not in the hard regime",
            self.log2_expected_solutions
        )
    }
}

/// `log2(n! / q^m)`, the expected number of solutions of a random instance.
pub fn log2_expected_solutions(q: u64, n: usize, m: usize) -> f64 {
    (2..=n).map(|i| (i as f64).log2()).sum::<f64>() - m as f64 * (q as f64).log2()
}

const KERNEL_RESAMPLE_LIMIT: usize = 100_000;

impl PkpInstance {
    /// Validates `A` (full row rank, `m < n`) and `c` (distinct entries).
    pub fn new(a: Matrix, c: Vec<Elem>, planted: Option<Permutation>) -> Result<Self> {
        let field = a.field();
        let (m, n) = (a.rows(), a.cols());
        if m == 0 || m >= n {
            return Err(PkpError::InvalidParams(format!("need 1 <= m < n, got m={m}, n={n}")));
        }
        if c.len() != n {
            return Err(PkpError::DimensionMismatch(format!(
                "c has {} entries, expected {n}",
                c.len()
            )));
        }
        if c.iter().any(|&x| x >= field.modulus()) {
            return Err(PkpError::InvalidParams("entry of c not reduced mod q".into()));
        }
        let mut sorted = c.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PkpError::InvalidParams("entries of c are not pairwise distinct".into()));
        }
        if a.rank() != m {
            return Err(PkpError::InvalidParams("A does not have full row rank".into()));
        }
        if let Some(p) = &planted {
            if p.len() != n {
                return Err(PkpError::DimensionMismatch("planted permutation length".into()));
            }
        }
        Ok(Self { field, a, c, planted })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }
    pub fn n(&self) -> usize {
        self.a.cols()
    }
    pub fn m(&self) -> usize {
        self.a.rows()
    }
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn c(&self) -> &[Elem] {
        &self.c
    }
    pub fn planted(&self) -> Option<&Permutation> {
        self.planted.as_ref()
    }

    pub fn without_planted(&self) -> Self {
        Self {
            planted: None,
            ..self.clone()
        }
    }

    pub fn hardness_warning(&self) -> Option<HardnessWarning> {
        let l = log2_expected_solutions(self.field.modulus() as u64, self.n(), self.m());
        (l >= 0.0).then_some(HardnessWarning {
            log2_expected_solutions: l,
        })
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        writeln!(s, "PKP {} {} {}", self.field.modulus(), self.n(), self.m()).unwrap();
        for r in 0..self.m() {
            writeln!(s, "{}", join(&mut self.a.row(r).iter().map(|x| x.to_string()))).unwrap();
        }
        writeln!(s, "{}", join(&mut self.c.iter().map(|x| x.to_string()))).unwrap();
        if let Some(p) = &self.planted {
            writeln!(
                s,
                "SOLUTION {}",
                join(&mut p.to_one_based().iter().map(|x| x.to_string()))
            )
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, msg: &str| PkpError::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let nums = |line: usize, s: &str| -> Result<Vec<u64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| parse_err(line, &format!("bad integer {t:?}")))
                })
                .collect()
        };

        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("PKP") {
            return Err(parse_err(hl, "expected header `PKP q n m`"));
        }
        let head = nums(hl, &toks.collect::<Vec<_>>().join(" "))?;
        let [q, n, m] = head[..] else {
            return Err(parse_err(hl, "expected header `PKP q n m`"));
        };
        let (n, m) = (n as usize, m as usize);
        let field = PrimeField::new(q)?;

        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(hl, "missing rows of A"))?;
            let row = nums(ln, l)?;
            if row.len() != n {
                return Err(parse_err(
                    ln,
                    &format!("row of A has {} entries, expected {n}", row.len()),
                ));
            }
            if row.iter().any(|&x| x >= q) {
                return Err(parse_err(ln, "entry of A not reduced mod q"));
            }
            rows.push(row);
        }
        let (cl, cline) = lines.next().ok_or_else(|| parse_err(hl, "missing vector c"))?;
        let c = nums(cl, cline)?;
        if c.len() != n {
            return Err(parse_err(cl, &format!("c has {} entries, expected {n}", c.len())));
        }
        if c.iter().any(|&x| x >= q) {
            return Err(parse_err(cl, "entry of c not reduced mod q"));
        }
        let planted = match lines.next() {
            None => None,
            Some((sl, sline)) => {
                let rest = sline
                    .strip_prefix("SOLUTION")
                    .ok_or_else(|| parse_err(sl, "expected `SOLUTION` line"))?;
                let idx: Vec<usize> = nums(sl, rest)?.into_iter().map(|x| x as usize).collect();
                if idx.len() != n {
                    return Err(parse_err(sl, "solution has the wrong length"));
                }
                Some(Permutation::from_one_based(&idx).map_err(|e| parse_err(sl, &e.to_string()))?)
            }
        };
        if let Some((extra, _)) = lines.next() {
            return Err(parse_err(extra, "trailing content"));
        }
        let a = Matrix::from_rows(field, &rows)?;
        let c = c.into_iter().map(|x| x as Elem).collect();
        Self::new(a, c, planted)
    }
}

/// Samples a planted instance: `A` uniform of full rank, `c~` a kernel vector
/// with distinct entries, `c = pi(c~)` for uniform `pi`, and the planted
/// solution `pi^{-1}` recorded.
pub fn generate_instance<R: Rng + ?Sized>(field: PrimeField, n: usize, m: usize, rng: &mut R) -> Result<PkpInstance> {
    if m == 0 || m >= n {
        return Err(PkpError::InvalidParams(format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    if (field.modulus() as usize) < n {
        return Err(PkpError::InvalidParams(format!(
            "q = {} < n = {n}: no vector with distinct entries exists",
            field.modulus()
        )));
    }
    let a = Matrix::random_full_rank(field, m, n, rng)?;
    let kernel = a.kernel_basis();
    let mut attempts = 0;
    let c_tilde = loop {
        if attempts == KERNEL_RESAMPLE_LIMIT {
            return Err(PkpError::ResampleLimit(attempts));
        }
        attempts += 1;
        let coeffs: Vec<Elem> = (0..kernel.rows()).map(|_| field.random(rng)).collect();
        let v = kernel.left_mul(&coeffs);
        if all_distinct(&v) {
            break v;
        }
    };
    let pi = Permutation::random(n, rng);
    let c = pi.apply(&c_tilde);
    let inst = PkpInstance::new(a, c, Some(pi.inverse()))?;
    if let Some(w) = inst.hardness_warning() {
        log::warn!("{w}");
    }
    Ok(inst)
}

fn all_distinct(v: &[Elem]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

/// `H = (A ; 1 .. 1)` with `s = (0, .., 0, sum c_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSystem {
    h: Matrix,
    s: Vec<Elem>,
}

impl ExtendedSystem {
    pub fn new(h: Matrix, s: Vec<Elem>) -> Result<Self> {
        if s.len() != h.rows() {
            return Err(PkpError::DimensionMismatch("syndrome length != rows of H".into()));
        }
        if h.rank() != h.rows() {
            return Err(PkpError::RankDeficient);
        }
        Ok(Self { h, s })
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }
    pub fn s(&self) -> &[Elem] {
        &self.s
    }
    pub fn r(&self) -> usize {
        self.h.rows()
    }
    pub fn n(&self) -> usize {
        self.h.cols()
    }
    pub fn field(&self) -> PrimeField {
        self.h.field()
    }
}

pub fn extend(instance: &PkpInstance) -> Result<ExtendedSystem> {
    let f = instance.field();
    let n = instance.n();
    let ones = Matrix::from_vec(f, 1, n, vec![1; n])?;
    let h = instance.a().vstack(&ones)?;
    let mut s = vec![0; instance.m()];
    s.push(instance.c().iter().fold(0, |acc, &x| f.add(acc, x)));
    ExtendedSystem::new(h, s)
}

/// Cached `RREF(H, complement(J))` for repeated reconstruction from the
/// entries of `c~` on `J`.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    field: PrimeField,
    free: Vec<usize>,
    pivots: Vec<usize>,
    /// `coeff[u][j]`: coefficient of `c~_{free[j]}` in the pivot `u` equation.
    coeff: Vec<Vec<Elem>>,
    s_tilde: Vec<Elem>,
    n: usize,
}

impl Reconstructor {
    /// `free` is the index set `J` (size `n - r`); its complement must give a
    /// nonsingular block of `H`.
    pub fn new(ext: &ExtendedSystem, free: &[usize]) -> Result<Self> {
        let (n, r) = (ext.n(), ext.r());
        if free.len() + r != n {
            return Err(PkpError::DimensionMismatch(format!(
                "|J| = {} but n - r = {}",
                free.len(),
                n - r
            )));
        }
        let mut in_j = vec![false; n];
        for &j in free {
            if j >= n || std::mem::replace(&mut in_j[j], true) {
                return Err(PkpError::InvalidParams("J has repeated or out-of-range indices".into()));
            }
        }
        let pivots: Vec<usize> = (0..n).filter(|&i| !in_j[i]).collect();
        let aug = ext.h().with_column(ext.s());
        let red = aug.rref(&pivots).ok_or(PkpError::Singular)?;
        let coeff = (0..r).map(|u| free.iter().map(|&j| red.get(u, j)).collect()).collect();
        let s_tilde = (0..r).map(|u| red.get(u, n)).collect();
        Ok(Self {
            field: ext.field(),
            free: free.to_vec(),
            pivots,
            coeff,
            s_tilde,
            n,
        })
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Writes the full `c~` into `out`, given `partial[j] = c~_{J[j]}`.
    pub fn fill(&self, partial: &[Elem], out: &mut [Elem]) {
        debug_assert_eq!(partial.len(), self.free.len());
        debug_assert_eq!(out.len(), self.n);
        let f = self.field;
        let q = f.modulus() as u64;
        for (&j, &v) in self.free.iter().zip(partial) {
            out[j] = v;
        }
        for (u, &p) in self.pivots.iter().enumerate() {
            let dot = self.coeff[u]
                .iter()
                .zip(partial)
                .fold(0u64, |acc, (&h, &x)| (acc + h as u64 * x as u64) % q);
            out[p] = f.sub(self.s_tilde[u], dot as Elem);
        }
    }

    pub fn reconstruct(&self, partial: &[Elem]) -> Vec<Elem> {
        let mut out = vec![0; self.n];
        self.fill(partial, &mut out);
        out
    }
}

/// The unique `c~` agreeing with `partial` on `J` and with syndrome `s`.
pub fn reconstruct(ext: &ExtendedSystem, free: &[usize], partial: &[Elem]) -> Result<Vec<Elem>> {
    if partial.len() != free.len() {
        return Err(PkpError::DimensionMismatch("partial and J differ in length".into()));
    }
    Ok(Reconstructor::new(ext, free)?.reconstruct(partial))
}

/// Value-to-position lookup for `c`, used to turn a rearrangement of `c`
/// back into the permutation producing it.
#[derive(Debug, Clone)]
pub struct ValueIndex {
    pos: HashMap<Elem, usize>,
}

impl ValueIndex {
    pub fn new(c: &[Elem]) -> Self {
        Self {
            pos: c.iter().enumerate().map(|(i, &v)| (v, i)).collect(),
        }
    }

    /// `Some(pi)` with `pi(c) = v` iff `v` is a rearrangement of `c`.
    pub fn permutation_of(&self, v: &[Elem]) -> Option<Permutation> {
        if v.len() != self.pos.len() {
            return None;
        }
        let mut seen = vec![false; v.len()];
        let mut map = Vec::with_capacity(v.len());
        for x in v {
            let &i = self.pos.get(x)?;
            if std::mem::replace(&mut seen[i], true) {
                return None;
            }
            map.push(i);
        }
        Some(Permutation { map })
    }
}

/// True iff `pi(c) A^T = 0`.
pub fn verify(instance: &PkpInstance, candidate: &Permutation) -> Result<bool> {
    if candidate.len() != instance.n() {
        return Err(PkpError::DimensionMismatch(format!(
            "permutation of length {} for n = {}",
            candidate.len(),
            instance.n()
        )));
    }
    let v = candidate.apply(instance.c());
    Ok(instance.a().syndrome(&v).iter().all(|&x| x == 0))
}

pub const BRUTE_FORCE_DEFAULT_CAP: usize = 10;

/// Every permutation solving the instance, in lexicographic order.
pub fn brute_force_solve(instance: &PkpInstance, cap: usize) -> Result<Vec<Permutation>> {
    let n = instance.n();
    if n > cap {
        return Err(PkpError::InvalidParams(format!(
            "brute force limited to n <= {cap}, got n = {n}"
        )));
    }
    let f = instance.field();
    let m = instance.m();
    // columns of A, so adding c_j at position i adds c_j * A[:, i]
    let cols: Vec<Vec<Elem>> = (0..n).map(|i| instance.a().column(i)).collect();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut map = Vec::with_capacity(n);
    let mut acc = vec![vec![0; m]; n + 1];

    fn dfs(
        pos: usize,
        f: PrimeField,
        c: &[Elem],
        cols: &[Vec<Elem>],
        used: &mut [bool],
        map: &mut Vec<usize>,
        acc: &mut [Vec<Elem>],
        out: &mut Vec<Permutation>,
    ) {
        let n = c.len();
        if pos == n {
            if acc[n].iter().all(|&x| x == 0) {
                out.push(Permutation { map: map.clone() });
            }
            return;
        }
        for j in 0..n {
            if used[j] {
                continue;
            }
            used[j] = true;
            map.push(j);
            let (head, tail) = acc.split_at_mut(pos + 1);
            for ((t, &h), &a) in tail[0].iter_mut().zip(&head[pos]).zip(&cols[pos]) {
                *t = f.mul_add(h, c[j], a);
            }
            dfs(pos + 1, f, c, cols, used, map, acc, out);
            map.pop();
            used[j] = false;
        }
    }

    dfs(0, f, instance.c(), &cols, &mut used, &mut map, &mut acc, &mut out);
    Ok(out)
}

/// The set of length-`len` sequences of distinct entries of `source`,
/// walked lazily in lexicographic order of index tuples.
#[derive(Debug, Clone, Copy)]
pub struct SampleSet<'a> {
    source: &'a [Elem],
    len: usize,
}

impl<'a> SampleSet<'a> {
    pub fn new(source: &'a [Elem], len: usize) -> Self {
        assert!(len <= source.len(), "sample length exceeds source length");
        Self { source, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// `n! / (n - len)!`, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        let n = self.source.len() as u128;
        (0..self.len as u128).fold(1u128, |acc, i| acc.saturating_mul(n - i))
    }

    pub fn iter(&self) -> SampleIter<'a> {
        SampleIter {
            source: self.source,
            idx: Vec::new(),
            used: vec![false; self.source.len()],
            len: self.len,
            started: false,
            done: false,
        }
    }

    /// Depth-first walk over index tuples. `visit(depth, index)` is called
    /// when position `depth` takes `source[index]`; `leaf()` fires on every
    /// complete tuple. Used by list builders that update tags incrementally.
    pub fn walk<V, L>(&self, mut visit: V, mut leaf: L)
    where
        V: FnMut(usize, usize),
        L: FnMut(),
    {
        let n = self.source.len();
        let mut used = vec![false; n];
        fn rec<V: FnMut(usize, usize), L: FnMut()>(
            depth: usize,
            len: usize,
            used: &mut [bool],
            visit: &mut V,
            leaf: &mut L,
        ) {
            if depth == len {
                leaf();
                return;
            }
            for i in 0..used.len() {
                if used[i] {
                    continue;
                }
                used[i] = true;
                visit(depth, i);
                rec(depth + 1, len, used, visit, leaf);
                used[i] = false;
            }
        }
        rec(0, self.len, &mut used, &mut visit, &mut leaf);
    }
}

pub struct SampleIter<'a> {
    source: &'a [Elem],
    idx: Vec<usize>,
    used: Vec<bool>,
    len: usize,
    started: bool,
    done: bool,
}

impl SampleIter<'_> {
    fn first_free(&self, from: usize) -> Option<usize> {
        (from..self.source.len()).find(|&i| !self.used[i])
    }

    fn fill_from(&mut self, depth: usize) -> bool {
        for _ in depth..self.len {
            let Some(i) = self.first_free(0) else { return false };
            self.used[i] = true;
            self.idx.push(i);
        }
        true
    }
}

impl Iterator for SampleIter<'_> {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.fill_from(0) {
                self.done = true;
                return None;
            }
        } else {
            // advance the rightmost position that can move, refill the rest
            loop {
                let Some(last) = self.idx.pop() else {
                    self.done = true;
                    return None;
                };
                self.used[last] = false;
                if let Some(nxt) = self.first_free(last + 1) {
                    self.used[nxt] = true;
                    self.idx.push(nxt);
                    let depth = self.idx.len();
                    if self.fill_from(depth) {
                        break;
                    }
                }
            }
        }
        Some(self.idx.iter().map(|&i| self.source[i]).collect())
    }
}
