//! Dense matrices over GF(q) and the eliminations the attacks are built on.

use crate::error::{PkpError, Result};
use crate::field::{Elem, PrimeField};
use rand::Rng;
use std::fmt;

/// Row-major dense matrix over a prime field.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Matrix {}x{} over GF({})",
            self.rows,
            self.cols,
            self.field.modulus()
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from a flat row-major buffer, reducing every entry.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PkpError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            field,
            rows,
            cols,
            data: data.into_iter().map(|v| field.elem(v)).collect(),
        })
    }

    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(PkpError::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(field, rows.len(), cols, data)
    }

    /// A single-row matrix holding `v`.
    pub fn row_vector(field: PrimeField, v: &[Elem]) -> Self {
        Self {
            field,
            rows: 1,
            cols: v.len(),
            data: v.iter().map(|&x| field.elem(x as u64)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            field,
            rows,
            cols,
            data: (0..rows * cols).map(|_| field.random(rng)).collect(),
        }
    }

    /// Uniform sample from full-rank `rows x cols` matrices, by rejection.
    pub fn random_full_rank<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        if rows > cols {
            return Err(PkpError::DimensionMismatch(format!(
                "full row rank needs rows <= cols, got {rows}x{cols}"
            )));
        }
        loop {
            let m = Self::random(field, rows, cols, rng);
            if m.rank() == rows {
                return Ok(m);
            }
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Elem] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
    pub fn as_slice(&self) -> &[Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(PkpError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let q = f.modulus() as u64;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    *slot = (*slot + a * b as u64) % q;
                }
            }
            for (c, &v) in acc.iter().enumerate() {
                out.set(r, c, v as Elem);
            }
        }
        Ok(out)
    }

    /// `x * self^T`, the syndrome of a row vector.
    pub fn syndrome(&self, x: &[Elem]) -> Vec<Elem> {
        assert_eq!(x.len(), self.cols, "syndrome length mismatch");
        (0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect()
    }

    /// `x * self` for a row vector of length `rows`.
    pub fn left_mul(&self, x: &[Elem]) -> Vec<Elem> {
        assert_eq!(x.len(), self.rows, "left_mul length mismatch");
        let f = self.field;
        let mut out = vec![0; self.cols];
        for (r, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(r)) {
                *o = f.mul_add(*o, a, b);
            }
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(PkpError::DimensionMismatch("vstack column mismatch".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Appends `v` as an extra column.
    pub fn with_column(&self, v: &[Elem]) -> Matrix {
        assert_eq!(v.len(), self.rows);
        let mut m = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            m.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            m.set(r, self.cols, v[r]);
        }
        m
    }

    /// Column permutation: column `i` of the result is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.cols);
        self.select_columns(perm)
    }

    /// Indices of columns holding at least one nonzero entry.
    pub fn support(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&c| (0..self.rows).any(|r| self.get(r, c) != 0))
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (top, bottom) = self.data.split_at_mut(hi * self.cols);
        top[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut bottom[..self.cols]);
    }

    fn scale_row(&mut self, r: usize, s: Elem) {
        let f = self.field;
        for x in self.row_mut(r) {
            *x = f.mul(*x, s);
        }
    }

    /// `row[dst] -= factor * row[src]`
    fn eliminate_row(&mut self, dst: usize, src: usize, factor: Elem) {
        if factor == 0 {
            return;
        }
        let f = self.field;
        let q = f.modulus() as u64;
        let neg = (q - factor as u64) % q;
        let cols = self.cols;
        let (s, d) = if src < dst {
            let (a, b) = self.data.split_at_mut(dst * cols);
            (&a[src * cols..(src + 1) * cols], &mut b[..cols])
        } else {
            let (a, b) = self.data.split_at_mut(src * cols);
            (&b[..cols], &mut a[dst * cols..(dst + 1) * cols])
        };
        for (x, &y) in d.iter_mut().zip(s) {
            *x = ((*x as u64 + neg * y as u64) % q) as Elem;
        }
    }

    /// `A_J^{-1} A`: the columns listed in `cols` become the identity, in
    /// that order. Returns `None` when `A_J` is singular.
    ///
    /// Pivots are taken column by column in the order of `cols`, using the
    /// first nonzero row at or below the current pivot row.
    pub fn rref(&self, cols: &[usize]) -> Option<Matrix> {
        assert_eq!(cols.len(), self.rows, "rref needs |J| = rows");
        assert!(cols.iter().all(|&c| c < self.cols), "rref column out of range");
        let f = self.field;
        let mut m = self.clone();
        for (p, &c) in cols.iter().enumerate() {
            let pivot = (p..m.rows).find(|&r| m.get(r, c) != 0)?;
            m.swap_rows(p, pivot);
            let inv = f.inv(m.get(p, c)).expect("nonzero pivot");
            m.scale_row(p, inv);
            for r in 0..m.rows {
                if r != p {
                    let factor = m.get(r, c);
                    m.eliminate_row(r, p, factor);
                }
            }
        }
        Some(m)
    }

    /// Fully reduced row echelon form, scanning columns left to right.
    /// Returns the reduced matrix (zero rows at the bottom) and its pivot columns.
    pub fn echelon(&self) -> (Matrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = f.inv(m.get(row, c)).expect("nonzero pivot");
            m.scale_row(row, inv);
            for r in 0..m.rows {
                if r != row {
                    let factor = m.get(r, c);
                    m.eliminate_row(r, row, factor);
                }
            }
            pivots.push(c);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.set(r, n + r, 1);
        }
        let reduced = aug.rref(&(0..n).collect::<Vec<_>>())?;
        Some(reduced.select_columns(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Basis of the right kernel `{x : self * x^T = 0}`, one vector per row.
    pub fn kernel_basis(&self) -> Matrix {
        let f = self.field;
        let (red, pivots) = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            basis.set(i, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                basis.set(i, pc, f.neg(red.get(pr, fc)));
            }
        }
        basis
    }

    /// Finds `S` with `target = S * basis`. `basis` must have full row rank.
    pub fn solve_row_combination(target: &Matrix, basis: &Matrix) -> Result<Matrix> {
        if target.cols != basis.cols {
            return Err(PkpError::DimensionMismatch("target and basis differ in width".into()));
        }
        let (_, pivots) = basis.echelon();
        if pivots.len() != basis.rows {
            return Err(PkpError::InvalidParams("basis is not of full row rank".into()));
        }
        let block_inv = basis.select_columns(&pivots).inverse().ok_or(PkpError::Singular)?;
        let s = target.select_columns(&pivots).mul(&block_inv)?;
        if s.mul(basis)? != *target {
            return Err(PkpError::NotInRowSpace);
        }
        Ok(s)
    }
}
