//! Row-compressed complex operators on structured boxes.

use num_complex::Complex64;

use crate::error::{check_len, Result};
use crate::grid::box_len;

/// How the rows of an operator are ordered relative to its box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// First axis fastest, sweep axis slowest.
    ColumnMajor,
    /// Sweep axis fastest, then the transverse axes in column-major order.
    SweepFastest,
}

/// Square complex sparse matrix in CSR form, tagged with the grid box it discretizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    extents: [usize; 3],
    dim: usize,
    ordering: Ordering,
    /// Product of the per-axis stretches `s_i` at each row's grid point.
    stretch: Vec<Complex64>,
}

impl SparseOperator {
    /// Build from per-row sorted column/value lists.
    pub(crate) fn from_rows(
        rows: Vec<(Vec<usize>, Vec<Complex64>)>,
        extents: [usize; 3],
        dim: usize,
        stretch: Vec<Complex64>,
    ) -> Self {
        let nnz = rows.iter().map(|r| r.0.len()).sum();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (c, v) in rows {
            cols.extend(c);
            vals.extend(v);
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals, extents, dim, ordering: Ordering::ColumnMajor, stretch }
    }

    pub(crate) fn from_csr(
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<Complex64>,
        extents: [usize; 3],
        dim: usize,
        stretch: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), box_len(extents) + 1);
        Self { row_ptr, cols, vals, extents, dim, ordering: Ordering::ColumnMajor, stretch }
    }

    /// Operator from dense rows, for tests and small examples.
    pub fn from_dense(a: &[Vec<Complex64>]) -> Self {
        let n = a.len();
        let rows = a
            .iter()
            .map(|row| {
                let mut c = Vec::new();
                let mut v = Vec::new();
                for (j, &x) in row.iter().enumerate() {
                    if x != Complex64::new(0.0, 0.0) {
                        c.push(j);
                        v.push(x);
                    }
                }
                (c, v)
            })
            .collect();
        Self::from_rows(rows, [n, 1, 1], 1, vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn stretch(&self) -> &[Complex64] {
        &self.stretch
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[Complex64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn mul_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.nrows());
        assert_eq!(y.len(), self.nrows());
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&j, &a) in c.iter().zip(v) {
                acc += a * x[j];
            }
            *yi = acc;
        }
    }

    pub fn mul(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.nrows(), x.len())?;
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.mul_into(x, &mut y);
        Ok(y)
    }

    /// Half bandwidths `(lower, upper)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows() {
            let (c, _) = self.row(i);
            if let (Some(&first), Some(&last)) = (c.first(), c.last()) {
                kl = kl.max(i.saturating_sub(first));
                ku = ku.max(last.saturating_sub(i));
            }
        }
        (kl, ku)
    }

    /// `(i, j)` stored iff `(j, i)` stored.
    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.nrows()).all(|i| {
            let (c, _) = self.row(i);
            c.iter().all(|&j| self.row(j).0.binary_search(&i).is_ok())
        })
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.nrows() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).norm());
            }
        }
        worst / scale
    }

    /// Symmetric permutation `P A P^T`, where row `new` of the result is row `perm[new]` of `self`.
    pub fn permuted(&self, perm: &Permutation, ordering: Ordering) -> Self {
        let n = self.nrows();
        let inv = perm.inverse();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        let mut stretch = Vec::with_capacity(n);
        row_ptr.push(0);
        let mut entries: Vec<(usize, Complex64)> = Vec::new();
        for new in 0..n {
            let old = perm.old_of(new);
            let (c, v) = self.row(old);
            entries.clear();
            entries.extend(c.iter().zip(v).map(|(&j, &a)| (inv[j], a)));
            entries.sort_unstable_by_key(|e| e.0);
            for &(j, a) in &entries {
                cols.push(j);
                vals.push(a);
            }
            row_ptr.push(cols.len());
            stretch.push(self.stretch[old]);
        }
        Self { row_ptr, cols, vals, extents: self.extents, dim: self.dim, ordering, stretch }
    }

    /// Row scaling `diag(d) A`.
    pub(crate) fn row_scaled(&self, d: &[Complex64]) -> Self {
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for v in &mut out.vals[self.row_ptr[i]..self.row_ptr[i + 1]] {
                *v *= di;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.nrows();
        let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] = x;
            }
        }
        a
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows())
            .map(|i| self.row(i).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Bijection on `0..n`; `old_of(new)` names the original index placed at position `new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    new_to_old: Vec<usize>,
}

impl Permutation {
    pub fn new(new_to_old: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; new_to_old.len()];
        for &o in &new_to_old {
            if o >= seen.len() || std::mem::replace(&mut seen[o], true) {
                return None;
            }
        }
        Some(Self { new_to_old })
    }

    pub fn identity(n: usize) -> Self {
        Self { new_to_old: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }

    #[inline]
    pub fn old_of(&self, new: usize) -> usize {
        self.new_to_old[new]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.new_to_old
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.len()];
        for (new, &old) in self.new_to_old.iter().enumerate() {
            inv[old] = new;
        }
        inv
    }

    /// `y[new] = x[old_of(new)]`.
    pub fn gather<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.new_to_old.iter().map(|&o| x[o]).collect()
    }

    /// Inverse of [`Permutation::gather`].
    pub fn scatter<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        let mut x = vec![T::default(); y.len()];
        for (new, &old) in self.new_to_old.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Linear map on complex vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = Op x`. Panics if lengths differ from [`LinearOperator::dim`].
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.mul_into(x, y)
    }
}

/// The identity map on `n` unknowns.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.copy_from_slice(x);
    }
}

/// Adapter turning a closure into a [`LinearOperator`].
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[Complex64], &mut [Complex64])> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[Complex64], &mut [Complex64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        (self.f)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn permutation_round_trip() {
        let p = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        let x = [10, 11, 12, 13];
        assert_eq!(p.scatter(&p.gather(&x)), x.to_vec());
        assert!(Permutation::new(vec![0, 0]).is_none());
        assert!(Permutation::new(vec![0, 2]).is_none());
    }

    #[test]
    fn permuted_matches_dense() {
        let a = SparseOperator::from_dense(&[
            vec![c(1.0), c(2.0), c(0.0)],
            vec![c(3.0), c(4.0), c(5.0)],
            vec![c(0.0), c(6.0), c(7.0)],
        ]);
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let b = a.permuted(&p, Ordering::ColumnMajor);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.get(i, j), a.get(p.old_of(i), p.old_of(j)));
            }
        }
        assert_eq!(a.bandwidths(), (1, 1));
        assert!(a.is_structurally_symmetric());
        assert_eq!(a.norm_inf(), 13.0);
    }
}
