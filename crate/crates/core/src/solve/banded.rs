//! Banded LU with partial pivoting for quasi-1D slab operators.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` keeps rows `j - kl - ku ..= j + kl` with
//! `kl` extra rows on top for the fill created by row interchanges.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::grid::{box_len, linear_index};
use crate::sparse::{Ordering, Permutation, SparseOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reorder an operator so the sweep (last non-trivial) axis varies fastest. For a slab of `k`
/// layers the result has half bandwidth `k`.
pub fn reorder_quasi1d(op: &SparseOperator) -> (SparseOperator, Permutation) {
    let ext = op.extents();
    let sweep = op.dim() - 1;
    let k = ext[sweep];
    let t = box_len(ext) / k;
    let mut new_to_old = Vec::with_capacity(box_len(ext));
    for tr in 0..t {
        for layer in 0..k {
            let mut idx = [0; 3];
            let mut rest = tr;
            for (axis, slot) in idx.iter_mut().enumerate().take(sweep) {
                *slot = rest % ext[axis];
                rest /= ext[axis];
            }
            idx[sweep] = layer;
            new_to_old.push(linear_index(idx, ext));
        }
    }
    let perm = Permutation::new(new_to_old).expect("sweep-fastest reordering is a bijection");
    (op.permuted(&perm, Ordering::SweepFastest), perm)
}

#[derive(Clone, Debug)]
pub struct BandedFactorization {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandedFactorization {
    #[inline]
    fn ld(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    pub fn extent(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Stored complex entries.
    pub fn storage(&self) -> usize {
        self.ab.len()
    }

    /// Solve `H v = g` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        check_len(self.n, b.len())?;
        let (n, kl, ld) = (self.n, self.kl, self.ld());
        let kv = self.kl + self.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let lm = kl.min(n - 1 - j);
            let col = &self.ab[j * ld + kv + 1..j * ld + kv + 1 + lm];
            for (x, l) in b[j + 1..j + 1 + lm].iter_mut().zip(col) {
                *x -= l * bj;
            }
        }
        for j in (0..n).rev() {
            let base = j * ld;
            b[j] /= self.ab[base + kv];
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let top = j.saturating_sub(kv);
            let off = base + kv - (j - top);
            for (x, u) in b[top..j].iter_mut().zip(&self.ab[off..base + kv]) {
                *x -= u * bj;
            }
        }
        Ok(())
    }

    pub fn solve(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = g.to_vec();
        self.solve_in_place(&mut v)?;
        Ok(v)
    }

    /// `P^T L U x`, i.e. the operator reconstructed from its factors applied to `x`.
    pub fn apply_factors(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (n, kl, ld) = (self.n, self.kl, self.ld());
        let kv = self.kl + self.ku;
        let mut y = vec![ZERO; n];
        for j in 0..n {
            let top = j.saturating_sub(kv);
            for i in top..=j {
                y[i] += self.ab[j * ld + kv + i - j] * x[j];
            }
        }
        for j in (0..n).rev() {
            let lm = kl.min(n - 1 - j);
            let yj = y[j];
            for r in 1..=lm {
                y[j + r] += self.ab[j * ld + kv + r] * yj;
            }
            y.swap(j, self.ipiv[j]);
        }
        y
    }
}

/// Factor a banded operator; bandwidths are read off its sparsity.
pub fn factor_banded(op: &SparseOperator) -> Result<BandedFactorization> {
    let n = op.nrows();
    let (kl, ku) = op.bandwidths();
    let ld = 2 * kl + ku + 1;
    let kv = kl + ku;
    let mut ab = vec![ZERO; ld * n];
    for i in 0..n {
        let (c, v) = op.row(i);
        for (&j, &a) in c.iter().zip(v) {
            ab[j * ld + kv + i - j] = a;
        }
    }
    let mut ipiv = vec![0; n];
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = j * ld + kv;
        let mut jp = 0;
        let mut best = ab[col].norm_sqr();
        for r in 1..=km {
            let v = ab[col + r].norm_sqr();
            if v > best {
                best = v;
                jp = r;
            }
        }
        ipiv[j] = j + jp;
        if best == 0.0 {
            return Err(Error::Singular { step: j });
        }
        ju = ju.max((j + ku + jp).min(n - 1));
        if jp != 0 {
            for c in j..=ju {
                let base = c * ld + kv;
                ab.swap(base + j - c, base + j + jp - c);
            }
        }
        if km == 0 {
            continue;
        }
        let inv = ab[col].inv();
        for r in 1..=km {
            ab[col + r] *= inv;
        }
        let (head, tail) = ab.split_at_mut((j + 1) * ld);
        let lcol = &head[col + 1..col + 1 + km];
        for c in j + 1..=ju {
            let base = (c - j - 1) * ld + kv + j - c;
            let u = tail[base];
            if u == ZERO {
                continue;
            }
            for (x, l) in tail[base + 1..base + 1 + km].iter_mut().zip(lcol) {
                *x -= l * u;
            }
        }
    }
    Ok(BandedFactorization { n, kl, ku, ab, ipiv })
}
