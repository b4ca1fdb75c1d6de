//! Dense complex LU with partial pivoting, kept deliberately plain: it serves as the reference
//! the sparse factorizations are checked against.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::sparse::SparseOperator;

/// Largest operator the dense oracle accepts.
pub const DENSE_ORACLE_LIMIT: usize = 4000;

/// Column-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_sparse(op: &SparseOperator) -> Self {
        let n = op.nrows();
        let mut m = Self::zeros(n);
        for i in 0..n {
            let (c, v) = op.row(i);
            for (&j, &x) in c.iter().zip(v) {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let xj = x[j];
            for (yi, a) in y.iter_mut().zip(&self.data[j * self.n..(j + 1) * self.n]) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn lu(mut self) -> Result<DenseLu> {
        let n = self.n;
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, self[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return Err(Error::Singular { step: k });
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    self.data.swap(j * n + k, j * n + p);
                }
            }
            let inv = self[(k, k)].inv();
            for i in k + 1..n {
                self[(i, k)] *= inv;
            }
            for j in k + 1..n {
                let u = self[(k, j)];
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (left, right) = self.data.split_at_mut(j * n);
                let lcol = &left[k * n..k * n + n];
                for (x, l) in right[k + 1..n].iter_mut().zip(&lcol[k + 1..n]) {
                    *x -= l * u;
                }
            }
        }
        Ok(DenseLu { lu: self, piv })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.clone().lu()?.solve(b)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.n + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.n + i]
    }
}

/// `P A = L U` stored in place.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl DenseLu {
    /// Complex logarithm of the determinant (branch fixed by summing pivot logarithms).
    pub fn log_det(&self) -> Complex64 {
        let swaps = self.piv.iter().enumerate().filter(|(k, &p)| *k != p).count();
        let sign = Complex64::new(0.0, std::f64::consts::PI * (swaps % 2) as f64);
        (0..self.lu.n).map(|k| self.lu[(k, k)].ln()).sum::<Complex64>() + sign
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.lu.n;
        check_len(n, b.len())?;
        let mut x = b.to_vec();
        for (k, &p) in self.piv.iter().enumerate() {
            x.swap(k, p);
        }
        for k in 0..n {
            let xk = x[k];
            for i in k + 1..n {
                x[i] -= self.lu[(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.lu[(k, k)];
            let xk = x[k];
            for i in 0..k {
                x[i] -= self.lu[(i, k)] * xk;
            }
        }
        Ok(x)
    }
}

/// Solve `op v = g` densely. Refuses operators above [`DENSE_ORACLE_LIMIT`] unknowns.
pub fn dense_solve_oracle(op: &SparseOperator, g: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = op.nrows();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge { extent: n, limit: DENSE_ORACLE_LIMIT });
    }
    check_len(n, g.len())?;
    DenseMatrix::from_sparse(op).solve(g)
}
