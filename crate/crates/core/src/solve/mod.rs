//! Direct solvers for the auxiliary subproblems.

pub mod banded;
pub mod ordered;

use num_complex::Complex64;

use crate::error::Result;
use crate::sparse::{Permutation, SparseOperator};

pub use banded::{factor_banded, reorder_quasi1d, BandedFactorization};
pub use ordered::{factor_ordered, FillStats, FrontMode, OrderedFactorization};

/// Which direct method factors the subproblems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Sweep-fastest reordering and banded LU (1D and 2D).
    Banded,
    /// Nested-dissection multifrontal elimination.
    Ordered(FrontMode),
}

impl SolverKind {
    /// Banded for `dim <= 2`, multifrontal otherwise.
    pub fn default_for(dim: usize, symmetric: bool) -> Self {
        if dim <= 2 {
            SolverKind::Banded
        } else if symmetric {
            SolverKind::Ordered(FrontMode::Symmetric)
        } else {
            SolverKind::Ordered(FrontMode::Lu)
        }
    }
}

/// A factored operator in its original (column-major) ordering.
#[derive(Clone, Debug)]
pub enum Factorization {
    Banded { perm: Permutation, lu: BandedFactorization },
    Ordered(OrderedFactorization),
}

impl Factorization {
    pub fn new(op: &SparseOperator, kind: SolverKind) -> Result<Self> {
        Ok(match kind {
            SolverKind::Banded => {
                let (reordered, perm) = reorder_quasi1d(op);
                Factorization::Banded { lu: factor_banded(&reordered)?, perm }
            }
            SolverKind::Ordered(mode) => Factorization::Ordered(factor_ordered(op, mode)?),
        })
    }

    pub fn extent(&self) -> usize {
        match self {
            Factorization::Banded { lu, .. } => lu.extent(),
            Factorization::Ordered(f) => f.extent(),
        }
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        match self {
            Factorization::Banded { perm, lu } => {
                let mut x = perm.gather(b);
                lu.solve_in_place(&mut x)?;
                b.copy_from_slice(&perm.scatter(&x));
                Ok(())
            }
            Factorization::Ordered(f) => f.solve_in_place(b),
        }
    }

    pub fn solve(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = g.to_vec();
        self.solve_in_place(&mut v)?;
        Ok(v)
    }

    /// Stored complex factor entries.
    pub fn storage(&self) -> usize {
        match self {
            Factorization::Banded { lu, .. } => lu.storage(),
            Factorization::Ordered(f) => f.stats().factor_entries,
        }
    }
}
