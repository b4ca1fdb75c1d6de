//! Slab decomposition of the sweep axis and the PML-padded ranges of the auxiliary subproblems.
//!
//! Sweep-axis indices are 1-based grid indices (`1..=n`); index `0` and `n + 1` are the Dirichlet
//! faces. Slabs are numbered from `0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pml::{PmlProfile, PmlStrength, Ramp};

/// Which auxiliary subproblem: `Middle` carries the slab's own force with PML on both sides,
/// `Right` transmits a left trace rightwards, `Left` transmits a right trace leftwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Middle,
    Right,
    Left,
}

/// How one end of an extended range is closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pad {
    /// The global PML already lies inside the slab; the range stops at the grid face.
    Global,
    /// An auxiliary PML of `gamma_aux - 1` extra layers, Dirichlet beyond it.
    Auxiliary,
    /// No padding; the neighbouring layer holds the transmitted trace.
    Trace,
}

/// Sweep-axis range of one auxiliary subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendedRange {
    pub kind: Kind,
    pub slab: usize,
    /// First unknown layer (inclusive).
    pub first: usize,
    /// Last unknown layer (inclusive).
    pub last: usize,
    pub left: Pad,
    pub right: Pad,
    /// Layer holding the Dirichlet trace: `first - 1` for `Right`, `last + 1` for `Left`.
    pub trace: Option<usize>,
}

impl ExtendedRange {
    pub fn layers(&self) -> usize {
        self.last - self.first + 1
    }

    /// Sweep-axis damping profile on `[(first-1) h, (last+1) h]`.
    pub fn profile(&self, partition: &LayerPartition, strength: PmlStrength) -> Result<PmlProfile> {
        let h = partition.h();
        let (lo, hi) = partition.slab(self.slab);
        let global_eta = partition.gamma as f64 * h;
        let aux_eta = partition.gamma_aux as f64 * h;
        let left = match self.left {
            Pad::Global => Some(Ramp { zero: global_eta, width: global_eta, strength: strength.boundary }),
            Pad::Auxiliary => Some(Ramp { zero: lo as f64 * h, width: aux_eta, strength: strength.auxiliary }),
            Pad::Trace => None,
        };
        let right = match self.right {
            Pad::Global => Some(Ramp { zero: 1.0 - global_eta, width: global_eta, strength: strength.boundary }),
            Pad::Auxiliary => Some(Ramp { zero: hi as f64 * h, width: aux_eta, strength: strength.auxiliary }),
            Pad::Trace => None,
        };
        let domain = ((self.first - 1) as f64 * h, (self.last + 1) as f64 * h);
        PmlProfile::new(domain, left, right)
    }
}

/// Decomposition of `1..=n` into `m` contiguous slabs.
///
/// Slab 0 holds the `gamma - 1` left PML layers plus `b` layers, interior slabs hold `b` layers and
/// the last slab holds the right PML layers plus whatever remains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerPartition {
    n: usize,
    gamma: usize,
    gamma_aux: usize,
    b: usize,
    slabs: Vec<(usize, usize)>,
}

/// Partition with auxiliary PML as thick as the boundary PML.
pub fn partition_layers(n: usize, gamma: usize, b: usize) -> Result<LayerPartition> {
    LayerPartition::new(n, gamma, gamma, b)
}

impl LayerPartition {
    pub fn new(n: usize, gamma: usize, gamma_aux: usize, b: usize) -> Result<Self> {
        if gamma < 2 {
            return Err(Error::Config(format!("gamma must be at least 2, got {gamma}")));
        }
        if !(2..=gamma).contains(&gamma_aux) {
            return Err(Error::Config(format!(
                "gamma_aux must lie in 2..={gamma}, got {gamma_aux}"
            )));
        }
        if b == 0 {
            return Err(Error::Config("slab width b must be positive".into()));
        }
        let pml_layers = 2 * (gamma - 1);
        if n <= pml_layers {
            return Err(Error::Config(format!(
                "n = {n} leaves no undamped layer between two PMLs of {gamma} points"
            )));
        }
        let free = n - pml_layers;
        let m = free.div_ceil(b);
        let slabs = if m == 1 {
            vec![(1, n)]
        } else {
            let mut slabs = Vec::with_capacity(m);
            slabs.push((1, gamma + b - 1));
            for p in 1..m - 1 {
                slabs.push((gamma + p * b, gamma + (p + 1) * b - 1));
            }
            slabs.push((gamma + (m - 1) * b, n));
            slabs
        };
        Ok(Self { n, gamma, gamma_aux, b, slabs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn gamma_aux(&self) -> usize {
        self.gamma_aux
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    /// Number of slabs `m`.
    pub fn m(&self) -> usize {
        self.slabs.len()
    }

    /// Inclusive sweep-index range of slab `p`.
    pub fn slab(&self, p: usize) -> (usize, usize) {
        self.slabs[p]
    }

    pub fn slabs(&self) -> &[(usize, usize)] {
        &self.slabs
    }

    pub fn slab_layers(&self, p: usize) -> usize {
        let (lo, hi) = self.slabs[p];
        hi - lo + 1
    }

    /// Number of auxiliary subproblems, `3m - 2`.
    pub fn subproblem_count(&self) -> usize {
        3 * self.m() - 2
    }

    /// Extended range of subproblem `kind` on slab `p`.
    pub fn extended(&self, p: usize, kind: Kind) -> Result<ExtendedRange> {
        let m = self.m();
        if p >= m {
            return Err(Error::Domain(format!("slab {p} out of range, m = {m}")));
        }
        match kind {
            Kind::Right if p == 0 => {
                return Err(Error::Domain("no right-transmission subproblem on the first slab".into()))
            }
            Kind::Left if p == m - 1 => {
                return Err(Error::Domain("no left-transmission subproblem on the last slab".into()))
            }
            _ => {}
        }
        let (lo, hi) = self.slabs[p];
        let pad = self.gamma_aux - 1;
        let (first, left, left_trace) = if kind == Kind::Right {
            (lo, Pad::Trace, Some(lo - 1))
        } else if p == 0 {
            (lo, Pad::Global, None)
        } else {
            (lo - pad, Pad::Auxiliary, None)
        };
        let (last, right, right_trace) = if kind == Kind::Left {
            (hi, Pad::Trace, Some(hi + 1))
        } else if p == m - 1 {
            (hi, Pad::Global, None)
        } else {
            (hi + pad, Pad::Auxiliary, None)
        };
        Ok(ExtendedRange {
            kind,
            slab: p,
            first,
            last,
            left,
            right,
            trace: left_trace.or(right_trace),
        })
    }

    /// All `3m - 2` extended ranges: middles, then right transmissions, then left transmissions.
    pub fn all_extended(&self) -> Vec<ExtendedRange> {
        let m = self.m();
        let mut out = Vec::with_capacity(self.subproblem_count());
        out.extend((0..m).map(|p| self.extended(p, Kind::Middle).unwrap()));
        out.extend((1..m).map(|p| self.extended(p, Kind::Right).unwrap()));
        out.extend((0..m - 1).map(|p| self.extended(p, Kind::Left).unwrap()));
        out
    }
}
