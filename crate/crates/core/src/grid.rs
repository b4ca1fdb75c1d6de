//! Uniform grids on the unit cube and column-major indexing helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// PML flags for the two faces of one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmlSides {
    pub low: bool,
    pub high: bool,
}

impl PmlSides {
    pub const BOTH: PmlSides = PmlSides { low: true, high: true };
    pub const NONE: PmlSides = PmlSides { low: false, high: false };

    pub fn any(self) -> bool {
        self.low || self.high
    }
}

/// Grid on `(0,1)^dim` with `n` interior points per axis and spacing `h = 1/(n+1)`.
///
/// The last axis is the sweep axis and always carries PML on both faces.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    omega: f64,
    pml: [PmlSides; 3],
}

impl GridSpec {
    /// Grid with PML on every face.
    pub fn new(dim: usize, n: usize, omega: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n == 0 {
            return Err(Error::Config("grid needs at least one point per axis".into()));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Config(format!("angular frequency must be positive, got {omega}")));
        }
        let mut pml = [PmlSides::NONE; 3];
        for sides in pml.iter_mut().take(dim) {
            *sides = PmlSides::BOTH;
        }
        Ok(Self { dim, n, omega, pml })
    }

    /// Grid resolving the typical wavelength `1/freq` with `ppw` points: `n + 1 = ppw * freq`.
    pub fn from_ppw(dim: usize, freq: f64, ppw: f64) -> Result<Self> {
        let cells = (ppw * freq).round();
        if cells < 2.0 {
            return Err(Error::Config(format!(
                "ppw {ppw} at frequency {freq} gives fewer than one interior point"
            )));
        }
        Self::new(dim, cells as usize - 1, 2.0 * std::f64::consts::PI * freq)
    }

    /// Override the PML faces of a transverse axis.
    pub fn with_pml(mut self, axis: usize, sides: PmlSides) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::Config(format!("axis {axis} out of range for dimension {}", self.dim)));
        }
        if axis == self.sweep_axis() && sides != PmlSides::BOTH {
            return Err(Error::Config("the sweep axis must carry PML on both faces".into()));
        }
        self.pml[axis] = sides;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn pml(&self, axis: usize) -> PmlSides {
        self.pml[axis]
    }

    pub fn sweep_axis(&self) -> usize {
        self.dim - 1
    }

    /// Total number of unknowns `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of points in one sweep layer, `n^(dim-1)`.
    pub fn layer_len(&self) -> usize {
        self.n.pow(self.dim as u32 - 1)
    }

    /// Extents padded with ones for unused axes.
    pub fn extents(&self) -> [usize; 3] {
        let mut e = [1; 3];
        for x in e.iter_mut().take(self.dim) {
            *x = self.n;
        }
        e
    }

    /// Extents of a box covering every transverse point and `layers` sweep layers.
    pub fn slab_extents(&self, layers: usize) -> [usize; 3] {
        let mut e = self.extents();
        e[self.sweep_axis()] = layers;
        e
    }
}

/// Column-major linear index of `idx` in a box of extents `ext`.
#[inline]
pub fn linear_index(idx: [usize; 3], ext: [usize; 3]) -> usize {
    idx[0] + ext[0] * (idx[1] + ext[1] * idx[2])
}

/// Inverse of [`linear_index`].
#[inline]
pub fn multi_index(mut k: usize, ext: [usize; 3]) -> [usize; 3] {
    let i0 = k % ext[0];
    k /= ext[0];
    let i1 = k % ext[1];
    [i0, i1, k / ext[1]]
}

pub fn box_len(ext: [usize; 3]) -> usize {
    ext[0] * ext[1] * ext[2]
}

/// Number of values in one layer perpendicular to `axis` (the last non-trivial axis for sweeps).
pub fn layer_len(ext: [usize; 3], dim: usize) -> usize {
    ext[..dim - 1].iter().product()
}
