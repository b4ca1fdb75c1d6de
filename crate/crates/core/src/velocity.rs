use crate::error::{Error, Result};
use crate::grid::{box_len, linear_index, GridSpec};

/// Wave speed sampled at every grid point, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    extents: [usize; 3],
    values: Vec<f64>,
    c_min: f64,
    c_max: f64,
}

impl VelocityField {
    pub fn new(extents: [usize; 3], values: Vec<f64>) -> Result<Self> {
        if values.len() != box_len(extents) {
            return Err(Error::Extent { expected: box_len(extents), actual: values.len() });
        }
        let mut c_min = f64::INFINITY;
        let mut c_max = 0.0f64;
        for &c in &values {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Config(format!("velocity must be positive and finite, got {c}")));
            }
            c_min = c_min.min(c);
            c_max = c_max.max(c);
        }
        Ok(Self { extents, values, c_min, c_max })
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Result<Self> {
        Self::new(grid.extents(), vec![c; grid.len()])
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut([f64; 3]) -> f64) -> Result<Self> {
        let ext = grid.extents();
        let h = grid.h();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..ext[2] {
            for j in 0..ext[1] {
                for i in 0..ext[0] {
                    let coord = |idx: usize, axis: usize| {
                        if axis < grid.dim() {
                            (idx + 1) as f64 * h
                        } else {
                            0.0
                        }
                    };
                    values.push(f([coord(i, 0), coord(j, 1), coord(k, 2)]));
                }
            }
        }
        Self::new(ext, values)
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    /// Value at a 0-based multi-index.
    #[inline]
    pub fn at(&self, idx: [usize; 3]) -> f64 {
        self.values[linear_index(idx, self.extents)]
    }
}
