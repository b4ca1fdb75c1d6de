//! Quadratic PML damping profiles and the complex coordinate stretch.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PmlSides;

/// One quadratic ramp: `sigma(x) = C/width * ((x - zero)/width)^2` on the damped side of `zero`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    /// Interior end of the ramp, where the damping vanishes.
    pub zero: f64,
    pub width: f64,
    /// The constant `C`.
    pub strength: f64,
}

/// Strength constants of the boundary PML and of the auxiliary PMLs that close the slabs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmlStrength {
    pub boundary: f64,
    pub auxiliary: f64,
}

impl PmlStrength {
    pub fn uniform(c: f64) -> Self {
        Self { boundary: c, auxiliary: c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    LeftRamp,
    Flat,
    RightRamp,
}

/// Damping profile along one axis: an optional left ramp, a flat undamped middle and an optional
/// right ramp, defined on the closed interval `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmlProfile {
    domain: (f64, f64),
    left: Option<Ramp>,
    right: Option<Ramp>,
}

impl PmlProfile {
    pub fn new(domain: (f64, f64), left: Option<Ramp>, right: Option<Ramp>) -> Result<Self> {
        if domain.0 >= domain.1 {
            return Err(Error::Config(format!("empty profile domain {domain:?}")));
        }
        for r in left.iter().chain(right.iter()) {
            if !(r.strength.is_finite() && r.strength > 0.0) {
                return Err(Error::Config(format!("PML strength must be positive, got {}", r.strength)));
            }
            if !(r.width > 0.0) {
                return Err(Error::Config(format!("ramp width must be positive, got {}", r.width)));
            }
        }
        Ok(Self { domain, left, right })
    }

    /// Profile of the original problem on `[0, 1]` with ramps of width `eta` on the flagged faces.
    pub fn global(strength: f64, eta: f64, sides: PmlSides) -> Result<Self> {
        let left = sides.low.then_some(Ramp { zero: eta, width: eta, strength });
        let right = sides.high.then_some(Ramp { zero: 1.0 - eta, width: eta, strength });
        Self::new((0.0, 1.0), left, right)
    }

    /// Profile without damping: every stretch equals one.
    pub fn flat(domain: (f64, f64)) -> Self {
        Self { domain, left: None, right: None }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn left(&self) -> Option<Ramp> {
        self.left
    }

    pub fn right(&self) -> Option<Ramp> {
        self.right
    }

    /// Piecewise description as `(start, end, segment)` triples in increasing order.
    pub fn segments(&self) -> Vec<(f64, f64, Segment)> {
        let (a, b) = self.domain;
        let flat_lo = self.left.map_or(a, |r| r.zero);
        let flat_hi = self.right.map_or(b, |r| r.zero);
        let mut out = Vec::with_capacity(3);
        if self.left.is_some() {
            out.push((a, flat_lo, Segment::LeftRamp));
        }
        out.push((flat_lo, flat_hi, Segment::Flat));
        if self.right.is_some() {
            out.push((flat_hi, b, Segment::RightRamp));
        }
        out
    }

    /// Damping `sigma(x)`.
    pub fn sigma(&self, x: f64) -> Result<f64> {
        let (a, b) = self.domain;
        let slack = 1e-12 * (b - a).abs().max(1.0);
        if !(x >= a - slack && x <= b + slack) {
            return Err(Error::Domain(format!("x = {x} outside profile domain [{a}, {b}]")));
        }
        if let Some(r) = self.left {
            if x < r.zero {
                let t = (x - r.zero) / r.width;
                return Ok(r.strength / r.width * t * t);
            }
        }
        if let Some(r) = self.right {
            if x > r.zero {
                let t = (x - r.zero) / r.width;
                return Ok(r.strength / r.width * t * t);
            }
        }
        Ok(0.0)
    }

    /// Complex stretch `s(x) = (1 + i sigma(x)/omega)^(-1)`; exactly one where `sigma = 0`.
    pub fn stretch(&self, omega: f64, x: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
        }
        Ok(stretch_from_sigma(self.sigma(x)?, omega))
    }
}

pub fn stretch_from_sigma(sigma: f64, omega: f64) -> Complex64 {
    if sigma == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::new(1.0, sigma / omega).inv()
}
