//! Desk calibration of the PML strength `C` in a 1D constant medium.
//!
//! A point source in the interior of a PML-closed line is solved directly and compared with the
//! discrete free-space solution `u_j = A e^{i theta |j - j0|}`, whose wavenumber obeys the discrete
//! dispersion relation `cos theta = 1 - (omega h / c)^2 / 2`. The largest deviation over the
//! undamped interior, relative to `|A|`, measures the spurious reflection of the layers.

use num_complex::Complex64;

use crate::assemble::{assemble_global, global_profiles};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::solve::{factor_banded, reorder_quasi1d};
use crate::velocity::VelocityField;

/// Multiples of `c_max` tried by [`calibrate_strength`], in increasing order.
pub const STRENGTH_CANDIDATES: [f64; 5] = [5.0, 10.0, 20.0, 40.0, 80.0];

/// Reflection threshold relative to the free-space amplitude.
pub const REFLECTION_THRESHOLD: f64 = 1e-3;

/// Default `C` for unit background velocity, chosen by [`calibrate_strength`] at
/// `omega / 2 pi = 16`, eight points per wavelength, `gamma = 9`.
pub const DEFAULT_PML_STRENGTH: f64 = 20.0;

/// Spurious reflection of a 1D constant-medium PML.
pub fn pml_reflection(freq: f64, ppw: f64, gamma: usize, c: f64, strength: f64) -> Result<f64> {
    let grid = GridSpec::from_ppw(1, freq, ppw)?;
    let n = grid.n();
    let h = grid.h();
    let vel = VelocityField::constant(&grid, c)?;
    let profiles = global_profiles(&grid, strength, gamma)?;
    let a = assemble_global(&grid, &vel, &profiles)?;
    let (r, perm) = reorder_quasi1d(&a);
    let lu = factor_banded(&r)?;
    let j0 = n / 3;
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    f[j0] = Complex64::new(1.0 / h, 0.0);
    let u = perm.scatter(&lu.solve(&perm.gather(&f))?);
    let kh = grid.omega() * h / c;
    let theta = (1.0 - kh * kh / 2.0).acos();
    let amp = f[j0] * h * h / Complex64::new(0.0, 2.0 * theta.sin());
    let mut worst = 0.0f64;
    for (j, uj) in u.iter().enumerate().take(n - gamma).skip(gamma) {
        let dist = (j as f64 - j0 as f64).abs();
        let free = amp * Complex64::from_polar(1.0, theta * dist);
        worst = worst.max((uj - free).norm());
    }
    Ok(worst / amp.norm())
}

/// Candidate strength with its measured reflection.
pub type Sample = (f64, f64);

/// Smallest candidate `C = k c_max` whose reflection stays below the threshold, with the
/// measured reflection of every candidate tried.
pub fn calibrate_strength(freq: f64, ppw: f64, gamma: usize, c_max: f64) -> Result<(Option<f64>, Vec<Sample>)> {
    let mut tried = Vec::new();
    for k in STRENGTH_CANDIDATES {
        let strength = k * c_max;
        let r = pml_reflection(freq, ppw, gamma, c_max, strength)?;
        tried.push((strength, r));
        if r < REFLECTION_THRESHOLD {
            return Ok((Some(strength), tried));
        }
    }
    Ok((None, tried))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_the_calibrated_choice() {
        let (chosen, tried) = calibrate_strength(16.0, 8.0, 9, 1.0).unwrap();
        assert_eq!(chosen, Some(DEFAULT_PML_STRENGTH));
        // every weaker candidate fails the threshold
        assert!(tried[..tried.len() - 1].iter().all(|&(_, r)| r >= REFLECTION_THRESHOLD));
    }

    #[test]
    fn reflection_depends_on_resolution_not_frequency() {
        let a = pml_reflection(8.0, 8.0, 9, 1.0, 20.0).unwrap();
        let b = pml_reflection(32.0, 8.0, 9, 1.0, 20.0).unwrap();
        assert!((a - b).abs() <= 0.05 * a);
    }

    #[test]
    fn weak_layers_reflect() {
        let weak = pml_reflection(16.0, 8.0, 9, 1.0, 1.0).unwrap();
        let good = pml_reflection(16.0, 8.0, 9, 1.0, DEFAULT_PML_STRENGTH).unwrap();
        assert!(weak > 10.0 * good);
    }
}
