//! Velocity fields and forcing terms of the numerical experiments.
//!
//! Lengths are in units of the unit box; "wavelength" means `c_ref / freq` with `freq = omega / 2 pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{multi_index, GridSpec};
use crate::velocity::VelocityField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Medium {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// Background minus a centered Gaussian bump reaching `c_min` at the center.
    Lens {
        #[serde(default = "one")]
        background: f64,
        #[serde(default = "lens_c_min")]
        c_min: f64,
        #[serde(default = "lens_radius")]
        radius: f64,
    },
    /// Background minus a Gaussian channel running along the sweep axis through the center.
    Waveguide {
        #[serde(default = "one")]
        background: f64,
        #[serde(default = "guide_c_min")]
        c_min: f64,
        #[serde(default = "guide_radius")]
        radius: f64,
    },
    /// Seeded white noise smoothed by a Gaussian of `smoothing` wavelengths, mapped onto
    /// `[c_min, c_max]`.
    Random {
        #[serde(default = "random_c_min")]
        c_min: f64,
        #[serde(default = "random_c_max")]
        c_max: f64,
        #[serde(default = "one")]
        smoothing: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}
fn lens_c_min() -> f64 {
    0.5
}
fn lens_radius() -> f64 {
    0.15
}
fn guide_c_min() -> f64 {
    0.6
}
fn guide_radius() -> f64 {
    0.1
}
fn random_c_min() -> f64 {
    0.75
}
fn random_c_max() -> f64 {
    1.25
}
fn packet_width() -> f64 {
    0.5
}
fn point_width() -> f64 {
    2.0
}

impl Medium {
    pub fn lens() -> Self {
        Medium::Lens { background: 1.0, c_min: lens_c_min(), radius: lens_radius() }
    }

    pub fn waveguide() -> Self {
        Medium::Waveguide { background: 1.0, c_min: guide_c_min(), radius: guide_radius() }
    }

    pub fn random(seed: u64) -> Self {
        Medium::Random { c_min: random_c_min(), c_max: random_c_max(), smoothing: 1.0, seed }
    }

    /// Paper media by letter: `a` lens, `b` waveguide, `c` random.
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "a" | "lens" => Ok(Self::lens()),
            "b" | "waveguide" => Ok(Self::waveguide()),
            "c" | "random" => Ok(Self::random(seed)),
            "constant" => Ok(Medium::Constant { c: 1.0 }),
            other => Err(Error::Config(format!("unknown medium {other:?}"))),
        }
    }

    /// Short label for reports.
    pub fn label(&self) -> &'static str {
        match self {
            Medium::Constant { .. } => "constant",
            Medium::Lens { .. } => "lens",
            Medium::Waveguide { .. } => "waveguide",
            Medium::Random { .. } => "random",
        }
    }

    /// Velocity used to define the typical wavelength.
    pub fn reference_velocity(&self) -> f64 {
        match *self {
            Medium::Constant { c } => c,
            Medium::Lens { background, .. } | Medium::Waveguide { background, .. } => background,
            Medium::Random { c_min, c_max, .. } => 0.5 * (c_min + c_max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Force {
    /// Gaussian of standard deviation `width` grid spacings; the center defaults to the
    /// experiments' source position.
    PointSource {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "point_width")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian envelope of standard deviation `width` wavelengths times the plane wave
    /// `exp(i omega x.d / c_ref)`.
    WavePacket {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
        #[serde(default = "packet_width")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `prod_a sin(k_a pi x_a)`, vanishing on the box faces.
    Manufactured {
        modes: Vec<u32>,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl Force {
    /// Paper forces by letter: `a` point source, `b` wave packet.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "a" | "point_source" => Ok(Force::PointSource { center: None, width: point_width(), amplitude: 1.0 }),
            "b" | "wave_packet" => {
                Ok(Force::WavePacket { center: None, direction: None, width: packet_width(), amplitude: 1.0 })
            }
            other => Err(Error::Config(format!("unknown force {other:?}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Force::PointSource { .. } => "point_source",
            Force::WavePacket { .. } => "wave_packet",
            Force::Manufactured { .. } => "manufactured",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub medium: Medium,
    pub force: Force,
}

/// Grid coordinates `(idx + 1) h` of linear index `k`.
fn coords(grid: &GridSpec, k: usize) -> [f64; 3] {
    let idx = multi_index(k, grid.extents());
    let h = grid.h();
    let mut x = [0.0; 3];
    for a in 0..grid.dim() {
        x[a] = (idx[a] + 1) as f64 * h;
    }
    x
}

fn gaussian_bump(x: &[f64; 3], center: &[f64], axes: &[usize], radius: f64) -> f64 {
    let r2: f64 = axes.iter().map(|&a| (x[a] - center[a]).powi(2)).sum();
    (-r2 / (2.0 * radius * radius)).exp()
}

/// Separable Gaussian smoothing of a box field, truncated at four standard deviations, with
/// the kernel renormalized near the faces.
fn smooth(values: &mut [f64], ext: [usize; 3], dim: usize, sigma_points: f64) {
    let half = (4.0 * sigma_points).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half).map(|d| (-(d * d) as f64 / (2.0 * sigma_points * sigma_points)).exp()).collect();
    let mut buf = vec![0.0; values.len()];
    for axis in 0..dim {
        let stride: usize = ext[..axis].iter().product();
        let len = ext[axis] as isize;
        for (k, out) in buf.iter_mut().enumerate() {
            let i = ((k / stride) % ext[axis]) as isize;
            let base = k - i as usize * stride;
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for (d, w) in (-half..=half).zip(&kernel) {
                let j = i + d;
                if (0..len).contains(&j) {
                    acc += w * values[base + j as usize * stride];
                    wsum += w;
                }
            }
            *out = acc / wsum;
        }
        values.copy_from_slice(&buf);
    }
}

/// Velocity field of `medium` on `grid`.
pub fn make_velocity(medium: &Medium, grid: &GridSpec) -> Result<VelocityField> {
    let dim = grid.dim();
    let sweep = grid.sweep_axis();
    let center = [0.5; 3];
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("{name} must be positive, got {v}")))
        }
    };
    match *medium {
        Medium::Constant { c } => {
            positive("c", c)?;
            VelocityField::constant(grid, c)
        }
        Medium::Lens { background, c_min, radius } => {
            positive("c_min", c_min)?;
            positive("radius", radius)?;
            let axes: Vec<usize> = (0..dim).collect();
            VelocityField::from_fn(grid, |x| background - (background - c_min) * gaussian_bump(&x, &center, &axes, radius))
        }
        Medium::Waveguide { background, c_min, radius } => {
            positive("c_min", c_min)?;
            positive("radius", radius)?;
            let axes: Vec<usize> = (0..dim).filter(|&a| a != sweep).collect();
            VelocityField::from_fn(grid, |x| background - (background - c_min) * gaussian_bump(&x, &center, &axes, radius))
        }
        Medium::Random { c_min, c_max, smoothing, seed } => {
            positive("c_min", c_min)?;
            positive("smoothing", smoothing)?;
            if c_max < c_min {
                return Err(Error::Config(format!("c_max {c_max} below c_min {c_min}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut z: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let freq = grid.omega() / (2.0 * PI);
            let wavelength = medium.reference_velocity() / freq;
            smooth(&mut z, grid.extents(), dim, (smoothing * wavelength / grid.h()).max(0.5));
            let zmax = z.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let mid = 0.5 * (c_min + c_max);
            let half = 0.5 * (c_max - c_min);
            let values = z.iter().map(|v| (mid + half * v / zmax).clamp(c_min, c_max)).collect();
            VelocityField::new(grid.extents(), values)
        }
    }
}

fn default_point_center(dim: usize) -> Vec<f64> {
    match dim {
        1 => vec![0.5],
        2 => vec![0.5, 0.125],
        _ => vec![0.5, 0.5, 0.25],
    }
}

fn default_packet(dim: usize) -> (Vec<f64>, Vec<f64>) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match dim {
        1 => (vec![0.25], vec![1.0]),
        2 => (vec![0.125, 0.125], vec![r, r]),
        _ => (vec![0.5, 0.25, 0.25], vec![0.0, r, r]),
    }
}

fn check_center(center: &[f64], dim: usize) -> Result<()> {
    if center.len() != dim {
        return Err(Error::Config(format!("center has {} coordinates, grid has {dim}", center.len())));
    }
    if center.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
        return Err(Error::Domain(format!("center {center:?} outside the open unit box")));
    }
    Ok(())
}

/// Force of `spec` on `grid`, scaled so that `max |f| = amplitude`.
pub fn make_force(spec: &ScenarioSpec, grid: &GridSpec) -> Result<Vec<Complex64>> {
    let dim = grid.dim();
    let h = grid.h();
    let mut f: Vec<Complex64> = match &spec.force {
        Force::PointSource { center, width, .. } => {
            let center = center.clone().unwrap_or_else(|| default_point_center(dim));
            check_center(&center, dim)?;
            let s = width * h;
            (0..grid.len())
                .map(|k| {
                    let x = coords(grid, k);
                    let r2: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum();
                    Complex64::new((-r2 / (2.0 * s * s)).exp(), 0.0)
                })
                .collect()
        }
        Force::WavePacket { center, direction, width, .. } => {
            let (dc, dd) = default_packet(dim);
            let center = center.clone().unwrap_or(dc);
            let dir = direction.clone().unwrap_or(dd);
            check_center(&center, dim)?;
            if dir.len() != dim {
                return Err(Error::Config(format!("direction has {} coordinates, grid has {dim}", dir.len())));
            }
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Config("packet direction must be nonzero".into()));
            }
            let c_ref = spec.medium.reference_velocity();
            let k = grid.omega() / c_ref;
            let s = width * c_ref * 2.0 * PI / grid.omega();
            (0..grid.len())
                .map(|i| {
                    let x = coords(grid, i);
                    let r2: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum();
                    let phase: f64 = (0..dim).map(|a| x[a] * dir[a] / norm).sum::<f64>() * k;
                    Complex64::from_polar((-r2 / (2.0 * s * s)).exp(), phase)
                })
                .collect()
        }
        Force::Manufactured { modes, .. } => {
            if modes.len() != dim {
                return Err(Error::Config(format!("{} modes given for dimension {dim}", modes.len())));
            }
            (0..grid.len())
                .map(|i| {
                    let x = coords(grid, i);
                    let v: f64 = (0..dim).map(|a| (modes[a] as f64 * PI * x[a]).sin()).product();
                    Complex64::new(v, 0.0)
                })
                .collect()
        }
    };
    let amplitude = match &spec.force {
        Force::PointSource { amplitude, .. }
        | Force::WavePacket { amplitude, .. }
        | Force::Manufactured { amplitude, .. } => *amplitude,
    };
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    for v in &mut f {
        *v *= scale;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linear_index;

    fn grid2(freq: f64) -> GridSpec {
        GridSpec::from_ppw(2, freq, 8.0).unwrap()
    }

    #[test]
    fn constant_medium() {
        let g = grid2(4.0);
        let v = make_velocity(&Medium::Constant { c: 1.0 }, &g).unwrap();
        assert!(v.values().iter().all(|&c| c == 1.0));
        assert!(make_velocity(&Medium::Constant { c: 0.0 }, &g).is_err());
    }

    #[test]
    fn lens_minimum_at_center_and_mirror_symmetric() {
        let g = grid2(4.0); // n = 31, odd
        let v = make_velocity(&Medium::lens(), &g).unwrap();
        let (kmin, _) = v.values().iter().enumerate().fold((0, f64::MAX), |a, (k, &c)| if c < a.1 { (k, c) } else { a });
        assert_eq!(multi_index(kmin, g.extents()), [15, 15, 0]);
        let n = g.n();
        for j in 0..n {
            for i in 0..n {
                let c = v.at([i, j, 0]);
                assert_eq!(c, v.at([n - 1 - i, j, 0]));
                assert_eq!(c, v.at([i, n - 1 - j, 0]));
            }
        }
        assert!(v.c_min() > 0.5 - 1e-12 && v.c_max() <= 1.0);
    }

    #[test]
    fn waveguide_is_invariant_along_sweep_axis() {
        let g = GridSpec::from_ppw(3, 2.0, 8.0).unwrap();
        let v = make_velocity(&Medium::waveguide(), &g).unwrap();
        let n = g.n();
        for k in 0..n {
            assert_eq!(v.at([3, 5, k]), v.at([3, 5, 0]));
        }
        assert!(v.at([n / 2, n / 2, 0]) < v.at([0, 0, 0]));
    }

    #[test]
    fn random_medium_is_seeded_and_bounded() {
        let g = grid2(8.0);
        let a = make_velocity(&Medium::random(7), &g).unwrap();
        let b = make_velocity(&Medium::random(7), &g).unwrap();
        let c = make_velocity(&Medium::random(8), &g).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.c_min() >= 0.75 && a.c_max() <= 1.25);
        // the largest excursion reaches one end of the range
        assert!((a.c_min() - 0.75).abs() < 1e-12 || (a.c_max() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn point_source_peak_at_center() {
        let g = grid2(16.0);
        let spec = ScenarioSpec { medium: Medium::lens(), force: Force::preset("a").unwrap() };
        let f = make_force(&spec, &g).unwrap();
        let (k, peak) = f.iter().enumerate().fold((0, 0.0), |a, (k, v)| if v.norm() > a.1 { (k, v.norm()) } else { a });
        assert!((peak - 1.0).abs() < 1e-15);
        let x = coords(&g, k);
        assert!((x[0] - 0.5).abs() <= g.h() && (x[1] - 0.125).abs() <= g.h());
    }

    #[test]
    fn packet_phase_gradient_matches_wavenumber() {
        let g = grid2(16.0);
        let spec = ScenarioSpec { medium: Medium::Constant { c: 1.0 }, force: Force::preset("b").unwrap() };
        let f = make_force(&spec, &g).unwrap();
        // finite-difference phase gradient at the packet center along the diagonal
        let h = g.h();
        let i = (0.125 / h).round() as usize - 1;
        let ext = g.extents();
        let a = f[linear_index([i, i, 0], ext)];
        let b = f[linear_index([i + 1, i + 1, 0], ext)];
        let dphase = (b / a).arg();
        let measured = dphase / (h * std::f64::consts::SQRT_2);
        assert!((measured - g.omega()).abs() <= 0.05 * g.omega());
    }

    #[test]
    fn zero_amplitude_and_bad_center() {
        let g = grid2(4.0);
        let spec = ScenarioSpec {
            medium: Medium::lens(),
            force: Force::PointSource { center: None, width: 2.0, amplitude: 0.0 },
        };
        assert!(make_force(&spec, &g).unwrap().iter().all(|v| v.norm() == 0.0));
        let spec = ScenarioSpec {
            medium: Medium::lens(),
            force: Force::PointSource { center: Some(vec![0.5, 1.5]), width: 2.0, amplitude: 1.0 },
        };
        assert!(matches!(make_force(&spec, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn manufactured_vanishes_on_faces() {
        let g = GridSpec::new(1, 9, 1.0).unwrap();
        let spec = ScenarioSpec { medium: Medium::Constant { c: 1.0 }, force: Force::Manufactured { modes: vec![1], amplitude: 1.0 } };
        let f = make_force(&spec, &g).unwrap();
        assert!((f[4].re - 1.0).abs() < 1e-15);
        assert!((f[0].re - (PI / 10.0).sin()).abs() < 1e-15);
    }
}
