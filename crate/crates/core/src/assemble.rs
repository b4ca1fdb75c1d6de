//! Second-order finite-difference assembly of the PML-stretched Helmholtz operator.
//!
//! Along an axis with stretch `s`, row `i` carries
//! `s_i/h^2 * (s_{i+1/2} (u_{i+1} - u_i) - s_{i-1/2} (u_i - u_{i-1}))`; where `s` is one this is
//! the plain three-point Laplacian. The diagonal also holds `omega^2 / c^2`, and neighbours outside
//! the box are homogeneous Dirichlet ghosts.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::grid::{box_len, layer_len, GridSpec};
use crate::partition::{Kind, LayerPartition};
use crate::pml::{PmlProfile, PmlStrength};
use crate::sparse::SparseOperator;
use crate::velocity::VelocityField;

/// Per-axis PML profiles of the original problem.
pub fn global_profiles(grid: &GridSpec, strength: f64, gamma: usize) -> Result<Vec<PmlProfile>> {
    let eta = gamma as f64 * grid.h();
    (0..grid.dim())
        .map(|axis| {
            let sides = grid.pml(axis);
            if sides.any() {
                PmlProfile::global(strength, eta, sides)
            } else {
                Ok(PmlProfile::flat((0.0, 1.0)))
            }
        })
        .collect()
}

/// Stretch samples of one axis: at the points and at the two half points around each.
struct AxisStretch {
    at: Vec<Complex64>,
    minus: Vec<Complex64>,
    plus: Vec<Complex64>,
}

impl AxisStretch {
    /// `first` is the 1-based grid index of local point 0.
    fn sample(profile: &PmlProfile, omega: f64, h: f64, first: usize, len: usize) -> Result<Self> {
        let mut at = Vec::with_capacity(len);
        let mut minus = Vec::with_capacity(len);
        let mut plus = Vec::with_capacity(len);
        for j in 0..len {
            let g = (first + j) as f64;
            at.push(profile.stretch(omega, g * h)?);
            minus.push(profile.stretch(omega, (g - 0.5) * h)?);
            plus.push(profile.stretch(omega, (g + 0.5) * h)?);
        }
        Ok(Self { at, minus, plus })
    }
}

/// Assemble on the box spanning every transverse point and sweep layers `first..=last`.
fn assemble_box(
    grid: &GridSpec,
    velocity: &VelocityField,
    profiles: &[PmlProfile],
    first: usize,
    last: usize,
) -> Result<SparseOperator> {
    let dim = grid.dim();
    if profiles.len() != dim {
        return Err(Error::Config(format!("expected {dim} PML profiles, got {}", profiles.len())));
    }
    if velocity.extents() != grid.extents() {
        return Err(Error::Config(format!(
            "velocity extents {:?} do not match grid {:?}",
            velocity.extents(),
            grid.extents()
        )));
    }
    let sweep = grid.sweep_axis();
    let ext = grid.slab_extents(last - first + 1);
    let h = grid.h();
    let omega = grid.omega();
    let inv_h2 = 1.0 / (h * h);

    let mut axes = Vec::with_capacity(dim);
    for (axis, profile) in profiles.iter().enumerate() {
        let start = if axis == sweep { first } else { 1 };
        axes.push(AxisStretch::sample(profile, omega, h, start, ext[axis])?);
    }

    let n = box_len(ext);
    let stride = [1, ext[0], ext[0] * ext[1]];
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * (2 * dim + 1));
    let mut vals = Vec::with_capacity(n * (2 * dim + 1));
    let mut stretch = Vec::with_capacity(n);
    row_ptr.push(0);
    let mut upper: [(usize, Complex64); 3] = [(0, Complex64::new(0.0, 0.0)); 3];
    for k in 0..ext[2] {
        for j in 0..ext[1] {
            for i in 0..ext[0] {
                let idx = [i, j, k];
                let row = i + stride[1] * j + stride[2] * k;
                let mut vidx = idx;
                vidx[sweep] += first - 1;
                let c = velocity.at(vidx);
                let mut diag = Complex64::new(0.0, 0.0);
                let mut prod = Complex64::new(1.0, 0.0);
                let mut n_upper = 0;
                // lower neighbours from the slowest axis down keep columns sorted
                for axis in (0..dim).rev() {
                    let a = &axes[axis];
                    let l = idx[axis];
                    let s = a.at[l];
                    prod *= s;
                    diag -= s * (a.plus[l] + a.minus[l]) * inv_h2;
                    if l > 0 {
                        cols.push(row - stride[axis]);
                        vals.push(s * a.minus[l] * inv_h2);
                    }
                }
                diag += omega * omega / (c * c);
                cols.push(row);
                vals.push(diag);
                for axis in 0..dim {
                    let a = &axes[axis];
                    let l = idx[axis];
                    if l + 1 < ext[axis] {
                        upper[n_upper] = (row + stride[axis], a.at[l] * a.plus[l] * inv_h2);
                        n_upper += 1;
                    }
                }
                for &(col, v) in &upper[..n_upper] {
                    cols.push(col);
                    vals.push(v);
                }
                row_ptr.push(cols.len());
                stretch.push(prod);
            }
        }
    }
    Ok(SparseOperator::from_csr(row_ptr, cols, vals, ext, dim, stretch))
}

/// Global operator `A` on the whole grid.
pub fn assemble_global(
    grid: &GridSpec,
    velocity: &VelocityField,
    profiles: &[PmlProfile],
) -> Result<SparseOperator> {
    assemble_box(grid, velocity, profiles, 1, grid.n())
}

/// Operator of auxiliary subproblem `kind` on slab `p`: the global stencil restricted to the
/// extended range, with the slab-local profile along the sweep axis.
pub fn assemble_subproblem(
    grid: &GridSpec,
    velocity: &VelocityField,
    profiles: &[PmlProfile],
    partition: &LayerPartition,
    p: usize,
    kind: Kind,
    strength: PmlStrength,
) -> Result<SparseOperator> {
    if partition.n() != grid.n() {
        return Err(Error::Config(format!(
            "partition built for n = {}, grid has n = {}",
            partition.n(),
            grid.n()
        )));
    }
    let range = partition.extended(p, kind)?;
    let sweep = grid.sweep_axis();
    if profiles.len() != grid.dim() {
        return Err(Error::Config(format!("expected {} axis profiles, got {}", grid.dim(), profiles.len())));
    }
    let mut local = profiles.to_vec();
    local[sweep] = range.profile(partition, strength)?;
    assemble_box(grid, velocity, &local, range.first, range.last)
}

/// Which sweep layer of a slab receives a transmitted trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// First layer; feeds a right-transmission subproblem.
    Left,
    /// Last layer; feeds a left-transmission subproblem.
    Right,
}

/// Right-hand side `(-1/h^2) w` on the first or last sweep layer of a box, zero elsewhere.
pub fn boundary_rhs(w: &[Complex64], side: Side, h: f64, extents: [usize; 3], dim: usize) -> Result<Vec<Complex64>> {
    let t = layer_len(extents, dim);
    check_len(t, w.len())?;
    let n = box_len(extents);
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let scale = -1.0 / (h * h);
    let offset = match side {
        Side::Left => 0,
        Side::Right => n - t,
    };
    for (gi, &wi) in g[offset..offset + t].iter_mut().zip(w) {
        *gi = wi * scale;
    }
    Ok(g)
}

/// Diagonal scalings turning `A` into the complex-symmetric `D1 A D2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaling {
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

impl Scaling {
    pub fn is_identity(&self) -> bool {
        let one = Complex64::new(1.0, 0.0);
        self.left.iter().chain(&self.right).all(|&d| d == one)
    }

    /// `D1 g`: right-hand side of the scaled system.
    pub fn scale_rhs(&self, g: &mut [Complex64]) {
        for (x, d) in g.iter_mut().zip(&self.left) {
            *x *= d;
        }
    }

    /// `D2 y`: solution of the original system from that of the scaled one.
    pub fn unscale_solution(&self, y: &mut [Complex64]) {
        for (x, d) in y.iter_mut().zip(&self.right) {
            *x *= d;
        }
    }
}

/// Complex-symmetric form: dividing each row by the product of its point stretches makes every
/// coupling depend only on the shared half-point stretch.
pub fn symmetrize(op: &SparseOperator) -> (SparseOperator, Scaling) {
    let one = Complex64::new(1.0, 0.0);
    let left: Vec<Complex64> = op.stretch().iter().map(|&s| if s == one { one } else { s.inv() }).collect();
    let right = vec![one; op.nrows()];
    (op.row_scaled(&left), Scaling { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::grid::PmlSides;
    use crate::partition::partition_layers;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn interior_rows_reduce_to_laplacian() {
        let grid = GridSpec::new(1, 40, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        let vel = VelocityField::from_fn(&grid, |x| 1.0 + 0.3 * x[0]).unwrap();
        let prof = global_profiles(&grid, 20.0, 9).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let h = grid.h();
        let inv_h2 = 1.0 / (h * h);
        let w = grid.omega();
        // rows 10..=30 (1-based) have zero damping at all half points
        for i in 9..30 {
            let ci = vel.values()[i];
            assert_eq!(a.row(i).0, &[i - 1, i, i + 1]);
            assert_eq!(a.get(i, i - 1), c(inv_h2));
            assert_eq!(a.get(i, i + 1), c(inv_h2));
            assert_eq!(a.get(i, i), c(-2.0 * inv_h2 + w * w / (ci * ci)));
        }
    }

    #[test]
    fn two_dimensional_interior_stencil() {
        let grid = GridSpec::new(2, 31, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        let vel = VelocityField::constant(&grid, 1.0).unwrap();
        let prof = global_profiles(&grid, 20.0, 9).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let n = grid.n();
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let row = 15 + n * 15;
        assert_eq!(a.row(row).0, &[row - n, row - 1, row, row + 1, row + n]);
        assert_eq!(a.get(row, row), c(-4.0 * inv_h2 + grid.omega() * grid.omega()));
        for col in [row - n, row - 1, row + 1, row + n] {
            assert_eq!(a.get(row, col), c(inv_h2));
        }
        for i in 0..a.nrows() {
            assert!(a.row(i).0.len() <= 5);
            assert!(a.row(i).0.iter().all(|&j| j < a.nrows()));
        }
        assert!(a.is_structurally_symmetric());
    }

    // Oracle: apply the stencil pointwise to a sampled smooth function, straight from the formula.
    #[test]
    fn stencil_matches_pointwise_application() {
        let grid = GridSpec::new(1, 6, 2.0 * std::f64::consts::PI).unwrap();
        let vel = VelocityField::constant(&grid, 1.0).unwrap();
        let prof = global_profiles(&grid, 20.0, 2).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let h = grid.h();
        let w = grid.omega();
        let u = |x: f64| Complex64::new((3.0 * x).sin(), x * x);
        let ux: Vec<Complex64> = (1..=6).map(|i| u(i as f64 * h)).collect();
        let au = a.mul(&ux).unwrap();
        let s = |x: f64| prof[0].stretch(w, x).unwrap();
        for i in 1..=6usize {
            let x = i as f64 * h;
            let left = if i > 1 { u(x - h) } else { c(0.0) };
            let right = if i < 6 { u(x + h) } else { c(0.0) };
            let expect = s(x) / h * (s(x + h / 2.0) * (right - u(x)) / h - s(x - h / 2.0) * (u(x) - left) / h)
                + u(x) * w * w;
            assert!((au[i - 1] - expect).norm() <= 1e-12 * expect.norm().max(1.0), "row {i}");
        }
    }

    #[test]
    fn subproblem_rows_agree_with_global_away_from_ramps() {
        let grid = GridSpec::new(2, 40, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        let vel = VelocityField::from_fn(&grid, |x| 1.0 + 0.2 * (x[0] * 5.0).sin() * x[1]).unwrap();
        let prof = global_profiles(&grid, 20.0, 9).unwrap();
        let part = partition_layers(40, 9, 8).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let n = grid.n();
        for range in part.all_extended() {
            let hsub = assemble_subproblem(&grid, &vel, &prof, &part, range.slab, range.kind, PmlStrength::uniform(20.0)).unwrap();
            assert_eq!(hsub.nrows(), n * range.layers());
            let (lo, hi) = part.slab(range.slab);
            // interior sweep layers whose neighbours stay inside the undamped part of the slab
            let lo_ok = lo.max(10) + 1;
            let hi_ok = hi.min(n - 9) - 1;
            for layer in lo_ok..=hi_ok {
                for i1 in 1..n - 1 {
                    let grow = i1 + n * (layer - 1);
                    let srow = i1 + n * (layer - range.first);
                    let (gc, gv) = a.row(grow);
                    let (sc, sv) = hsub.row(srow);
                    assert_eq!(gc.len(), sc.len());
                    assert_eq!(gv, sv, "{range:?} layer {layer}");
                }
            }
        }
    }

    #[test]
    fn last_right_subproblem_is_global_restriction() {
        let grid = GridSpec::new(1, 40, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        let vel = VelocityField::constant(&grid, 1.0).unwrap();
        let prof = global_profiles(&grid, 20.0, 9).unwrap();
        let part = partition_layers(40, 9, 8).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let r = assemble_subproblem(&grid, &vel, &prof, &part, 2, Kind::Right, PmlStrength::uniform(20.0)).unwrap();
        let (lo, hi) = part.slab(2);
        assert_eq!(r.nrows(), hi - lo + 1);
        for i in 0..r.nrows() {
            for j in 0..r.nrows() {
                assert_eq!(r.get(i, j), a.get(lo - 1 + i, lo - 1 + j));
            }
        }
        let r = assemble_subproblem(&grid, &vel, &prof, &part, 1, Kind::Right, PmlStrength::uniform(20.0)).unwrap();
        assert_eq!(r.nrows(), 16);
    }

    #[test]
    fn boundary_rhs_layout() {
        let g = boundary_rhs(&[c(1.0)], Side::Left, 0.1, [5, 1, 1], 1).unwrap();
        assert!((g[0] - c(-100.0)).norm() < 1e-12);
        assert!(g[1..].iter().all(|x| *x == c(0.0)));
        let w: Vec<Complex64> = (0..4).map(|i| c(i as f64 + 1.0)).collect();
        let g = boundary_rhs(&w, Side::Right, 0.5, [4, 3, 1], 2).unwrap();
        assert_eq!(g.iter().filter(|x| **x != c(0.0)).count(), 4);
        assert_eq!(&g[8..], &[c(-4.0), c(-8.0), c(-12.0), c(-16.0)]);
        let z = boundary_rhs(&[c(0.0); 4], Side::Left, 0.5, [4, 3, 1], 2).unwrap();
        assert!(z.iter().all(|x| *x == c(0.0)));
        assert!(boundary_rhs(&w[..3], Side::Left, 0.5, [4, 3, 1], 2).is_err());
    }

    #[test]
    fn symmetrize_without_pml_is_identity() {
        let grid = GridSpec::new(2, 8, 3.0).unwrap().with_pml(0, PmlSides::NONE).unwrap();
        let vel = VelocityField::constant(&grid, 1.0).unwrap();
        // sweep-axis profile replaced by a flat one: no stretch anywhere
        let prof = vec![PmlProfile::flat((0.0, 1.0)), PmlProfile::flat((0.0, 1.0))];
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let (b, sc) = symmetrize(&a);
        assert!(sc.is_identity());
        assert_eq!(a, b);
    }

    #[test]
    fn symmetrized_operator_is_symmetric() {
        for dim in 1..=3 {
            let n = [30, 12, 6][dim - 1];
            let grid = GridSpec::new(dim, n, 2.0 * std::f64::consts::PI * 2.0).unwrap();
            let vel = VelocityField::from_fn(&grid, |x| 1.0 + 0.1 * x[0]).unwrap();
            let prof = global_profiles(&grid, 30.0, 3).unwrap();
            let a = assemble_global(&grid, &vel, &prof).unwrap();
            assert!(a.symmetry_defect() > 1e-3);
            let (b, _) = symmetrize(&a);
            assert!(b.symmetry_defect() <= 1e-14, "dim {dim}: {}", b.symmetry_defect());
        }
    }

    #[test]
    fn symmetrized_solve_round_trip() {
        let grid = GridSpec::new(1, 30, 2.0 * std::f64::consts::PI * 3.0).unwrap();
        let vel = VelocityField::from_fn(&grid, |x| 1.0 + 0.2 * x[0]).unwrap();
        let prof = global_profiles(&grid, 30.0, 4).unwrap();
        let a = assemble_global(&grid, &vel, &prof).unwrap();
        let (b, sc) = symmetrize(&a);
        let f: Vec<Complex64> = (0..30).map(|i| Complex64::new((i as f64).cos(), (i as f64 * 0.7).sin())).collect();
        let u = DenseMatrix::from_sparse(&a).solve(&f).unwrap();
        let mut g = f.clone();
        sc.scale_rhs(&mut g);
        let mut y = DenseMatrix::from_sparse(&b).solve(&g).unwrap();
        sc.unscale_solution(&mut y);
        let err: f64 = u.iter().zip(&y).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let nrm: f64 = u.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / nrm <= 1e-12, "{}", err / nrm);
    }
}
