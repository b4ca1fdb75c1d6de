//! The additive sweeping preconditioner.
//!
//! Each slab `p` owns up to three factored auxiliary subproblems: `Middle` maps the slab's force to
//! its own wave, `Right` maps the trace left of the slab to the wave entering from the left and
//! `Left` maps the trace right of the slab to the wave entering from the right. Summing the three
//! parts per slab, with traces accumulated in one pass per direction, approximates `A^{-1} f`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assemble::{assemble_subproblem, boundary_rhs, global_profiles, symmetrize, Scaling, Side};
use crate::error::{check_len, Error, Result};
use crate::grid::GridSpec;
use crate::partition::{ExtendedRange, Kind, LayerPartition};
use crate::pml::PmlStrength;
use crate::solve::{Factorization, SolverKind};
use crate::sparse::{LinearOperator, SparseOperator};
use crate::vecops::rel_residual;
use crate::velocity::VelocityField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Parameters of the preconditioner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    /// Boundary PML thickness in grid points.
    pub gamma: usize,
    /// Auxiliary PML thickness in grid points.
    pub gamma_aux: usize,
    /// Interior slab width in layers.
    pub b: usize,
    pub strength: PmlStrength,
    /// Factor the complex-symmetric scaled subproblems instead of the raw ones.
    pub symmetric: bool,
    /// Direct method; `None` picks banded LU up to 2D and multifrontal in 3D.
    pub solver: Option<SolverKind>,
}

impl SweepConfig {
    /// `gamma_aux = gamma`; symmetric scaling in 3D only.
    pub fn new(dim: usize, gamma: usize, b: usize, strength: f64) -> Self {
        Self {
            gamma,
            gamma_aux: gamma,
            b,
            strength: PmlStrength::uniform(strength),
            symmetric: dim == 3,
            solver: None,
        }
    }

    pub fn solver_kind(&self, dim: usize) -> SolverKind {
        self.solver.unwrap_or_else(|| SolverKind::default_for(dim, self.symmetric))
    }
}

/// Which part of the extended grid a slab field occupies.
fn slab_offset(range: &ExtendedRange, partition: &LayerPartition, t: usize) -> (usize, usize) {
    let (lo, hi) = partition.slab(range.slab);
    ((lo - range.first) * t, (hi - lo + 1) * t)
}

/// One factored auxiliary subproblem `G~` of the sweep.
#[derive(Clone, Debug)]
pub struct AuxiliaryGreens {
    range: ExtendedRange,
    /// Unscaled operator, kept for residual checks.
    op: SparseOperator,
    scaling: Option<Scaling>,
    factors: Factorization,
}

impl AuxiliaryGreens {
    fn build(
        grid: &GridSpec,
        velocity: &VelocityField,
        profiles: &[crate::pml::PmlProfile],
        partition: &LayerPartition,
        range: ExtendedRange,
        config: &SweepConfig,
    ) -> Result<Self> {
        let wrap = |e: Error| Error::Subproblem { slab: range.slab, kind: range.kind, source: Box::new(e) };
        let op = assemble_subproblem(grid, velocity, profiles, partition, range.slab, range.kind, config.strength)
            .map_err(wrap)?;
        let kind = config.solver_kind(grid.dim());
        let (factors, scaling) = if config.symmetric {
            let (sym, scaling) = symmetrize(&op);
            (Factorization::new(&sym, kind).map_err(wrap)?, Some(scaling))
        } else {
            (Factorization::new(&op, kind).map_err(wrap)?, None)
        };
        Ok(Self { range, op, scaling, factors })
    }

    pub fn range(&self) -> &ExtendedRange {
        &self.range
    }

    pub fn kind(&self) -> Kind {
        self.range.kind
    }

    pub fn slab(&self) -> usize {
        self.range.slab
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    pub fn factors(&self) -> &Factorization {
        &self.factors
    }

    /// Solve `H v = g` on the extended grid.
    pub fn solve(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = g.to_vec();
        match &self.scaling {
            Some(s) => {
                s.scale_rhs(&mut v);
                self.factors.solve_in_place(&mut v)?;
                s.unscale_solution(&mut v);
            }
            None => self.factors.solve_in_place(&mut v)?,
        }
        Ok(v)
    }

    /// `||H v - g|| / ||g||` for a random complex `g`.
    pub fn residual_check(&self, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<Complex64> = (0..self.op.nrows())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let v = self.solve(&g)?;
        Ok(rel_residual(&self.op, &v, &g))
    }
}

/// First (`Side::Left`) or last (`Side::Right`) transverse slice of a slab field with slices of
/// length `t`.
pub fn extract_trace(v: &[Complex64], side: Side, t: usize) -> Result<Vec<Complex64>> {
    if t == 0 || !v.len().is_multiple_of(t) || v.is_empty() {
        return Err(Error::Extent { expected: t, actual: v.len() });
    }
    Ok(match side {
        Side::Left => v[..t].to_vec(),
        Side::Right => v[v.len() - t..].to_vec(),
    })
}

/// Residual of one factored subproblem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubproblemResidual {
    pub slab: usize,
    pub kind: Kind,
    pub residual: f64,
}

/// Wave table indexed by source slab then target slab.
pub type SweepTable = Vec<Vec<Vec<Complex64>>>;

/// The assembled and factored preconditioner.
#[derive(Clone, Debug)]
pub struct SweepPreconditioner {
    grid: GridSpec,
    partition: LayerPartition,
    /// `G~^M_q`, `q = 0..m`.
    middles: Vec<AuxiliaryGreens>,
    /// `G~^R_p`, `p = 1..m`, stored at `p - 1`.
    rights: Vec<AuxiliaryGreens>,
    /// `G~^L_p`, `p = 0..m-1`.
    lefts: Vec<AuxiliaryGreens>,
}

impl SweepPreconditioner {
    /// Assemble and factor all `3m - 2` subproblems, concurrently.
    pub fn setup(grid: &GridSpec, velocity: &VelocityField, config: &SweepConfig) -> Result<Self> {
        check_len(grid.len(), velocity.values().len())?;
        let partition = LayerPartition::new(grid.n(), config.gamma, config.gamma_aux, config.b)?;
        let profiles = global_profiles(grid, config.strength.boundary, config.gamma)?;
        let ranges = partition.all_extended();
        let mut built: Vec<AuxiliaryGreens> = ranges
            .into_par_iter()
            .map(|r| AuxiliaryGreens::build(grid, velocity, &profiles, &partition, r, config))
            .collect::<Result<_>>()?;
        let m = partition.m();
        let lefts = built.split_off(m + m - 1);
        let rights = built.split_off(m);
        Ok(Self { grid: grid.clone(), partition, middles: built, rights, lefts })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn partition(&self) -> &LayerPartition {
        &self.partition
    }

    /// All subproblems: middles, rights, lefts.
    pub fn subproblems(&self) -> impl Iterator<Item = &AuxiliaryGreens> {
        self.middles.iter().chain(&self.rights).chain(&self.lefts)
    }

    pub fn subproblem_count(&self) -> usize {
        self.middles.len() + self.rights.len() + self.lefts.len()
    }

    /// Stored complex factor entries over all subproblems.
    pub fn factor_storage(&self) -> usize {
        self.subproblems().map(|s| s.factors.storage()).sum()
    }

    fn t(&self) -> usize {
        self.grid.layer_len()
    }

    /// Global offset and length of slab `p`.
    fn slab_span(&self, p: usize) -> (usize, usize) {
        let (lo, hi) = self.partition.slab(p);
        let t = self.t();
        ((lo - 1) * t, (hi - lo + 1) * t)
    }

    /// `G~^M_q f_q`, restricted to slab `q`.
    fn middle_wave(&self, q: usize, f_q: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = &self.middles[q];
        let (off, len) = slab_offset(&g.range, &self.partition, self.t());
        let mut rhs = vec![ZERO; g.op.nrows()];
        rhs[off..off + len].copy_from_slice(f_q);
        let v = g.solve(&rhs)?;
        Ok(v[off..off + len].to_vec())
    }

    /// Wave on slab `p` caused by trace `w` on the neighbouring layer; `kind` is `Right` for a
    /// trace left of the slab and `Left` for one right of it.
    fn transmitted_wave(&self, p: usize, kind: Kind, w: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = match kind {
            Kind::Right => &self.rights[p - 1],
            Kind::Left => &self.lefts[p],
            Kind::Middle => unreachable!("middle subproblems take forces, not traces"),
        };
        let side = if kind == Kind::Right { Side::Left } else { Side::Right };
        let ext = self.grid.slab_extents(g.range.layers());
        let rhs = boundary_rhs(w, side, self.grid.h(), ext, self.grid.dim())?;
        let v = g.solve(&rhs)?;
        let (off, len) = slab_offset(&g.range, &self.partition, self.t());
        Ok(v[off..off + len].to_vec())
    }

    /// `u~ = M f` by the additive sweep: own waves, then one accumulated pass leftwards and one
    /// rightwards.
    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.grid.len(), f.len())?;
        let m = self.partition.m();
        let t = self.t();
        let own: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|q| {
                let (off, len) = self.slab_span(q);
                self.middle_wave(q, &f[off..off + len])
            })
            .collect::<Result<_>>()?;
        let mut out = vec![ZERO; f.len()];
        let mut own_right = Vec::with_capacity(m);
        for (q, w) in own.into_iter().enumerate() {
            let (off, len) = self.slab_span(q);
            own_right.push(w[len - t..].to_vec());
            out[off..off + len].copy_from_slice(&w);
        }
        // leftward pass: the first layer of slab p+1 already holds every wave from q >= p+1
        for p in (0..m.saturating_sub(1)).rev() {
            let (next, _) = self.slab_span(p + 1);
            let trace = out[next..next + t].to_vec();
            let v = self.transmitted_wave(p, Kind::Left, &trace)?;
            let (off, len) = self.slab_span(p);
            for (o, x) in out[off..off + len].iter_mut().zip(&v) {
                *o += x;
            }
        }
        // rightward pass: accumulate the last-layer traces of waves from q <= p
        if m > 1 {
            let mut acc = own_right[0].clone();
            for p in 1..m {
                let v = self.transmitted_wave(p, Kind::Right, &acc)?;
                let (off, len) = self.slab_span(p);
                for (o, x) in out[off..off + len].iter_mut().zip(&v) {
                    *o += x;
                }
                if p + 1 < m {
                    for ((a, x), s) in acc.iter_mut().zip(&v[len - t..]).zip(&own_right[p]) {
                        *a = x + s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reference path computing every component `u~_{p,q}` separately (`O(m^2)` solves).
    /// Returns the sum and the table indexed `[p][q]`, each entry a slab field.
    pub fn apply_naive(&self, f: &[Complex64]) -> Result<(Vec<Complex64>, SweepTable)> {
        check_len(self.grid.len(), f.len())?;
        let m = self.partition.m();
        let t = self.t();
        let mut table = vec![vec![Vec::new(); m]; m];
        for q in 0..m {
            let (off, len) = self.slab_span(q);
            table[q][q] = self.middle_wave(q, &f[off..off + len])?;
            for p in q + 1..m {
                let w = extract_trace(&table[p - 1][q], Side::Right, t)?;
                table[p][q] = self.transmitted_wave(p, Kind::Right, &w)?;
            }
            for p in (0..q).rev() {
                let w = extract_trace(&table[p + 1][q], Side::Left, t)?;
                table[p][q] = self.transmitted_wave(p, Kind::Left, &w)?;
            }
        }
        let mut out = vec![ZERO; f.len()];
        for (p, row) in table.iter().enumerate() {
            let (off, len) = self.slab_span(p);
            for part in row {
                for (o, x) in out[off..off + len].iter_mut().zip(part) {
                    *o += x;
                }
            }
        }
        Ok((out, table))
    }

    /// Random right-hand-side residual check of every factored subproblem.
    pub fn factorization_residuals(&self, seed: u64) -> Result<Vec<SubproblemResidual>> {
        self.subproblems()
            .enumerate()
            .map(|(k, s)| {
                Ok(SubproblemResidual { slab: s.slab(), kind: s.kind(), residual: s.residual_check(seed + k as u64)? })
            })
            .collect()
    }
}

impl LinearOperator for SweepPreconditioner {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let u = SweepPreconditioner::apply(self, x).expect("input length matches the grid");
        y.copy_from_slice(&u);
    }
}
