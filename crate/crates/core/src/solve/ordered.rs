//! Multifrontal factorization under geometric nested dissection of the grid box.
//!
//! The box is bisected through its longest extent until pieces hold at most [`LEAF_POINTS`]
//! points; each cut plane is a separator. Nodes are eliminated in postorder on dense frontal
//! matrices, children passing their Schur complements to the parent by extend-add.

use matrixmultiply::{zgemm, CGemmOption};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::grid::{box_len, linear_index, multi_index};
use crate::sparse::{Permutation, SparseOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pieces of the box at most this large are eliminated as single fronts.
pub const LEAF_POINTS: usize = 64;

const PANEL: usize = 48;

/// Elimination variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrontMode {
    /// `P F = L U` with row pivoting inside each separator.
    Lu,
    /// `F = L D L^T` without pivoting, for complex-symmetric operators; stores only `L` and `D`.
    Symmetric,
}

/// Half-open box `[lo, hi)` per axis.
#[derive(Clone, Copy, Debug)]
struct Region {
    lo: [usize; 3],
    hi: [usize; 3],
}

impl Region {
    fn volume(&self) -> usize {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    fn contains(&self, idx: [usize; 3]) -> bool {
        (0..3).all(|a| self.lo[a] <= idx[a] && idx[a] < self.hi[a])
    }

    fn points(&self, ext: [usize; 3]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.volume());
        for k in self.lo[2]..self.hi[2] {
            for j in self.lo[1]..self.hi[1] {
                for i in self.lo[0]..self.hi[0] {
                    out.push(linear_index([i, j, k], ext));
                }
            }
        }
        out
    }
}

/// Dissection tree in postorder.
struct Plan {
    /// `(region, own points, children)` per node; children precede parents.
    nodes: Vec<(Region, Vec<usize>, Vec<usize>)>,
}

fn dissect(region: Region, ext: [usize; 3], nodes: &mut Vec<(Region, Vec<usize>, Vec<usize>)>) -> usize {
    let (axis, len) = (0..3).map(|a| (a, region.hi[a] - region.lo[a])).max_by_key(|&(a, l)| (l, 3 - a)).unwrap();
    if region.volume() <= LEAF_POINTS || len < 3 {
        nodes.push((region, region.points(ext), Vec::new()));
        return nodes.len() - 1;
    }
    let mid = region.lo[axis] + len / 2;
    let mut left = region;
    left.hi[axis] = mid;
    let mut right = region;
    right.lo[axis] = mid + 1;
    let mut sep = region;
    sep.lo[axis] = mid;
    sep.hi[axis] = mid + 1;
    let a = dissect(left, ext, nodes);
    let b = dissect(right, ext, nodes);
    nodes.push((region, sep.points(ext), vec![a, b]));
    nodes.len() - 1
}

#[derive(Clone, Debug)]
struct Front {
    /// First elimination index of the node's own variables.
    start: usize,
    ns: usize,
    /// Elimination indices of the boundary variables, increasing.
    boundary: Vec<usize>,
    /// Row interchanges within the own block (empty in symmetric mode).
    piv: Vec<usize>,
    /// `ns x ns`, column-major: unit `L11` below the diagonal, `U11` (or `D`) on and above.
    f11: Vec<Complex64>,
    /// `ns x nb`, column-major (empty in symmetric mode).
    u12: Vec<Complex64>,
    /// `nb x ns`, column-major.
    l21: Vec<Complex64>,
}

/// Sparse direct factorization of a box operator.
#[derive(Clone, Debug)]
pub struct OrderedFactorization {
    n: usize,
    mode: FrontMode,
    perm: Permutation,
    fronts: Vec<Front>,
}

/// Fill and size statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FillStats {
    pub fronts: usize,
    pub largest_front: usize,
    pub largest_separator: usize,
    /// Stored complex factor entries.
    pub factor_entries: usize,
}

fn c64p(x: *const Complex64) -> *const [f64; 2] {
    x.cast()
}

/// `C[m x n] -= A[m x k] B[k x n]`, all column-major with the given leading dimensions.
#[allow(clippy::too_many_arguments)]
unsafe fn gemm_sub(
    m: usize,
    k: usize,
    n: usize,
    a: *const Complex64,
    lda: usize,
    b: *const Complex64,
    ldb: usize,
    c: *mut Complex64,
    ldc: usize,
) {
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    zgemm(
        CGemmOption::Standard,
        CGemmOption::Standard,
        m,
        k,
        n,
        [-1.0, 0.0],
        c64p(a),
        1,
        lda as isize,
        c64p(b),
        1,
        ldb as isize,
        [1.0, 0.0],
        c.cast(),
        1,
        ldc as isize,
    );
}

/// Eliminate the first `ns` columns of the `nf x nf` column-major front in place, pivoting
/// within rows `< ns` when `pivot` is set. Returns the interchanges.
fn partial_factor(f: &mut [Complex64], nf: usize, ns: usize, pivot: bool) -> Result<Vec<usize>> {
    let mut piv = Vec::with_capacity(if pivot { ns } else { 0 });
    let mut k = 0;
    while k < ns {
        let w = PANEL.min(ns - k);
        for j in k..k + w {
            let col = j * nf;
            if pivot {
                let mut p = j;
                let mut best = f[col + j].norm_sqr();
                for i in j + 1..ns {
                    let v = f[col + i].norm_sqr();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                piv.push(p);
                if p != j {
                    for c in 0..nf {
                        f.swap(c * nf + j, c * nf + p);
                    }
                }
            }
            let d = f[col + j];
            if d == ZERO {
                return Err(Error::Singular { step: j });
            }
            let inv = d.inv();
            for x in &mut f[col + j + 1..col + nf] {
                *x *= inv;
            }
            // rank-one update of the remaining panel columns
            let (head, tail) = f.split_at_mut(col + nf);
            let l = &head[col + j + 1..col + nf];
            for c in j + 1..k + w {
                let off = (c - j - 1) * nf;
                let u = tail[off + j];
                if u == ZERO {
                    continue;
                }
                for (x, li) in tail[off + j + 1..off + nf].iter_mut().zip(l) {
                    *x -= li * u;
                }
            }
        }
        let rest = k + w;
        if rest < nf {
            // U block row: solve the unit-lower panel triangle for columns right of the panel
            for c in rest..nf {
                let cb = c * nf;
                for j in k..rest {
                    let u = f[cb + j];
                    if u == ZERO {
                        continue;
                    }
                    for i in j + 1..rest {
                        let l = f[j * nf + i];
                        f[cb + i] -= l * u;
                    }
                }
            }
            let m = nf - rest;
            let ptr = f.as_mut_ptr();
            // SAFETY: the three blocks are disjoint sub-rectangles of `f`.
            unsafe {
                gemm_sub(
                    m,
                    w,
                    m,
                    ptr.add(k * nf + rest),
                    nf,
                    ptr.add(rest * nf + k),
                    nf,
                    ptr.add(rest * nf + rest),
                    nf,
                );
            }
        }
        k = rest;
    }
    Ok(piv)
}

/// Factor `op` with a multifrontal method under nested dissection of its box.
pub fn factor_ordered(op: &SparseOperator, mode: FrontMode) -> Result<OrderedFactorization> {
    let n = op.nrows();
    let ext = op.extents();
    check_len(box_len(ext), n)?;
    let mut nodes = Vec::new();
    if n > 0 {
        dissect(Region { lo: [0; 3], hi: ext }, ext, &mut nodes);
    }
    let plan = Plan { nodes };

    // elimination numbering: own variables of each node, nodes in postorder
    let mut new_to_old = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(plan.nodes.len());
    for (_, own, _) in &plan.nodes {
        starts.push(new_to_old.len());
        new_to_old.extend_from_slice(own);
    }
    let perm = Permutation::new(new_to_old).ok_or_else(|| Error::Domain("dissection does not cover the box".into()))?;
    let elim = perm.inverse();

    let mut pos = vec![usize::MAX; n];
    let mut stack: Vec<(Vec<usize>, Vec<Complex64>)> = Vec::new();
    let mut fronts = Vec::with_capacity(plan.nodes.len());
    for (node, (region, own, children)) in plan.nodes.iter().enumerate() {
        let ns = own.len();
        let start = starts[node];
        let mut boundary: Vec<usize> = Vec::new();
        for &g in &region.points(ext) {
            for &j in op.row(g).0 {
                if !region.contains(multi_index(j, ext)) {
                    boundary.push(elim[j]);
                }
            }
        }
        boundary.sort_unstable();
        boundary.dedup();
        debug_assert!(boundary.iter().all(|&e| e >= start + ns));
        let nb = boundary.len();
        let nf = ns + nb;
        for (k, &g) in own.iter().enumerate() {
            pos[g] = k;
        }
        for (k, &e) in boundary.iter().enumerate() {
            pos[perm.old_of(e)] = ns + k;
        }

        let mut f = vec![ZERO; nf * nf];
        for (k, &g) in own.iter().enumerate() {
            let (c, v) = op.row(g);
            for (&j, &a) in c.iter().zip(v) {
                let pj = pos[j];
                if pj == usize::MAX {
                    continue;
                }
                f[pj * nf + k] = a;
                if pj >= ns {
                    f[k * nf + pj] = op.get(j, g);
                }
            }
        }
        // extend-add of child updates (children were pushed in order, so pop in reverse)
        for _ in children {
            let (cb, s) = stack.pop().expect("child update present");
            let local: Vec<usize> = cb.iter().map(|&e| pos[perm.old_of(e)]).collect();
            debug_assert!(local.iter().all(|&p| p != usize::MAX));
            let m = cb.len();
            for (cj, &pj) in local.iter().enumerate() {
                let dst = pj * nf;
                for (ci, &pi) in local.iter().enumerate() {
                    f[dst + pi] += s[cj * m + ci];
                }
            }
        }
        for &g in own {
            pos[g] = usize::MAX;
        }
        for &e in &boundary {
            pos[perm.old_of(e)] = usize::MAX;
        }

        let piv = partial_factor(&mut f, nf, ns, mode == FrontMode::Lu).map_err(|e| match e {
            Error::Singular { step } => Error::Singular { step: start + step },
            other => other,
        })?;

        let mut f11 = vec![ZERO; ns * ns];
        for j in 0..ns {
            f11[j * ns..(j + 1) * ns].copy_from_slice(&f[j * nf..j * nf + ns]);
        }
        let mut l21 = vec![ZERO; nb * ns];
        for j in 0..ns {
            l21[j * nb..(j + 1) * nb].copy_from_slice(&f[j * nf + ns..(j + 1) * nf]);
        }
        let u12 = if mode == FrontMode::Lu {
            let mut u = vec![ZERO; ns * nb];
            for j in 0..nb {
                u[j * ns..(j + 1) * ns].copy_from_slice(&f[(ns + j) * nf..(ns + j) * nf + ns]);
            }
            u
        } else {
            Vec::new()
        };
        if nb > 0 {
            let mut s = vec![ZERO; nb * nb];
            for j in 0..nb {
                s[j * nb..(j + 1) * nb].copy_from_slice(&f[(ns + j) * nf + ns..(ns + j + 1) * nf]);
            }
            stack.push((boundary.clone(), s));
        }
        fronts.push(Front { start, ns, boundary, piv, f11, u12, l21 });
    }
    Ok(OrderedFactorization { n, mode, perm, fronts })
}

impl OrderedFactorization {
    pub fn extent(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> FrontMode {
        self.mode
    }

    /// Elimination order: position `k` holds the original index eliminated `k`-th.
    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn stats(&self) -> FillStats {
        let mut s = FillStats { fronts: self.fronts.len(), ..FillStats::default() };
        for f in &self.fronts {
            s.largest_front = s.largest_front.max(f.ns + f.boundary.len());
            s.largest_separator = s.largest_separator.max(f.ns);
            s.factor_entries += f.f11.len() + f.u12.len() + f.l21.len();
        }
        s
    }

    /// Solve `H v = g` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        check_len(self.n, b.len())?;
        let mut x = self.perm.gather(b);
        let mut y = Vec::new();
        for fr in &self.fronts {
            let (ns, nb) = (fr.ns, fr.boundary.len());
            let own = &mut x[fr.start..fr.start + ns];
            for (j, &p) in fr.piv.iter().enumerate() {
                own.swap(j, p);
            }
            for j in 0..ns {
                let xj = own[j];
                if xj == ZERO {
                    continue;
                }
                let col = &fr.f11[j * ns..(j + 1) * ns];
                for i in j + 1..ns {
                    own[i] -= col[i] * xj;
                }
            }
            y.clear();
            y.resize(nb, ZERO);
            for j in 0..ns {
                let xj = own[j];
                if xj == ZERO {
                    continue;
                }
                for (yi, l) in y.iter_mut().zip(&fr.l21[j * nb..(j + 1) * nb]) {
                    *yi += l * xj;
                }
            }
            for (&e, yi) in fr.boundary.iter().zip(&y) {
                x[e] -= yi;
            }
        }
        for fr in self.fronts.iter().rev() {
            let (ns, nb) = (fr.ns, fr.boundary.len());
            let xb: Vec<Complex64> = fr.boundary.iter().map(|&e| x[e]).collect();
            let own = &mut x[fr.start..fr.start + ns];
            match self.mode {
                FrontMode::Lu => {
                    for (j, &xj) in xb.iter().enumerate() {
                        if xj == ZERO {
                            continue;
                        }
                        for (o, u) in own.iter_mut().zip(&fr.u12[j * ns..(j + 1) * ns]) {
                            *o -= u * xj;
                        }
                    }
                    for j in (0..ns).rev() {
                        own[j] /= fr.f11[j * ns + j];
                        let xj = own[j];
                        if xj == ZERO {
                            continue;
                        }
                        for i in 0..j {
                            own[i] -= fr.f11[j * ns + i] * xj;
                        }
                    }
                }
                FrontMode::Symmetric => {
                    // U11 = D L11^T and U12 = D L21^T
                    for (j, o) in own.iter_mut().enumerate() {
                        *o /= fr.f11[j * ns + j];
                        let l = &fr.l21[j * nb..(j + 1) * nb];
                        let s: Complex64 = l.iter().zip(&xb).map(|(a, b)| a * b).sum();
                        *o -= s;
                    }
                    for j in (0..ns).rev() {
                        let col = &fr.f11[j * ns..(j + 1) * ns];
                        let mut s = ZERO;
                        for i in j + 1..ns {
                            s += col[i] * own[i];
                        }
                        own[j] -= s;
                    }
                }
            }
        }
        b.copy_from_slice(&self.perm.scatter(&x));
        Ok(())
    }

    pub fn solve(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = g.to_vec();
        self.solve_in_place(&mut v)?;
        Ok(v)
    }
}
