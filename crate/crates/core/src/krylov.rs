//! Restarted GMRES with right preconditioning.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::sparse::LinearOperator;
use crate::vecops::{axpy, dot, norm2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reorthogonalize when one Gram-Schmidt pass shrinks the vector below this fraction.
const REORTH_RATIO: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmresConfig {
    pub rel_tol: f64,
    pub restart: usize,
    pub max_outer: usize,
    pub record_history: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-3, restart: 40, max_outer: 10, record_history: true }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.restart == 0 || self.max_outer == 0 {
            return Err(Error::Config("restart and max_outer must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    /// Inner iterations, one operator and one preconditioner application each.
    pub iterations: usize,
    /// Relative residual after every inner iteration.
    pub residual_history: Vec<f64>,
    /// `(inner iteration, true relative residual)` at the end of every restart cycle.
    pub restart_residuals: Vec<(usize, f64)>,
    pub converged: bool,
    /// A Krylov space became invariant before the target was reached.
    pub breakdown: bool,
    pub final_residual: f64,
    pub wall_time: Duration,
}

/// Relative residual `||f - A u|| / ||f||`; when `f = 0` the absolute `||A u||` with the flag set.
pub fn operator_residual<A: LinearOperator + ?Sized>(a: &A, u: &[Complex64], f: &[Complex64]) -> Result<(f64, bool)> {
    check_len(a.dim(), u.len())?;
    check_len(a.dim(), f.len())?;
    let mut r = vec![ZERO; f.len()];
    a.apply(u, &mut r);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    let nf = norm2(f);
    if nf == 0.0 {
        Ok((norm2(&r), true))
    } else {
        Ok((norm2(&r) / nf, false))
    }
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)` with `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO, a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, Complex64::new(nb, 0.0));
    }
    let nrm = na.hypot(nb);
    let phase = a / na;
    let c = na / nrm;
    let s = phase * b.conj() / nrm;
    (c, s, phase * nrm)
}

/// Solve `A u = f` with GMRES on `A M y = f`, `u = M y`, from a zero initial guess.
pub fn gmres_solve<A, M>(a: &A, m: &M, f: &[Complex64], cfg: &GmresConfig) -> Result<(Vec<Complex64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    cfg.validate()?;
    let n = a.dim();
    check_len(n, f.len())?;
    check_len(n, m.dim())?;
    let start = Instant::now();
    let mut u = vec![ZERO; n];
    let mut report = SolveReport {
        iterations: 0,
        residual_history: Vec::new(),
        restart_residuals: Vec::new(),
        converged: false,
        breakdown: false,
        final_residual: 1.0,
        wall_time: Duration::ZERO,
    };
    let nf = norm2(f);
    if nf == 0.0 {
        report.converged = true;
        report.final_residual = 0.0;
        report.wall_time = start.elapsed();
        return Ok((u, report));
    }
    let k = cfg.restart;
    let mut r = f.to_vec();
    let mut z = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for _ in 0..cfg.max_outer {
        let beta = norm2(&r);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k + 1);
        basis.push(r.iter().map(|x| x / beta).collect());
        // Hessenberg columns after rotation, rotations, and the rotated right-hand side
        let mut hcols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(k);
        let mut gvec = vec![Complex64::new(beta, 0.0)];
        let mut done = false;
        for j in 0..k {
            m.apply(&basis[j], &mut z);
            a.apply(&z, &mut w);
            report.iterations += 1;
            let mut h = vec![ZERO; j + 2];
            let before = norm2(&w);
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] = c;
                axpy(-c, v, &mut w);
            }
            let mut after = norm2(&w);
            if after < REORTH_RATIO * before {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    h[i] += c;
                    axpy(-c, v, &mut w);
                }
                after = norm2(&w);
            }
            h[j + 1] = Complex64::new(after, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let t = c * h[i] + s * h[i + 1];
                h[i + 1] = -s.conj() * h[i] + c * h[i + 1];
                h[i] = t;
            }
            let (c, s, rr) = givens(h[j], h[j + 1]);
            h[j] = rr;
            h[j + 1] = ZERO;
            rot.push((c, s));
            let gj = gvec[j];
            gvec[j] = c * gj;
            gvec.push(-s.conj() * gj);
            hcols.push(h);
            let res = gvec[j + 1].norm() / nf;
            if cfg.record_history {
                report.residual_history.push(res);
            }
            report.final_residual = res;
            let invariant = after <= f64::EPSILON * before.max(f64::MIN_POSITIVE) || after == 0.0;
            if res <= cfg.rel_tol || invariant {
                report.breakdown = invariant && res > cfg.rel_tol;
                done = true;
                break;
            }
            basis.push(w.iter().map(|x| x / after).collect());
        }
        // back substitution for the cycle's coefficients
        let jm = (0..hcols.len()).find(|&i| hcols[i][i] == ZERO).unwrap_or(hcols.len());
        let mut y = vec![ZERO; jm];
        for i in (0..jm).rev() {
            let mut s = gvec[i];
            for l in i + 1..jm {
                s -= hcols[l][i] * y[l];
            }
            y[i] = s / hcols[i][i];
        }
        let mut v = vec![ZERO; n];
        for (yi, b) in y.iter().zip(&basis) {
            axpy(*yi, b, &mut v);
        }
        m.apply(&v, &mut z);
        axpy(Complex64::new(1.0, 0.0), &z, &mut u);
        a.apply(&u, &mut w);
        for ((ri, fi), wi) in r.iter_mut().zip(f).zip(&w) {
            *ri = fi - wi;
        }
        let true_res = norm2(&r) / nf;
        report.restart_residuals.push((report.iterations, true_res));
        report.final_residual = true_res;
        if done {
            report.converged = true_res <= cfg.rel_tol;
            break;
        }
        if true_res <= cfg.rel_tol {
            report.converged = true;
            break;
        }
    }
    report.wall_time = start.elapsed();
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::sparse::{FnOperator, Identity, SparseOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn random_sparse(n: usize, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Complex64::new(4.0 + rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0))
                        } else if rng.random_range(0.0..1.0) < 0.2 {
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        } else {
                            ZERO
                        }
                    })
                    .collect()
            })
            .collect();
        SparseOperator::from_dense(&rows)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let f = random_vec(20, 1);
        let (u, rep) = gmres_solve(&Identity(20), &Identity(20), &f, &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert!(u.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn scaled_identity() {
        let a = FnOperator::new(5, |x: &[Complex64], y: &mut [Complex64]| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi * 2.0;
            }
        });
        let f = vec![Complex64::new(1.0, 0.0); 5];
        let (u, rep) = gmres_solve(&a, &Identity(5), &f, &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(u.iter().all(|x| (x - Complex64::new(0.5, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn exact_preconditioner_takes_one_iteration() {
        let a = random_sparse(40, 2);
        let lu = DenseMatrix::from_sparse(&a).lu().unwrap();
        let minv = FnOperator::new(40, move |x: &[Complex64], y: &mut [Complex64]| {
            y.copy_from_slice(&lu.solve(x).unwrap());
        });
        let f = random_vec(40, 3);
        let cfg = GmresConfig { rel_tol: 1e-10, ..GmresConfig::default() };
        let (u, rep) = gmres_solve(&a, &minv, &f, &cfg).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(operator_residual(&a, &u, &f).unwrap().0 <= 1e-10);
    }

    #[test]
    fn history_monotone_and_restart_residuals_are_true() {
        let a = random_sparse(60, 4);
        let f = random_vec(60, 5);
        let cfg = GmresConfig { rel_tol: 1e-12, restart: 5, max_outer: 40, record_history: true };
        let (u, rep) = gmres_solve(&a, &Identity(60), &f, &cfg).unwrap();
        assert!(rep.converged);
        for cycle in rep.residual_history.chunks(5) {
            assert!(cycle.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
        let (last_it, last_res) = *rep.restart_residuals.last().unwrap();
        assert_eq!(last_it, rep.iterations);
        assert!((last_res - operator_residual(&a, &u, &f).unwrap().0).abs() <= 1e-10);
        // the Arnoldi estimate at each restart boundary agrees with the true residual
        for &(it, res) in &rep.restart_residuals {
            let est = rep.residual_history[it - 1];
            assert!((est - res).abs() <= 1e-10 + 1e-6 * res, "{est} vs {res}");
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let a = random_sparse(50, 6);
        let f = random_vec(50, 7);
        let cfg = GmresConfig { rel_tol: 1e-14, restart: 2, max_outer: 3, record_history: true };
        let (_, rep) = gmres_solve(&a, &Identity(50), &f, &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 6);
        assert_eq!(rep.restart_residuals.len(), 3);
    }

    #[test]
    fn zero_rhs_and_residual_conventions() {
        let a = random_sparse(10, 8);
        let zero = vec![ZERO; 10];
        let (u, rep) = gmres_solve(&a, &Identity(10), &zero, &GmresConfig::default()).unwrap();
        assert!(rep.converged && rep.iterations == 0 && u == zero);
        let f = random_vec(10, 9);
        assert_eq!(operator_residual(&a, &zero, &f).unwrap(), (1.0, false));
        let u = random_vec(10, 10);
        let (r1, _) = operator_residual(&a, &u, &f).unwrap();
        let (r10, _) = operator_residual(
            &a,
            &u.iter().map(|x| x * 10.0).collect::<Vec<_>>(),
            &f.iter().map(|x| x * 10.0).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((r1 - r10).abs() <= 1e-15 * r1.max(1.0));
        let (abs, flag) = operator_residual(&a, &u, &zero).unwrap();
        assert!(flag && abs > 0.0);
    }

    #[test]
    fn breakdown_is_reported_not_fatal() {
        // A nilpotent map: the Krylov space of e_0 becomes invariant with zero image.
        let a = FnOperator::new(3, |x: &[Complex64], y: &mut [Complex64]| {
            y[0] = ZERO;
            y[1] = x[0];
            y[2] = x[1];
        });
        let f = vec![Complex64::new(1.0, 0.0), ZERO, ZERO];
        let (_, rep) = gmres_solve(&a, &Identity(3), &f, &GmresConfig::default()).unwrap();
        assert!(!rep.converged);
        assert!(rep.iterations <= 400);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = GmresConfig { rel_tol: 0.0, ..GmresConfig::default() };
        assert!(gmres_solve(&Identity(2), &Identity(2), &[ZERO; 2], &cfg).is_err());
    }
}
