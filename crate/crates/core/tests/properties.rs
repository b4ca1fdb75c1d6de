//! Randomized invariants.

use std::f64::consts::PI;

use helmsweep::pml::stretch_from_sigma;
use helmsweep::solve::{factor_banded, reorder_quasi1d};
use helmsweep::vecops::rel_diff;
use helmsweep::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn preconditioner(dim: usize, n: usize, gamma: usize, b: usize, freq: f64, seed: u64) -> SweepPreconditioner {
    let grid = GridSpec::new(dim, n, 2.0 * PI * freq).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vel = VelocityField::from_fn(&grid, |_| rng.random_range(0.7..1.3)).unwrap();
    SweepPreconditioner::setup(&grid, &vel, &SweepConfig::new(dim, gamma, b, 20.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_covers_once(n in 1usize..400, gamma in 2usize..14, b in 1usize..14, aux in 2usize..14) {
        match LayerPartition::new(n, gamma, aux, b) {
            Ok(p) => {
                let mut next = 1;
                for &(lo, hi) in p.slabs() {
                    prop_assert_eq!(lo, next);
                    prop_assert!(hi >= lo);
                    next = hi + 1;
                }
                prop_assert_eq!(next, n + 1);
                prop_assert_eq!(p.all_extended().len(), 3 * p.m() - 2);
                for e in p.all_extended() {
                    prop_assert!(e.first >= 1 && e.last <= n);
                    match e.kind {
                        Kind::Right => prop_assert_eq!(e.trace, Some(p.slab(e.slab).0 - 1)),
                        Kind::Left => prop_assert_eq!(e.trace, Some(p.slab(e.slab).1 + 1)),
                        Kind::Middle => prop_assert_eq!(e.trace, None),
                    }
                }
            }
            Err(_) => prop_assert!(n <= 2 * (gamma - 1) || aux > gamma),
        }
    }

    #[test]
    fn stretch_is_contractive(sigma in 0.0f64..1e4, omega in 0.1f64..1e3) {
        let s = stretch_from_sigma(sigma, omega);
        prop_assert!(s.norm() <= 1.0 + 1e-15);
        prop_assert!(s.re > 0.0 && s.im <= 0.0);
    }

    #[test]
    fn global_profile_is_mirror_symmetric(k in 1usize..200, gamma in 2usize..10) {
        let n = 200;
        let h = 1.0 / (n + 1) as f64;
        let prof = PmlProfile::global(20.0, gamma as f64 * h, PmlSides::BOTH).unwrap();
        let x = k as f64 * h;
        let (a, b) = (prof.sigma(x).unwrap(), prof.sigma(1.0 - x).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn symmetrized_operators_are_symmetric(dim in 1usize..4, seed in any::<u64>()) {
        let n = [0, 40, 14, 7][dim];
        let grid = GridSpec::new(dim, n, 2.0 * PI * 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vel = VelocityField::from_fn(&grid, |_| rng.random_range(0.7..1.3)).unwrap();
        let a = assemble_global(&grid, &vel, &global_profiles(&grid, 20.0, 3).unwrap()).unwrap();
        prop_assert!(a.is_structurally_symmetric());
        for i in 0..a.nrows() {
            prop_assert!(a.row(i).0.len() <= 2 * dim + 1);
        }
        let (s, _) = symmetrize(&a);
        prop_assert!(s.symmetry_defect() <= 1e-14);
    }

    #[test]
    fn banded_solve_is_linear(seed in any::<u64>()) {
        let grid = GridSpec::new(2, 16, 2.0 * PI * 3.0).unwrap();
        let vel = VelocityField::constant(&grid, 1.0).unwrap();
        let a = assemble_global(&grid, &vel, &global_profiles(&grid, 20.0, 3).unwrap()).unwrap();
        let (r, _) = reorder_quasi1d(&a);
        let lu = factor_banded(&r).unwrap();
        let g1 = random_vec(r.nrows(), seed);
        let g2 = random_vec(r.nrows(), seed.wrapping_add(1));
        let (al, be) = (Complex64::new(1.5, -0.5), Complex64::new(-0.25, 2.0));
        let comb: Vec<Complex64> = g1.iter().zip(&g2).map(|(x, y)| al * x + be * y).collect();
        let v1 = lu.solve(&g1).unwrap();
        let v2 = lu.solve(&g2).unwrap();
        let expect: Vec<Complex64> = v1.iter().zip(&v2).map(|(x, y)| al * x + be * y).collect();
        prop_assert!(rel_diff(&lu.solve(&comb).unwrap(), &expect) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn accumulation_identity(dim in 1usize..3, m in 2usize..7, b in 2usize..6, seed in any::<u64>()) {
        let gamma = 3;
        let n = 2 * (gamma - 1) + (m - 1) * b + 1;
        prop_assume!(dim == 1 && n <= 60 || dim == 2 && n <= 63);
        let pc = preconditioner(dim, n, gamma, b, 2.0, seed);
        prop_assert_eq!(pc.partition().m(), m);
        let f = random_vec(pc.grid().len(), seed ^ 0x5eed);
        let fast = pc.apply(&f).unwrap();
        let (slow, _) = pc.apply_naive(&f).unwrap();
        prop_assert!(rel_diff(&fast, &slow) <= 1e-13);
    }

    #[test]
    fn apply_is_linear_and_deterministic(seed in any::<u64>()) {
        let pc = preconditioner(2, 24, 3, 4, 2.0, seed);
        let f = random_vec(pc.grid().len(), seed);
        let g = random_vec(pc.grid().len(), seed.wrapping_mul(3));
        let (al, be) = (Complex64::new(0.5, 1.0), Complex64::new(2.0, -1.0));
        let comb: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| al * x + be * y).collect();
        let uf = pc.apply(&f).unwrap();
        let ug = pc.apply(&g).unwrap();
        let expect: Vec<Complex64> = uf.iter().zip(&ug).map(|(x, y)| al * x + be * y).collect();
        prop_assert!(rel_diff(&pc.apply(&comb).unwrap(), &expect) <= 1e-12);
        prop_assert_eq!(pc.apply(&f).unwrap(), uf);
    }
}
