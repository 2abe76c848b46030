mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use weakmeas_core::hilbert::{
    eig_hermitian, evolve, evolve_coupling, partial_trace_meter, tensor_op, tensor_state,
};
use weakmeas_core::{Complex64, DensityMatrix64, Observable64};

#[test]
fn random_8x8_reconstruction_and_orthonormality() {
    let mut r = rng(2024);
    let a = random_hermitian(&mut r, 8);
    let spec = eig_hermitian(&a);
    assert!(max_entry_diff(&spec.reconstruct(), a.matrix()) <= 1e-10);
    let v = spec.basis();
    let gram = v.adjoint() * v;
    assert!(max_entry_diff(&gram, &DMatrix::identity(8, 8)) <= 1e-10);
    assert!(spec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn tensor_op_acts_factorwise() {
    let mut r = rng(5);
    let a = random_hermitian(&mut r, 3);
    let g = random_hermitian(&mut r, 4);
    let s = random_state(&mut r, 3);
    let m = random_state(&mut r, 4);
    let lhs = tensor_op(&a, &g).apply(&tensor_state(&s, &m)).unwrap();
    let rhs = tensor_state(&a.apply(&s).unwrap(), &g.apply(&m).unwrap());
    for (x, y) in lhs.amps().iter().zip(rhs.amps()) {
        assert!((x - y).norm() <= 1e-12);
    }
}

#[test]
fn product_state_inner_and_norm_factorize() {
    let mut r = rng(6);
    let (s, s2) = (random_state(&mut r, 3), random_state(&mut r, 3));
    let (m, m2) = (random_state(&mut r, 5), random_state(&mut r, 5));
    let lhs = tensor_state(&s, &m).inner(&tensor_state(&s2, &m2)).unwrap();
    let rhs = s.inner(&s2).unwrap() * m.inner(&m2).unwrap();
    assert!((lhs - rhs).norm() <= 1e-14);
    let big = s.scaled(Complex64::new(2.0, 1.0));
    let prod = tensor_state(&big, &m.scaled(Complex64::new(0.0, 3.0)));
    assert!((prod.norm() - big.norm() * 3.0).abs() <= 1e-13);
}

#[test]
fn factored_evolution_matches_dense_at_eps_point_one() {
    let mut r = rng(77);
    let a = random_hermitian(&mut r, 3);
    let g = random_hermitian(&mut r, 5);
    let v = random_state(&mut r, 15);
    let fast = evolve_coupling(&a, &g, 0.1, &v).unwrap();
    let dense = evolve(&tensor_op(&a, &g), 0.1, &v).unwrap();
    for (x, y) in fast.amps().iter().zip(dense.amps()) {
        assert!((x - y).norm() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_is_unitary(seed in any::<u64>(), dim in 1usize..12, eps in 0.0f64..1.0) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let v = random_state(&mut r, dim);
        let out = evolve(&h, eps, &v).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectral_reconstruction(seed in any::<u64>(), dim in 1usize..=64) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, dim);
        let spec = a.spectrum();
        prop_assert!(max_entry_diff(&spec.reconstruct(), a.matrix()) <= 1e-10);
    }

    #[test]
    fn tensor_factorization_of_matrix_elements(seed in any::<u64>(), ds in 1usize..5, dm in 1usize..5) {
        let mut r = rng(seed);
        let (x, y) = (random_hermitian(&mut r, ds), random_hermitian(&mut r, dm));
        let (s, s2) = (random_state(&mut r, ds), random_state(&mut r, ds));
        let (m, m2) = (random_state(&mut r, dm), random_state(&mut r, dm));
        let lhs = tensor_state(&s, &m)
            .inner(&tensor_op(&x, &y).apply(&tensor_state(&s2, &m2)).unwrap())
            .unwrap();
        let rhs = s.inner(&x.apply(&s2).unwrap()).unwrap() * m.inner(&y.apply(&m2).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn group_property(seed in any::<u64>(), dim in 1usize..10, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let v = random_state(&mut r, dim);
        let two_step = evolve(&h, e1, &evolve(&h, e2, &v).unwrap()).unwrap();
        let one_step = evolve(&h, e1 + e2, &v).unwrap();
        prop_assert!(two_step.sub(&one_step).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn factored_equals_dense(seed in any::<u64>(), ds in 1usize..5, dm in 1usize..6, eps in 0.0f64..1.0) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, ds);
        let g = random_hermitian(&mut r, dm);
        let v = random_state(&mut r, ds * dm);
        let fast = evolve_coupling(&a, &g, eps, &v).unwrap();
        let dense = evolve(&tensor_op(&a, &g), eps, &v).unwrap();
        for (x, y) in fast.amps().iter().zip(dense.amps()) {
            prop_assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn partial_trace_is_a_density_matrix(seed in any::<u64>(), ds in 1usize..4, dm in 1usize..4, k in 1usize..4) {
        let mut r = rng(seed);
        // random mixture of k pure states on S (x) M
        let mut acc = DMatrix::<Complex64>::zeros(ds * dm, ds * dm);
        let weights: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &weights {
            let v = random_state(&mut r, ds * dm);
            let p = v.as_vector() * v.as_vector().adjoint();
            acc += p * Complex64::new(w / total, 0.0);
        }
        let rho = DensityMatrix64::new(acc).unwrap();
        let red = partial_trace_meter(&rho, ds, dm).unwrap();
        prop_assert!((red.trace() - 1.0).abs() <= 1e-10);
        prop_assert!(red.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn partial_trace_of_product_scales_with_meter_trace(seed in any::<u64>(), ds in 1usize..4, dm in 1usize..4) {
        let mut r = rng(seed);
        let s = random_state(&mut r, ds);
        let rho_s = DensityMatrix64::from_pure(&s).unwrap();
        let m = random_state(&mut r, dm);
        let rho_m = DensityMatrix64::from_pure(&m).unwrap();
        let prod = DensityMatrix64::new(rho_s.matrix().kronecker(rho_m.matrix())).unwrap();
        let red = prod.partial_trace_meter(ds, dm).unwrap();
        prop_assert!(max_entry_diff(red.matrix(), rho_s.matrix()) <= 1e-12);
    }

    #[test]
    fn projectors_are_idempotent(seed in any::<u64>(), dim in 1usize..8, scale in 0.1f64..10.0) {
        let mut r = rng(seed);
        let w = random_state(&mut r, dim).scaled(Complex64::new(scale, 0.0));
        let p = weakmeas_core::hilbert::projector(&w).unwrap();
        let p2 = p.matrix() * p.matrix();
        prop_assert!(max_entry_diff(&p2, p.matrix()) <= 1e-12);
        prop_assert!((p.matrix().trace().re - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn identity_observable_is_fully_degenerate() {
    let spec = Observable64::identity(5).spectrum().clone();
    assert_eq!(spec.groups().len(), 1);
    assert_eq!(spec.groups()[0].len(), 5);
}
