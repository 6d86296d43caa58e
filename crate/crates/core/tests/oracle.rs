//! Analytic routes against the truncated Fock-space reference.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use precs_core::dynamics::{analytic_trajectory, branch_overlap, coherent_overlap, reduced_density_matrix};
use precs_core::fock::{branch_hamiltonian_matrix, coherent_fock_vector, FockOracle, FockVector};
use precs_core::model::{classical_hamiltonian, DensityMatrix, ModelParams, PrincipalAmplitudes};
use precs_core::precs::chi_squared;

fn fig1() -> (ModelParams, PrincipalAmplitudes) {
    (
        ModelParams::qubit_boson(2.0, 1.0).unwrap(),
        PrincipalAmplitudes::from_weights(&[0.25, 0.75]).unwrap(),
    )
}

/// `⟨ψ|H|ψ⟩` for a real symmetric matrix.
fn expectation(h: &DMatrix<f64>, v: &FockVector) -> f64 {
    let a = v.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            if h[(i, j)] != 0.0 {
                acc += a[i].conj() * h[(i, j)] * a[j];
            }
        }
    }
    acc.re
}

#[test]
fn classical_hamiltonian_is_fock_expectation() {
    let (p, _) = fig1();
    let h: Vec<_> = (0..2).map(|g| branch_hamiltonian_matrix(&p, g, 128)).collect();
    // Frozen examples.
    let one = coherent_fock_vector(1.0, Complex64::new(1.0, 0.0), 64).unwrap();
    assert!((expectation(&branch_hamiltonian_matrix(&p, 0, 64), &one) - 5.0).abs() < 1e-10);
    let i = coherent_fock_vector(1.0, Complex64::new(0.0, 1.0), 64).unwrap();
    assert!((expectation(&branch_hamiltonian_matrix(&p, 1, 64), &i) - 1.0).abs() < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let omega = Complex64::from_polar(rng.gen_range(0.0..6.0), rng.gen_range(0.0..TAU));
        let v = coherent_fock_vector(1.0, omega, 128).unwrap();
        for g in 0..2 {
            let d = expectation(&h[g], &v) - classical_hamiltonian(&p, g, omega);
            assert!(d.abs() < 1e-8, "Ω = {omega}, Δ = {d}");
        }
    }
}

#[test]
fn coherent_overlap_matches_fock_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zero = coherent_fock_vector(1.0, Complex64::new(0.0, 0.0), 64).unwrap();
    let one = coherent_fock_vector(1.0, Complex64::new(1.0, 0.0), 64).unwrap();
    let two = coherent_fock_vector(1.0, Complex64::new(2.0, 0.0), 64).unwrap();
    assert!((zero.inner(&one).re - 0.60653).abs() < 1e-5);
    assert!((zero.inner(&two).norm() - 0.13534).abs() < 1e-5);
    for &hbar in &[1.0, 0.5, 2.0] {
        for _ in 0..20 {
            let a = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let b = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let fa = coherent_fock_vector(hbar, a, 128).unwrap();
            let fb = coherent_fock_vector(hbar, b, 128).unwrap();
            assert!((fa.inner(&fb) - coherent_overlap(hbar, a, b)).norm() < 1e-12);
        }
    }
}

#[test]
fn reduced_state_matches_partial_trace_over_a_period() {
    let (p, c) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    for k in 0..=80 {
        let t = k as f64 * PI / 40.0;
        let exact = oracle.exact_rho_gamma(&c, t).unwrap();
        let closed = reduced_density_matrix(&p, &c, t).unwrap();
        assert!(exact.trace_distance(&closed) < 1e-6, "t = {t}");
        assert!(exact.validate().is_ok());
    }
    let back = oracle.exact_rho_gamma(&c, TAU).unwrap();
    assert!(back.trace_distance(&DensityMatrix::pure(&c)) < 1e-10);
}

#[test]
fn branch_overlaps_match_fock_inner_products() {
    let (p, _) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    for &t in &[0.0, 0.3, PI / 2.0, PI, 4.0] {
        let plus = oracle.propagate_branch(0, t).unwrap();
        let minus = oracle.propagate_branch(1, t).unwrap();
        let d = minus.inner(&plus) - branch_overlap(&p, 1, 0, t);
        assert!(d.norm() < 1e-12, "t = {t}: {d}");
    }
    let plus = oracle.propagate_branch(0, PI).unwrap();
    let minus = oracle.propagate_branch(1, PI).unwrap();
    let mag = minus.inner(&plus).norm();
    // e^{−32} sits at the round-off floor of the Fock sum: compare absolutely.
    assert!((mag - (-32.0f64).exp()).abs() < 1e-15, "{mag:e}");
}

#[test]
fn phase_contract_holds_for_three_levels_and_other_hbar() {
    for p in [
        ModelParams::new(1.3, 0.7, 1.0, &[1.0, 0.2, -0.8]).unwrap(),
        ModelParams::new(1.0, 1.0, 0.5, &[1.0, -1.0]).unwrap(),
        ModelParams::new(0.8, 0.0, 1.0, &[1.0, -1.0]).unwrap(),
    ] {
        let oracle = FockOracle::new(&p, 160).unwrap();
        for g in 0..p.levels() {
            for &t in &[PI / 10.0, 1.0, 2.5] {
                let (fid, res) = oracle.fidelity_phase_check(g, t).unwrap();
                assert!(fid > 1.0 - 1e-8, "{p:?} γ={g} t={t}: {fid}");
                assert!(res.abs() < 1e-6, "{p:?} γ={g} t={t}: {res}");
            }
        }
    }
}

#[test]
fn half_period_branch_vectors_are_antipodal_coherent_states() {
    let (p, _) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    for g in 0..2 {
        let xi = oracle.propagate_branch(g, PI).unwrap();
        let probe = coherent_fock_vector(1.0, analytic_trajectory(&p, g, PI), 128).unwrap();
        assert!(probe.inner(&xi).norm() > 1.0 - 1e-8);
    }
}

#[test]
fn propagation_is_unitary() {
    let (p, _) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    for k in 0..40 {
        let t = k as f64 * 0.31;
        for g in 0..2 {
            let v = oracle.propagate_branch(g, t).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-10);
            assert!(v.tail_weight() < 1e-12);
        }
    }
}

#[test]
fn overlaps_converged_in_truncation() {
    let (p, _) = fig1();
    let small = FockOracle::new(&p, 128).unwrap();
    let large = FockOracle::new(&p, 256).unwrap();
    for &t in &[0.2, PI / 3.0, PI, 5.0] {
        let o128 = small.propagate_branch(1, t).unwrap().inner(&small.propagate_branch(0, t).unwrap());
        let o256 = large.propagate_branch(1, t).unwrap().inner(&large.propagate_branch(0, t).unwrap());
        assert!((o128 - o256).norm() < 1e-10, "t = {t}");
        let w = analytic_trajectory(&p, 0, t);
        let q128 = coherent_fock_vector(1.0, w, 128).unwrap().inner(&small.propagate_branch(0, t).unwrap());
        let q256 = coherent_fock_vector(1.0, w, 256).unwrap().inner(&large.propagate_branch(0, t).unwrap());
        assert!((q128 - q256).norm() < 1e-10);
    }
}

#[test]
fn full_hamiltonian_is_block_diagonal() {
    let (p, c) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    for &t in &[0.0, 0.4, PI / 5.0, PI] {
        let blocks = oracle.joint_state(&c, t).unwrap();
        let full = oracle.joint_state_full(&c, t).unwrap();
        let d = blocks.max_abs_difference(&full);
        assert!(d < 1e-12, "t = {t}: {d:e}");
        assert!((full.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn husimi_identity_at_random_nodes() {
    let (p, c) = fig1();
    let oracle = FockOracle::new(&p, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for &t in &[0.0, PI / 30.0, PI / 5.0, PI] {
        for _ in 0..100 {
            let omega = Complex64::from_polar(6.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let q = oracle.husimi(&c, t, omega).unwrap();
            assert!((q - chi_squared(&p, &c, t, omega)).abs() < 1e-6);
        }
    }
}

#[test]
fn truncation_leak_is_reported() {
    let (p, c) = fig1();
    assert!(matches!(FockOracle::new(&p, 8), Err(precs_core::Error::TruncationLeak { .. })));
    let free = ModelParams::new(2.0, 0.0, 1.0, &[1.0, -1.0]).unwrap();
    let oracle = FockOracle::new(&free, 64).unwrap();
    assert!(oracle.propagate_branch(0, 1.0).is_ok());
    assert!(matches!(
        oracle.exact_rho_gamma(&c, 10.0),
        Err(precs_core::Error::TruncationLeak { .. })
    ));
}
