//! Brute-force reference: branch and joint states propagated exactly in a
//! truncated Fock basis `{|0⟩ … |n_max⟩}` with `b|n⟩ = √(ħn)|n−1⟩`.
//!
//! Nothing here uses the coherent-state closed forms except
//! [`fidelity_phase_check`], whose whole purpose is to compare the two.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::{analytic_trajectory, geometric_phase, wrap_angle, DEFAULT_PHASE_STEP};
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, ModelParams, PhaseSpacePoint, PrincipalAmplitudes};

/// Default truncation level.
pub const DEFAULT_N_MAX: usize = 128;
/// Maximum admissible weight on the last Fock level after propagation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Smallest `n_max` admitted for a coherent state with mean occupation
/// `mean = |Ω|²/ħ`: `mean + 8√mean + 16`.
pub fn required_n_max(mean: f64) -> usize {
    (mean + 8.0 * mean.sqrt() + 16.0).ceil() as usize
}

fn check_truncation(mean: f64, n_max: usize) -> Result<()> {
    let required = required_n_max(mean);
    if n_max < required {
        return Err(Error::TruncationLeak {
            n_max,
            required,
            tail: f64::NAN,
        });
    }
    Ok(())
}

/// Occupation amplitudes `⟨n|ψ⟩`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len() >= 2, "need n_max ≥ 1");
        Self { amps }
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        crate::sum::sum(self.amps.iter().map(|a| a.norm_sqr())).sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        assert_eq!(self.amps.len(), other.amps.len(), "truncation mismatch");
        let mut acc = crate::sum::CompensatedComplexSum::new();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc.add(a.conj() * b);
        }
        acc.value()
    }

    /// Weight `|⟨n_max|ψ⟩|²` on the last retained level.
    pub fn tail_weight(&self) -> f64 {
        self.amps[self.n_max()].norm_sqr()
    }

    /// `b|ψ⟩` restricted to the truncated space.
    pub fn annihilate(&self, hbar: f64) -> FockVector {
        let n_max = self.n_max();
        let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
        for n in 1..=n_max {
            out[n - 1] = self.amps[n] * (hbar * n as f64).sqrt();
        }
        FockVector { amps: out }
    }

    fn check_tail(&self, required: usize) -> Result<()> {
        let tail = self.tail_weight();
        if tail >= TAIL_TOLERANCE {
            return Err(Error::TruncationLeak {
                n_max: self.n_max(),
                required,
                tail,
            });
        }
        Ok(())
    }
}

/// `⟨n|Ω⟩ = e^{−|Ω|²/(2ħ)} Ωⁿ/√(ħⁿ n!)`, built by the stable recurrence
/// `⟨n|Ω⟩ = ⟨n−1|Ω⟩·Ω/√(ħn)`. Amplitudes are exact, not renormalized.
pub fn coherent_fock_vector(hbar: f64, omega: PhaseSpacePoint, n_max: usize) -> Result<FockVector> {
    let mean = omega.norm_sqr() / hbar;
    check_truncation(mean, n_max)?;
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut a = Complex64::new((-0.5 * mean).exp(), 0.0);
    amps.push(a);
    for n in 1..=n_max {
        a = a * omega / (hbar * n as f64).sqrt();
        amps.push(a);
    }
    Ok(FockVector { amps })
}

/// `H^γ = λ_γ(b + b†) + νb†b` on the truncated space: diagonal `νħn`,
/// off-diagonal `λ_γ√(ħ(n+1))`.
pub fn branch_hamiltonian_matrix(params: &ModelParams, gamma: usize, n_max: usize) -> DMatrix<f64> {
    assert!(n_max >= 1, "n_max must be at least 1");
    let hbar = params.hbar();
    let lambda = params.coupling(gamma);
    let mut h = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 0..=n_max {
        h[(n, n)] = params.nu() * hbar * n as f64;
        if n < n_max {
            let off = lambda * (hbar * (n + 1) as f64).sqrt();
            h[(n, n + 1)] = off;
            h[(n + 1, n)] = off;
        }
    }
    h
}

/// Spectral decomposition of a real symmetric generator, for
/// `e^{−itH/ħ}` at arbitrary `t`.
#[derive(Debug, Clone)]
struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    /// `Vᵀ|0⟩`: vacuum in the eigenbasis, used by every branch propagation.
    vacuum_coeffs: Vec<f64>,
}

impl Propagator {
    fn new(h: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h);
        let vacuum_coeffs = eig.eigenvectors.row(0).iter().copied().collect();
        Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            vacuum_coeffs,
        }
    }

    /// `e^{−itH/ħ}` applied to a vector given by its eigenbasis coefficients.
    fn evolve_coeffs(&self, coeffs: &[Complex64], t: f64, hbar: f64) -> Vec<Complex64> {
        let dim = self.eigenvalues.len();
        let phased: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -t * e / hbar))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut acc = crate::sum::CompensatedComplexSum::new();
            for (k, p) in phased.iter().enumerate() {
                acc.add(p * self.eigenvectors[(n, k)]);
            }
            *slot = acc.value();
        }
        out
    }

    fn evolve(&self, state: &[Complex64], t: f64, hbar: f64) -> Vec<Complex64> {
        let dim = self.eigenvalues.len();
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|k| {
                let mut acc = crate::sum::CompensatedComplexSum::new();
                for (n, s) in state.iter().enumerate() {
                    acc.add(s * self.eigenvectors[(n, k)]);
                }
                acc.value()
            })
            .collect();
        self.evolve_coeffs(&coeffs, t, hbar)
    }

    fn evolve_vacuum(&self, t: f64, hbar: f64) -> Vec<Complex64> {
        let coeffs: Vec<Complex64> = self
            .vacuum_coeffs
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.evolve_coeffs(&coeffs, t, hbar)
    }
}

/// Truncated-Fock propagator table for every branch of one model. Built
/// once, read-only afterwards.
#[derive(Debug, Clone)]
pub struct FockOracle {
    params: ModelParams,
    n_max: usize,
    branches: Vec<Propagator>,
}

impl FockOracle {
    /// Diagonalizes every branch Hamiltonian. For ν > 0 the whole orbit is
    /// checked against the truncation rule up front.
    pub fn new(params: &ModelParams, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::TruncationLeak {
                n_max,
                required: 1,
                tail: f64::NAN,
            });
        }
        if params.nu() > 0.0 {
            let reach = (0..params.levels())
                .map(|g| 2.0 * params.coupling(g).abs() / params.nu())
                .fold(0.0, f64::max);
            check_truncation(reach * reach / params.hbar(), n_max)?;
        }
        let branches = (0..params.levels())
            .map(|g| Propagator::new(branch_hamiltonian_matrix(params, g, n_max)))
            .collect();
        Ok(Self {
            params: params.clone(),
            n_max,
            branches,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `|Ξ^γ(t)⟩ = e^{−itH^γ/ħ}|0⟩`.
    pub fn propagate_branch(&self, gamma: usize, t: f64) -> Result<FockVector> {
        self.params.check_branch(gamma)?;
        let hbar = self.params.hbar();
        let reach = analytic_reach(&self.params, gamma, t);
        let required = required_n_max(reach * reach / hbar);
        if self.n_max < required {
            return Err(Error::TruncationLeak {
                n_max: self.n_max,
                required,
                tail: f64::NAN,
            });
        }
        let v = FockVector {
            amps: self.branches[gamma].evolve_vacuum(t, hbar),
        };
        v.check_tail(required)?;
        Ok(v)
    }

    /// `|Ψ(t)⟩ = Σ_γ c_γ|γ⟩⊗|Ξ^γ(t)⟩` assembled branch by branch.
    pub fn joint_state(&self, c: &PrincipalAmplitudes, t: f64) -> Result<JointState> {
        c.check_matches(&self.params)?;
        let mut amps = Vec::with_capacity(c.len());
        for gamma in 0..c.len() {
            let xi = self.propagate_branch(gamma, t)?;
            amps.push(xi.amps.iter().map(|a| c[gamma] * a).collect());
        }
        Ok(JointState { amps })
    }

    /// Reduced state by partial trace over the mode.
    pub fn exact_rho_gamma(&self, c: &PrincipalAmplitudes, t: f64) -> Result<DensityMatrix> {
        Ok(self.joint_state(c, t)?.reduced_principal())
    }

    /// Husimi density `⟨Ω|ρ_Ξ(t)|Ω⟩ = Σ_γ |c_γ|²|⟨Ω|Ξ^γ(t)⟩|²`.
    pub fn husimi(&self, c: &PrincipalAmplitudes, t: f64, omega: PhaseSpacePoint) -> Result<f64> {
        c.check_matches(&self.params)?;
        let probe = coherent_fock_vector(self.params.hbar(), omega, self.n_max)?;
        let mut acc = crate::sum::CompensatedSum::new();
        for gamma in 0..c.len() {
            let xi = self.propagate_branch(gamma, t)?;
            acc.add(c[gamma].norm_sqr() * probe.inner(&xi).norm_sqr());
        }
        Ok(acc.value())
    }

    /// Fidelity `|⟨Ω^γ_t|Ξ^γ(t)⟩|` and the wrapped residual between its
    /// argument and the quadrature phase φ^γ_t.
    pub fn fidelity_phase_check(&self, gamma: usize, t: f64) -> Result<(f64, f64)> {
        let xi = self.propagate_branch(gamma, t)?;
        let omega = analytic_trajectory(&self.params, gamma, t);
        let probe = coherent_fock_vector(self.params.hbar(), omega, self.n_max)?;
        let overlap = probe.inner(&xi);
        let phase = geometric_phase(&self.params, gamma, t, DEFAULT_PHASE_STEP);
        Ok((overlap.norm(), wrap_angle(overlap.arg() - phase)))
    }

    /// `|Ψ(t)⟩` from the full block Hamiltonian
    /// `g·O_Γ ⊗ (b + b†) + 1 ⊗ νb†b`, diagonalized as one matrix.
    pub fn joint_state_full(&self, c: &PrincipalAmplitudes, t: f64) -> Result<JointState> {
        c.check_matches(&self.params)?;
        let dim = self.n_max + 1;
        let levels = c.len();
        let mut h = DMatrix::zeros(levels * dim, levels * dim);
        let hb = self.params.hbar();
        for gamma in 0..levels {
            let base = gamma * dim;
            let lambda = self.params.g() * self.params.eigenvalue(gamma);
            for n in 0..dim {
                h[(base + n, base + n)] = self.params.nu() * hb * n as f64;
                if n + 1 < dim {
                    let off = lambda * (hb * (n + 1) as f64).sqrt();
                    h[(base + n, base + n + 1)] = off;
                    h[(base + n + 1, base + n)] = off;
                }
            }
        }
        let mut initial = vec![Complex64::new(0.0, 0.0); levels * dim];
        for gamma in 0..levels {
            initial[gamma * dim] = c[gamma];
        }
        let evolved = Propagator::new(h).evolve(&initial, t, hb);
        Ok(JointState {
            amps: evolved.chunks(dim).map(<[Complex64]>::to_vec).collect(),
        })
    }
}

/// Largest distance from the origin the branch orbit reaches by time `t`.
fn analytic_reach(params: &ModelParams, gamma: usize, t: f64) -> f64 {
    if params.nu() > 0.0 {
        2.0 * params.coupling(gamma).abs() / params.nu()
    } else {
        analytic_trajectory(params, gamma, t).norm()
    }
}

/// Joint principal ⊗ mode state, branch-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub amps: Vec<Vec<Complex64>>,
}

impl JointState {
    pub fn norm(&self) -> f64 {
        crate::sum::sum(self.amps.iter().flatten().map(|a| a.norm_sqr())).sqrt()
    }

    /// `Tr_Ξ |Ψ⟩⟨Ψ|`.
    pub fn reduced_principal(&self) -> DensityMatrix {
        let n = self.amps.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let mut acc = crate::sum::CompensatedComplexSum::new();
            for (a, b) in self.amps[i].iter().zip(&self.amps[j]) {
                acc.add(a * b.conj());
            }
            acc.value()
        });
        DensityMatrix::from_matrix(m)
    }

    pub fn max_abs_difference(&self, other: &JointState) -> f64 {
        self.amps
            .iter()
            .flatten()
            .zip(other.amps.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// One-shot branch propagation; prefer [`FockOracle`] for repeated use.
pub fn propagate_branch(params: &ModelParams, gamma: usize, t: f64, n_max: usize) -> Result<FockVector> {
    FockOracle::new(params, n_max)?.propagate_branch(gamma, t)
}

/// One-shot reduced state; prefer [`FockOracle`] for repeated use.
pub fn exact_rho_gamma(
    params: &ModelParams,
    c: &PrincipalAmplitudes,
    t: f64,
    n_max: usize,
) -> Result<DensityMatrix> {
    FockOracle::new(params, n_max)?.exact_rho_gamma(c, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn fig1() -> ModelParams {
        ModelParams::qubit_boson(2.0, 1.0).unwrap()
    }

    #[test]
    fn hamiltonian_matrix_entries() {
        let free = ModelParams::qubit_boson(0.0, 1.0).unwrap();
        let h = branch_hamiltonian_matrix(&free, 0, 5);
        assert_eq!(h, DMatrix::from_diagonal(&nalgebra::DVector::from_fn(6, |n, _| n as f64)));
        let h = branch_hamiltonian_matrix(&fig1(), 0, 8);
        assert_eq!(h[(0, 1)], 2.0);
        assert_eq!(h[(1, 2)], 2.0 * 2f64.sqrt());
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn coherent_vector_examples() {
        let v = coherent_fock_vector(1.0, Complex64::new(0.0, 0.0), 20).unwrap();
        assert_eq!(v, FockVector::vacuum(20));
        let v = coherent_fock_vector(1.0, Complex64::new(1.0, 0.0), 64).unwrap();
        assert_abs_diff_eq!(v.amplitudes()[0].norm_sqr(), (-1.0f64).exp(), epsilon = 1e-15);
        let omega = Complex64::new(-4.0, 0.0);
        let v = coherent_fock_vector(1.0, omega, 128).unwrap();
        let residual: f64 = v
            .annihilate(1.0)
            .amplitudes()
            .iter()
            .zip(v.amplitudes())
            .map(|(bv, a)| (bv - omega * a).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(residual < 1e-8, "{residual}");
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(required_n_max(16.0), 64);
        assert!(matches!(
            coherent_fock_vector(1.0, Complex64::new(4.0, 0.0), 40),
            Err(Error::TruncationLeak { required: 64, .. })
        ));
        assert!(matches!(
            FockOracle::new(&fig1(), 8),
            Err(Error::TruncationLeak { n_max: 8, .. })
        ));
    }

    #[test]
    fn vacuum_propagation() {
        let p = fig1();
        let oracle = FockOracle::new(&p, 128).unwrap();
        let v = oracle.propagate_branch(0, 0.0).unwrap();
        assert!(v.inner(&FockVector::vacuum(128)).norm() > 1.0 - 1e-13);
        let free = FockOracle::new(&ModelParams::qubit_boson(0.0, 1.0).unwrap(), 32).unwrap();
        for &t in &[0.3, 2.0, 11.0] {
            let v = free.propagate_branch(1, t).unwrap();
            assert!((v.amplitudes()[0].norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn half_period_branch_is_coherent_at_minus_four() {
        let p = fig1();
        let xi = propagate_branch(&p, 0, PI, 128).unwrap();
        let probe = coherent_fock_vector(1.0, Complex64::new(-4.0, 0.0), 128).unwrap();
        assert!(probe.inner(&xi).norm() > 1.0 - 1e-8);
        assert_abs_diff_eq!(xi.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn initial_reduced_state_is_pure() {
        let p = fig1();
        let c = PrincipalAmplitudes::from_weights(&[0.25, 0.75]).unwrap();
        let rho = exact_rho_gamma(&p, &c, 0.0, 64).unwrap();
        assert!(rho.trace_distance(&DensityMatrix::pure(&c)) < 1e-12);
    }

    #[test]
    fn husimi_examples() {
        let p = fig1();
        let oracle = FockOracle::new(&p, 128).unwrap();
        let c = PrincipalAmplitudes::from_weights(&[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(oracle.husimi(&c, 0.0, Complex64::new(0.0, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
        let single = PrincipalAmplitudes::from_weights(&[1.0, 0.0]).unwrap();
        for &t in &[0.4, PI, 4.0] {
            let at = analytic_trajectory(&p, 0, t);
            assert_abs_diff_eq!(oracle.husimi(&single, t, at).unwrap(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn phase_check_trivial_cases() {
        let oracle = FockOracle::new(&fig1(), 64).unwrap();
        let (f, r) = oracle.fidelity_phase_check(0, 0.0).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-13);
        let free = FockOracle::new(&ModelParams::qubit_boson(0.0, 1.0).unwrap(), 32).unwrap();
        let (f, r) = free.fidelity_phase_check(1, 2.5).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
    }
}
