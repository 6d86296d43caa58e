use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PrincipalAmplitudes;

/// Hermiticity tolerance on `‖ρ − ρ†‖∞`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Reduced state of the principal system on the observable eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<Complex64>);

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "density matrix must be square");
        Self(m)
    }

    /// `|Γ⟩⟨Γ|` for `|Γ⟩ = Σ c_γ |γ⟩`.
    pub fn pure(c: &PrincipalAmplitudes) -> Self {
        let n = c.len();
        Self(DMatrix::from_fn(n, n, |i, j| c[i] * c[j].conj()))
    }

    /// `Σ |c_γ|² |γ⟩⟨γ|`, the fully decohered state.
    pub fn decohered(c: &PrincipalAmplitudes) -> Self {
        let n = c.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(c[i].norm_sqr(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ_ij ρ_ij ρ_ji; for Hermitian ρ this is Σ |ρ_ij|².
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * self.0[(j, i)];
            }
        }
        acc.re
    }

    /// `max_ij |ρ_ij − ρ*_ji|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `½ Tr|ρ − σ|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let diff = &self.0 - &other.0;
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Largest off-diagonal magnitude.
    pub fn max_coherence(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace and positivity; returns the first
    /// violated property.
    pub fn validate(&self) -> Result<(), String> {
        let h = self.hermiticity_error();
        if h >= HERMITIAN_TOLERANCE {
            return Err(format!("not Hermitian: ‖ρ−ρ†‖ = {h:e}"));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(format!("trace {tr} differs from 1"));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(format!("negative eigenvalue {min:e}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_state_properties() {
        let amps = PrincipalAmplitudes::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let rho = DensityMatrix::pure(&amps);
        assert!(rho.validate().is_ok());
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        let ev = rho.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_to_decohered_is_coherence_magnitude() {
        let amps = PrincipalAmplitudes::from_weights(&[0.25, 0.75]).unwrap();
        let rho = DensityMatrix::pure(&amps);
        let deco = DensityMatrix::decohered(&amps);
        assert_abs_diff_eq!(rho.trace_distance(&deco), (0.25f64 * 0.75).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(deco.purity(), 0.625, epsilon = 1e-15);
        assert_eq!(rho.trace_distance(&rho), 0.0);
    }

    #[test]
    fn detects_invalid_matrices() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 0.0)]);
        assert!(DensityMatrix::from_matrix(m).validate().unwrap_err().contains("Hermitian"));
        let m = DMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::from_matrix(m).validate().unwrap_err().contains("negative"));
        let m = DMatrix::from_row_slice(1, 1, &[c(0.9, 0.0)]);
        assert!(DensityMatrix::from_matrix(m).validate().unwrap_err().contains("trace"));
    }
}
