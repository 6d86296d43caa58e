//! Domain types for the standard measurement model
//! `H = g·O_Γ ⊗ (b + b†) + 1 ⊗ ν b†b` with `[b, b†] = ħ`.
//!
//! Branch `γ` of the joint state sees the displaced-oscillator Hamiltonian
//! `H^γ = λ_γ (b + b†) + ν b†b`, where `λ_γ = g·ω_γ`. Everything downstream
//! is phrased in terms of these per-branch couplings.

mod density;

pub use density::DensityMatrix;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point Ω of the coherent-state phase space (the complex plane), with
/// `b|Ω⟩ = Ω|Ω⟩`.
pub type PhaseSpacePoint = Complex64;

/// Normalization tolerance for [`PrincipalAmplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Validated model parameters. The spectrum is stored sorted in descending
/// order, so branch 0 carries the largest eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    g: f64,
    nu: f64,
    hbar: f64,
    spectrum: Vec<f64>,
}

impl ModelParams {
    /// Validates raw parameters and sorts the spectrum descending.
    pub fn new(g: f64, nu: f64, hbar: f64, spectrum: &[f64]) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::NonFinite("g"));
        }
        if !nu.is_finite() {
            return Err(Error::NonFinite("nu"));
        }
        if !hbar.is_finite() {
            return Err(Error::NonFinite("hbar"));
        }
        if hbar <= 0.0 {
            return Err(Error::NonPositiveHbar(hbar));
        }
        if nu < 0.0 {
            return Err(Error::NegativeFrequency(nu));
        }
        if spectrum.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if spectrum.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        let mut sorted = spectrum.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSpectrum(w[0]));
        }
        Ok(Self {
            g,
            nu,
            hbar,
            spectrum: sorted,
        })
    }

    /// Qubit coupled to one bosonic mode through σ^z, at ħ = 1.
    pub fn qubit_boson(g: f64, nu: f64) -> Result<Self> {
        Self::new(g, nu, 1.0, &[1.0, -1.0])
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Number of branches N.
    pub fn levels(&self) -> usize {
        self.spectrum.len()
    }

    pub fn eigenvalue(&self, gamma: usize) -> f64 {
        self.spectrum[gamma]
    }

    /// Effective branch coupling λ_γ = g·ω_γ.
    pub fn coupling(&self, gamma: usize) -> f64 {
        self.g * self.spectrum[gamma]
    }

    pub fn check_branch(&self, gamma: usize) -> Result<()> {
        if gamma < self.levels() {
            Ok(())
        } else {
            Err(Error::BranchIndex {
                index: gamma,
                levels: self.levels(),
            })
        }
    }

    /// Recurrence period 2π/ν of every branch orbit, `None` for a free mode.
    pub fn period(&self) -> Option<f64> {
        (self.nu > 0.0).then(|| std::f64::consts::TAU / self.nu)
    }
}

/// Validates raw parameters; see [`ModelParams::new`].
pub fn validate_model(g: f64, nu: f64, hbar: f64, spectrum: &[f64]) -> Result<ModelParams> {
    ModelParams::new(g, nu, hbar, spectrum)
}

/// Coherent-state expectation `⟨Ω|H^γ|Ω⟩ = 2λ_γ Re Ω + ν|Ω|²`.
pub fn classical_hamiltonian(params: &ModelParams, gamma: usize, omega: PhaseSpacePoint) -> f64 {
    2.0 * params.coupling(gamma) * omega.re + params.nu() * omega.norm_sqr()
}

/// Initial amplitudes c_γ of the principal system on the eigenbasis of the
/// measured observable.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAmplitudes(Vec<Complex64>);

impl PrincipalAmplitudes {
    /// Accepts `c` only if `Σ|c_γ|² = 1` within [`NORM_TOLERANCE`].
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if c.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("amplitudes"));
        }
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self(c))
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(c: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(c.into_iter().map(|z| z / norm).collect())
    }

    /// Real amplitudes from Born weights, e.g. `[0.25, 0.75]`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::normalized(
            weights
                .iter()
                .map(|&p| Complex64::new(p.max(0.0).sqrt(), 0.0))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// Born weights |c_γ|².
    pub fn weights(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn check_matches(&self, params: &ModelParams) -> Result<()> {
        if self.len() == params.levels() {
            Ok(())
        } else {
            Err(Error::AmplitudeLength {
                expected: params.levels(),
                got: self.len(),
            })
        }
    }
}

impl std::ops::Index<usize> for PrincipalAmplitudes {
    type Output = Complex64;

    fn index(&self, gamma: usize) -> &Complex64 {
        &self.0[gamma]
    }
}
