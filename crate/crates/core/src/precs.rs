//! Parametric representation of the joint state on coherent states of the
//! apparatus.
//!
//! With the vacuum as reference state, the joint state decomposes as
//! `|Ψ(t)⟩ = ∫dμ(Ω) χ_t(Ω) |φ_t(Ω)⟩|Ω⟩` where
//!
//! * `h^γ_t(Ω) = |⟨Ω|Ξ^γ(t)⟩|² = exp(−|Ω − Ω^γ_t|²/ħ)` (peak value 1),
//! * `χ²_t(Ω) = Σ_γ |c_γ|² h^γ_t(Ω)`, the Husimi density of the apparatus,
//! * `|φ_t(Ω)⟩ = χ_t(Ω)⁻¹ Σ_γ c_γ ⟨Ω|Ξ^γ(t)⟩ |γ⟩`,
//!
//! and `dμ = dRe Ω dIm Ω/(πħ)`. Under this measure every `h^γ` integrates
//! to one, so the `1/(πħ)` factor lives in the measure and not in `h`.
//! The branch amplitude `⟨Ω|Ξ^γ(t)⟩` keeps the dynamical phase `e^{iφ^γ_t}`;
//! for spectra with unequal `|ω_γ|` the reconstructed coherences need it.

mod grid;
mod io;
mod support;

pub use grid::{Grid, PADDING, SPACING};
pub use io::{fmt_num as io_fmt, write_field_csv, write_supports_csv};
pub use support::{
    disjoint, disjoint_with_gap, eps_supports, local_maxima, readout, superlevel_components, support_distance,
    EpsSupport, Readout, DEFAULT_EPS,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{analytic_trajectory, branch_phase, coherent_overlap};
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, ModelParams, PhaseSpacePoint, PrincipalAmplitudes};
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// Nodes with `χ` below this floor are skipped by the reconstruction.
pub const CHI_FLOOR: f64 = 1e-150;

/// `h^γ_t(Ω) = exp(−|Ω − Ω^γ_t|²/ħ)`.
pub fn h_gamma(params: &ModelParams, gamma: usize, t: f64, omega: PhaseSpacePoint) -> f64 {
    let centre = analytic_trajectory(params, gamma, t);
    (-(omega - centre).norm_sqr() / params.hbar()).exp()
}

/// `⟨Ω|Ξ^γ(t)⟩ = e^{iφ^γ_t} ⟨Ω|Ω^γ_t⟩`.
pub fn branch_amplitude(params: &ModelParams, gamma: usize, t: f64, omega: PhaseSpacePoint) -> Complex64 {
    let centre = analytic_trajectory(params, gamma, t);
    Complex64::from_polar(1.0, branch_phase(params, gamma, t))
        * coherent_overlap(params.hbar(), omega, centre)
}

/// `χ²_t(Ω) = Σ_γ |c_γ|² h^γ_t(Ω)`.
pub fn chi_squared(params: &ModelParams, c: &PrincipalAmplitudes, t: f64, omega: PhaseSpacePoint) -> f64 {
    (0..c.len())
        .map(|g| c[g].norm_sqr() * h_gamma(params, g, t, omega))
        .sum()
}

/// Unit vector `|φ_t(Ω)⟩` of the principal system attached to `Ω`.
pub fn parametric_state(
    params: &ModelParams,
    c: &PrincipalAmplitudes,
    t: f64,
    omega: PhaseSpacePoint,
) -> Result<Vec<Complex64>> {
    c.check_matches(params)?;
    let amps: Vec<Complex64> = (0..c.len())
        .map(|g| c[g] * branch_amplitude(params, g, t, omega))
        .collect();
    let chi = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(chi > CHI_FLOOR) {
        return Err(Error::VanishingWeight(chi));
    }
    Ok(amps.into_iter().map(|a| a / chi).collect())
}

/// `h^γ_t` and `χ²_t` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiField {
    pub grid: Grid,
    pub t: f64,
    /// `h[γ][k]` for node `k`.
    pub h: Vec<Vec<f64>>,
    pub chi2: Vec<f64>,
}

impl ChiField {
    pub fn levels(&self) -> usize {
        self.h.len()
    }

    /// Quadrature of χ² over the grid; one by unitarity.
    pub fn norm(&self) -> f64 {
        self.grid.weight() * crate::sum::sum(self.chi2.iter().copied())
    }

    /// Quadrature of `h^γ`, i.e. the weight of one branch.
    pub fn branch_norm(&self, gamma: usize) -> f64 {
        self.grid.weight() * crate::sum::sum(self.h[gamma].iter().copied())
    }

    /// Quadrature of χ² over a subset of nodes.
    pub fn mass(&self, nodes: &[usize]) -> f64 {
        self.grid.weight() * crate::sum::sum(nodes.iter().map(|&k| self.chi2[k]))
    }

    pub fn max_chi2(&self) -> (usize, f64) {
        self.chi2
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
    }
}

/// Samples every `h^γ_t` and `χ²_t` on `grid`, in parallel over nodes.
pub fn evaluate_field(
    params: &ModelParams,
    c: &PrincipalAmplitudes,
    t: f64,
    grid: &Grid,
) -> Result<ChiField> {
    c.check_matches(params)?;
    grid.check_covers(params, t)?;
    let hbar = params.hbar();
    let h: Vec<Vec<f64>> = (0..params.levels())
        .map(|g| {
            let centre = analytic_trajectory(params, g, t);
            (0..grid.len())
                .into_par_iter()
                .map(|k| (-(grid.node(k) - centre).norm_sqr() / hbar).exp())
                .collect()
        })
        .collect();
    let weights = c.weights();
    let chi2 = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            weights
                .iter()
                .zip(&h)
                .map(|(w, hg)| w * hg[k])
                .sum::<f64>()
        })
        .collect();
    Ok(ChiField {
        grid: grid.clone(),
        t,
        h,
        chi2,
    })
}

/// `ρ_Γ(t) = ∫dμ χ² |φ⟩⟨φ|` by node quadrature. Nodes whose `χ` falls
/// below [`CHI_FLOOR`] are skipped.
pub fn rho_from_precs(params: &ModelParams, c: &PrincipalAmplitudes, field: &ChiField) -> Result<DensityMatrix> {
    c.check_matches(params)?;
    let n = c.len();
    let grid = &field.grid;
    // Per node: χ² |φ⟩⟨φ| = a a† with a_γ = c_γ⟨Ω|Ξ^γ⟩.
    let columns: Vec<Option<Vec<Complex64>>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let omega = grid.node(k);
            let amps: Vec<Complex64> = (0..n)
                .map(|g| c[g] * branch_amplitude(params, g, field.t, omega))
                .collect();
            let chi = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (chi > CHI_FLOOR).then_some(amps)
        })
        .collect();
    let mut acc = vec![CompensatedComplexSum::new(); n * n];
    for amps in columns.iter().flatten() {
        for i in 0..n {
            for j in 0..n {
                acc[i * n + j].add(amps[i] * amps[j].conj());
            }
        }
    }
    let w = grid.weight();
    Ok(DensityMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        acc[i * n + j].value() * w
    })))
}

/// Differential entropy `E = −∫dμ χ² ln χ²` in nats, with `0 ln 0 = 0`.
pub fn differential_entropy(field: &ChiField) -> f64 {
    let mut acc = CompensatedSum::new();
    for &p in &field.chi2 {
        if p > 0.0 {
            acc.add(-p * p.ln());
        }
    }
    acc.value() * field.grid.weight()
}

/// Shannon entropy `−Σ p ln p` of a discrete distribution, in nats.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}
