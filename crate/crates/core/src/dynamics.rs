//! Branch dynamics of the apparatus mode.
//!
//! Each branch starts in the vacuum `|0⟩` and stays a coherent state,
//! `|Ξ^γ(t)⟩ = e^{iφ^γ_t} |Ω^γ_t⟩`. The centre obeys
//! `dΩ/dt = −i ∂H^γ/∂Ω* = −i(λ_γ + νΩ)`, a clockwise circle through the
//! origin centred at `−λ_γ/ν`, and the phase accumulates at the rate
//! `ħ⁻¹⟨Ω|(iħ∂_t − H^γ)|Ω⟩ = −λ_γ Re Ω / ħ`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    classical_hamiltonian, DensityMatrix, ModelParams, PhaseSpacePoint, PrincipalAmplitudes,
};

/// Default RK4 steps per orbit period.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 2000.0;
/// Coarsest admissible RK4 step, in steps per period.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;
/// Default Simpson step for [`geometric_phase`].
pub const DEFAULT_PHASE_STEP: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed-form orbit `Ω^γ(t) = (λ_γ/ν)(e^{−iνt} − 1)`; for ν = 0 the linear
/// drift `−iλ_γ t`.
pub fn analytic_trajectory(params: &ModelParams, gamma: usize, t: f64) -> PhaseSpacePoint {
    let lambda = params.coupling(gamma);
    let nu = params.nu();
    if nu > 0.0 {
        (lambda / nu) * (Complex64::from_polar(1.0, -nu * t) - 1.0)
    } else {
        -I * lambda * t
    }
}

/// Orbit centre `−λ_γ/ν`, `None` for a free mode.
pub fn orbit_center(params: &ModelParams, gamma: usize) -> Option<PhaseSpacePoint> {
    (params.nu() > 0.0).then(|| Complex64::new(-params.coupling(gamma) / params.nu(), 0.0))
}

/// `dΩ/dt = −i ∂H^γ/∂Ω*`.
pub fn velocity(params: &ModelParams, gamma: usize, omega: PhaseSpacePoint) -> Complex64 {
    -I * (params.coupling(gamma) + params.nu() * omega)
}

/// Phase integrand `ħ⁻¹(−Im(Ω* dΩ/dt) − H^γ(Ω))` at a point moving with
/// velocity `omega_dot`.
pub fn phase_rate(
    params: &ModelParams,
    gamma: usize,
    omega: PhaseSpacePoint,
    omega_dot: Complex64,
) -> f64 {
    (-(omega.conj() * omega_dot).im - classical_hamiltonian(params, gamma, omega)) / params.hbar()
}

/// Closed form of the accumulated phase,
/// `φ^γ_t = λ_γ²(νt − sin νt)/(ħν²)`; zero for a free mode.
pub fn branch_phase(params: &ModelParams, gamma: usize, t: f64) -> f64 {
    let nu = params.nu();
    if nu > 0.0 {
        let lambda = params.coupling(gamma);
        lambda * lambda * (nu * t - (nu * t).sin()) / (params.hbar() * nu * nu)
    } else {
        0.0
    }
}

/// Accumulated phase by composite Simpson quadrature of [`phase_rate`]
/// along the analytic orbit. `step` is an upper bound on the panel width.
pub fn geometric_phase(params: &ModelParams, gamma: usize, t: f64, step: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let mut panels = (t.abs() / step).ceil() as usize;
    panels = panels.max(2);
    if panels % 2 == 1 {
        panels += 1;
    }
    let h = t / panels as f64;
    let f = |y: f64| {
        let omega = analytic_trajectory(params, gamma, y);
        phase_rate(params, gamma, omega, velocity(params, gamma, omega))
    };
    let mut acc = crate::sum::CompensatedSum::new();
    acc.add(f(0.0));
    acc.add(f(t));
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(k as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Largest RK4 step accepted by [`integrate_eom`], `None` when unbounded (ν = 0).
pub fn max_step(params: &ModelParams) -> Option<f64> {
    params.period().map(|p| p / MIN_STEPS_PER_PERIOD)
}

/// Default RK4 step: 2π/(2000ν), or 1e-3 for a free mode.
pub fn default_step(params: &ModelParams) -> f64 {
    params
        .period()
        .map(|p| p / DEFAULT_STEPS_PER_PERIOD)
        .unwrap_or(1e-3)
}

/// Sampled branch orbit together with its accumulated phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrajectory {
    pub gamma: usize,
    pub times: Vec<f64>,
    pub points: Vec<PhaseSpacePoint>,
    pub phases: Vec<f64>,
}

impl BranchTrajectory {
    /// Samples the closed-form orbit and phase.
    pub fn analytic(params: &ModelParams, gamma: usize, times: &[f64]) -> Result<Self> {
        params.check_branch(gamma)?;
        check_time_grid(times)?;
        Ok(Self {
            gamma,
            times: times.to_vec(),
            points: times
                .iter()
                .map(|&t| analytic_trajectory(params, gamma, t))
                .collect(),
            phases: times
                .iter()
                .map(|&t| branch_phase(params, gamma, t))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0)
        || times.iter().any(|t| !t.is_finite())
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}

/// Fixed-step classical RK4 for the orbit and the phase, starting from
/// `Ω(0) = 0, φ(0) = 0`. Between consecutive output times the interval is
/// split into equal substeps no longer than `step`.
pub fn integrate_eom(
    params: &ModelParams,
    gamma: usize,
    times: &[f64],
    step: f64,
) -> Result<BranchTrajectory> {
    params.check_branch(gamma)?;
    check_time_grid(times)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::StepTooLarge {
            step,
            limit: max_step(params).unwrap_or(f64::INFINITY),
        });
    }
    if let Some(limit) = max_step(params) {
        if step > limit {
            return Err(Error::StepTooLarge { step, limit });
        }
    }

    // State (Ω, φ); both derivatives depend on Ω only.
    let rhs = |omega: Complex64| {
        let v = velocity(params, gamma, omega);
        (v, phase_rate(params, gamma, omega, v))
    };

    let mut omega = Complex64::new(0.0, 0.0);
    let mut phase = 0.0;
    let mut points = Vec::with_capacity(times.len());
    let mut phases = Vec::with_capacity(times.len());
    points.push(omega);
    phases.push(phase);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let n = (span / step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            let (k1, p1) = rhs(omega);
            let (k2, p2) = rhs(omega + 0.5 * h * k1);
            let (k3, p3) = rhs(omega + 0.5 * h * k2);
            let (k4, p4) = rhs(omega + h * k3);
            omega += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            phase += h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
        }
        points.push(omega);
        phases.push(phase);
    }
    Ok(BranchTrajectory {
        gamma,
        times: times.to_vec(),
        points,
        phases,
    })
}

/// `⟨α|β⟩ = exp[(α*β − |α|²/2 − |β|²/2)/ħ]`.
pub fn coherent_overlap(hbar: f64, alpha: PhaseSpacePoint, beta: PhaseSpacePoint) -> Complex64 {
    ((alpha.conj() * beta - 0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr()) / hbar).exp()
}

/// Decoherence factor `⟨Ξ^γ'(t)|Ξ^γ(t)⟩ = e^{i(φ^γ − φ^γ')} ⟨Ω^γ'_t|Ω^γ_t⟩`.
pub fn branch_overlap(params: &ModelParams, gamma_p: usize, gamma: usize, t: f64) -> Complex64 {
    if gamma_p == gamma {
        return Complex64::new(1.0, 0.0);
    }
    let a = analytic_trajectory(params, gamma_p, t);
    let b = analytic_trajectory(params, gamma, t);
    let dphi = branch_phase(params, gamma, t) - branch_phase(params, gamma_p, t);
    Complex64::from_polar(1.0, dphi) * coherent_overlap(params.hbar(), a, b)
}

/// Exact reduced state: populations `|c_γ|²` and coherences
/// `c_γ c*_γ' ⟨Ξ^γ'(t)|Ξ^γ(t)⟩`.
pub fn reduced_density_matrix(
    params: &ModelParams,
    c: &PrincipalAmplitudes,
    t: f64,
) -> Result<DensityMatrix> {
    c.check_matches(params)?;
    let n = params.levels();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(c[i].norm_sqr(), 0.0)
        } else {
            c[i] * c[j].conj() * branch_overlap(params, j, i, t)
        }
    });
    Ok(DensityMatrix::from_matrix(m))
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > std::f64::consts::PI {
        y - TAU
    } else {
        y
    }
}
