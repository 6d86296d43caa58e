//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observable spectrum is empty")]
    EmptySpectrum,
    #[error("observable spectrum is degenerate: eigenvalue {0} appears more than once")]
    DegenerateSpectrum(f64),
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error("mode frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("amplitude vector has length {got}, spectrum has {expected} levels")]
    AmplitudeLength { expected: usize, got: usize },
    #[error("amplitudes are not normalized: sum |c|^2 = {0}")]
    NotNormalized(f64),
    #[error("time grid must be non-empty, start at 0 and increase strictly")]
    InvalidTimeGrid,
    #[error("integration step {step} exceeds the limit {limit} (2π/(20ν))")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("branch index {index} out of range for {levels} levels")]
    BranchIndex { index: usize, levels: usize },
    #[error("chi = {0:e} is below the underflow floor; the parametric state is undefined there")]
    VanishingWeight(f64),
    #[error("grid too coarse or too small: {0}")]
    GridTooCoarse(String),
    #[error("threshold eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),
    #[error("eps-supports overlap; no informative readout exists")]
    NotDisjoint,
    #[error("Fock truncation n_max = {n_max} is too small (needs {required}, tail weight {tail:e})")]
    TruncationLeak { n_max: usize, required: usize, tail: f64 },
}
