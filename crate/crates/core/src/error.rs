use thiserror::Error;

use crate::solvers::PartialSolve;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("anisotropy must satisfy delta >= 1 + 1e-6, got {0}")]
    InvalidAnisotropy(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mode cutoff K = {cutoff} too large for a grid of {grid} points (need G >= 2K + 2)")]
    CutoffTooLarge { cutoff: usize, grid: usize },

    #[error("grids of size {0} and {1} are incompatible")]
    GridMismatch(usize, usize),

    #[error("string length must be at least 1")]
    ZeroStringLength,

    #[error("nome must lie in (0, 1), got {0}")]
    NomeOutOfRange(f64),

    #[error("theta function index must be 1..=4, got {0}")]
    ThetaIndex(u8),

    #[error("driving term d_{n} diverges at lambda = {lambda}")]
    DrivingSingular { n: usize, lambda: f64 },

    #[error("series and theta forms of d_{n} disagree by {diff:e} at lambda = {lambda}")]
    DrivingMismatch { n: usize, lambda: f64, diff: f64 },

    #[error("spin must be a positive half-integer, got 2s = {0}")]
    InvalidSpin(usize),

    #[error("L-operator normalization sinh(z {sign} s*eta) vanishes at z = {re} + {im}i")]
    NormalizationPole { re: f64, im: f64, sign: char },

    #[error("eigenvalue problem failed: {0}")]
    Eigen(String),

    #[error("leading eigenvalue is (nearly) degenerate: spectral gap {gap:e}")]
    DegenerateSpectrum { gap: f64 },

    #[error("derivative estimators disagree by {diff:e} at 2s = {two_s}, lambda = {lambda}")]
    DerivativeMismatch { two_s: usize, lambda: num_complex::Complex64, diff: f64 },

    #[error("no closed form for 2s = {0}; use omega_numeric")]
    NoClosedForm(usize),

    #[error(
        "amplified Fourier tail {tail:e} at k = {cutoff} exceeds threshold {threshold:e}; \
         increase the mode cutoff K"
    )]
    TailAmplified { tail: f64, threshold: f64, cutoff: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible states: {0}")]
    IncompatibleStates(String),

    #[error("{what} did not converge: residual {residual:e} after {iterations} iterations", what = .0.what, residual = .0.report.final_residual, iterations = .0.report.iterations)]
    NotConverged(Box<PartialSolve>),

    #[error("malformed state file: {0}")]
    MalformedState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
