//! Fixed-point solvers for the quench-action GTBA and for the truncated
//! quasi-local GGE, plus distances between macrostates.

mod anderson;
mod compare;
mod densities;
mod gge;
mod qa;

pub use compare::{compare_states, LevelDistance, StateComparison, DEFAULT_REPORT_LEVELS};
pub use densities::{densities_from_eta, DensityDiagnostics};
pub use gge::{solve_truncated_gge, solve_truncated_gge_seeded, GgeDiagnostics};
pub use qa::solve_qa_gtba;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{kernel_s_fourier, AnisotropyParams, Grid};
use crate::tba::{ClosureRule, StringState};

/// Truncation, discretization and iteration parameters shared by all solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub params: AnisotropyParams,
    /// `2 s_bar`, the number of constrained string levels of the GGE.
    pub two_sbar: usize,
    pub n_max: usize,
    pub grid_size: usize,
    /// Fourier mode cutoff `K` of the generating functions.
    pub cutoff: usize,
    /// Stopping tolerance on the sup-norm update of `ln eta_n`.
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Stopping tolerance of the linear density sweeps.
    pub density_tol: f64,
    pub closure: ClosureRule,
}

impl SolverConfig {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(Self {
            params: AnisotropyParams::new(delta)?,
            two_sbar: 1,
            n_max: 24,
            grid_size: 512,
            cutoff: 64,
            tol: 1e-12,
            max_iter: 20_000,
            damping: 0.5,
            density_tol: 1e-14,
            closure: ClosureRule::ParitySquareRoot,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return fail(format!("tolerance must be positive, got {}", self.tol));
        }
        if !(self.density_tol > 0.0 && self.density_tol.is_finite()) {
            return fail(format!("density tolerance must be positive, got {}", self.density_tol));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return fail(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if self.n_max < self.closure.min_strings() {
            return fail(format!(
                "n_max = {} is below the {} levels the closure needs",
                self.n_max,
                self.closure.min_strings()
            ));
        }
        if self.two_sbar == 0 || self.two_sbar >= self.n_max {
            return fail(format!("need 1 <= 2 s_bar < n_max, got 2 s_bar = {}", self.two_sbar));
        }
        let grid = Grid::new(self.grid_size)?;
        grid.check_cutoff(self.cutoff)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_size)
    }
}

/// Iteration history of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// Sup over levels of the sup-norm update of `ln eta_n` in the last step.
    pub final_residual: f64,
    pub residuals: Vec<f64>,
    pub wall_time: f64,
}

impl ConvergenceReport {
    pub(crate) fn new(residuals: Vec<f64>, started: Instant) -> Self {
        Self {
            iterations: residuals.len(),
            final_residual: residuals.last().copied().unwrap_or(f64::INFINITY),
            residuals,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }

    /// Whether the residual is non-increasing from iteration `burn_in` on.
    pub fn monotone_after(&self, burn_in: usize) -> bool {
        self.residuals.iter().skip(burn_in).collect::<Vec<_>>().windows(2).all(|w| w[1] <= w[0])
    }
}

/// What a failed solve got to, for diagnostics and partial output.
#[derive(Debug)]
pub struct PartialSolve {
    pub what: &'static str,
    pub report: ConvergenceReport,
    pub state: Option<StringState>,
}

pub(crate) fn not_converged(what: &'static str, report: ConvergenceReport, state: Option<StringState>) -> Error {
    Error::NotConverged(Box::new(PartialSolve { what, report, state }))
}

/// Convolution with the kernel `s` on a fixed grid.
#[derive(Debug, Clone)]
pub(crate) struct SKernel {
    grid: Grid,
    coeffs: Vec<f64>,
    samples: Vec<f64>,
}

impl SKernel {
    pub fn new(grid: &Grid, params: &AnisotropyParams) -> Self {
        let coeffs: Vec<f64> = (0..=grid.size() / 2).map(|k| kernel_s_fourier(k as i64, params)).collect();
        let samples = grid.synthesize_even(|k| coeffs[k]);
        Self { grid: grid.clone(), coeffs, samples }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.grid.apply_even_multiplier(f, |k| self.coeffs[k])
    }

    /// Samples of `s(lambda)`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `s * g` for an even `g` given by its Fourier coefficients.
    pub fn apply_coefficients(&self, g: impl Fn(usize) -> f64) -> Vec<f64> {
        self.grid.synthesize_even(|k| self.coeffs[k] * g(k))
    }
}

#[inline]
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `eta / (1 + eta)` from `ln eta`.
#[inline]
pub(crate) fn hole_fraction(log_eta: f64) -> f64 {
    if log_eta >= 0.0 {
        1.0 / (1.0 + (-log_eta).exp())
    } else {
        let e = log_eta.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = SolverConfig::new(2.0).unwrap();
        c.validate().unwrap();
        assert_eq!((c.n_max, c.grid_size, c.cutoff), (24, 512, 64));
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = SolverConfig::new(2.0).unwrap();
        let mut c = base.clone();
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.cutoff = 300;
        assert!(matches!(c.validate(), Err(Error::CutoffTooLarge { .. })));
        let mut c = base.clone();
        c.two_sbar = 24;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.damping = 1.5;
        assert!(c.validate().is_err());
        let mut c = base;
        c.grid_size = 511;
        assert!(c.validate().is_err());
    }

    #[test]
    fn stable_helpers() {
        assert!((logaddexp(0.0, 0.0) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(logaddexp(1000.0, 0.0), 1000.0);
        assert_eq!(hole_fraction(800.0), 1.0);
        assert!(hole_fraction(-800.0) >= 0.0);
        assert!((hole_fraction(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn s_kernel_source_matches_direct_sum() {
        let p = AnisotropyParams::new(1.5).unwrap();
        let grid = Grid::new(64).unwrap();
        let s = SKernel::new(&grid, &p);
        for (x, v) in grid.nodes().iter().zip(s.samples()) {
            assert!((crate::spectral::kernel_s(*x, &p) - v).abs() < 1e-13);
        }
    }
}
