use std::time::Instant;

use super::{hole_fraction, not_converged, sup_diff, ConvergenceReport, SKernel, SolverConfig};
use crate::error::{Error, Result};
use crate::spectral::{Grid, PeriodicFunction};
use crate::tba::{ClosureRule, StringState};

/// `eta_n` above this value on every node and level is treated as infinite.
const EMPTY_STATE_ETA: f64 = 1e12;
/// Cap on symmetric Gauss-Seidel sweeps of one linear density solve.
pub(crate) const MAX_SWEEPS: usize = 100_000;

/// How the holes of one string level are determined during the density solve.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Level<'a> {
    /// `rho_{n,h} = rho_{n,t} eta_n/(1 + eta_n)` with the given `ln eta_n`.
    Ratio(&'a [f64]),
    /// `rho_{n,h}` prescribed.
    Holes(&'a [f64]),
}

/// Linear-solve statistics of a density recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub sweeps: usize,
    pub residual: f64,
    /// Ratio of the last two sweep updates, a proxy for the spectral radius
    /// of the sweep map.
    pub contraction: f64,
}

pub(crate) struct DensitySolution {
    pub rho_t: Vec<Vec<f64>>,
    pub rho_h: Vec<Vec<f64>>,
    pub diagnostics: DensityDiagnostics,
}

/// Symmetric Gauss-Seidel solution of
/// `rho_{n,t} = s * (rho_{n-1,h} + rho_{n+1,h}) + delta_{n1} s`
/// with `rho_{n_max+1,h} = 0`. Each sweep visits `1..=N` and then `N..=1`.
pub(crate) fn solve_densities(
    kernel: &SKernel,
    levels: &[Level<'_>],
    warm: Option<&[Vec<f64>]>,
    tol: f64,
    max_sweeps: usize,
) -> std::result::Result<DensitySolution, DensitySolution> {
    let n_max = levels.len();
    let g = kernel.samples().len();
    let mut rho_h: Vec<Vec<f64>> = match warm {
        Some(h) => h.to_vec(),
        None => vec![vec![0.0; g]; n_max],
    };
    let fractions: Vec<Option<Vec<f64>>> = levels
        .iter()
        .map(|l| match l {
            Level::Ratio(log_eta) => Some(log_eta.iter().map(|&x| hole_fraction(x)).collect()),
            Level::Holes(_) => None,
        })
        .collect();
    for (h, level) in rho_h.iter_mut().zip(levels) {
        if let Level::Holes(target) = level {
            h.copy_from_slice(target);
        }
    }

    let total = |rho_h: &[Vec<f64>], n: usize| -> Vec<f64> {
        let mut sum = vec![0.0; g];
        if n >= 2 {
            sum.iter_mut().zip(&rho_h[n - 2]).for_each(|(a, b)| *a += b);
        }
        if n < n_max {
            sum.iter_mut().zip(&rho_h[n]).for_each(|(a, b)| *a += b);
        }
        let mut t = kernel.apply(&sum);
        if n == 1 {
            t.iter_mut().zip(kernel.samples()).for_each(|(a, b)| *a += b);
        }
        t
    };

    let order: Vec<usize> = (1..=n_max).chain((1..=n_max).rev()).collect();
    let mut previous = f64::INFINITY;
    let mut diagnostics = DensityDiagnostics { sweeps: 0, residual: f64::INFINITY, contraction: 0.0 };
    let mut converged = false;
    for sweep in 1..=max_sweeps {
        let mut change = 0.0f64;
        for &n in &order {
            if let Some(theta) = &fractions[n - 1] {
                let t = total(&rho_h, n);
                let new: Vec<f64> = t.iter().zip(theta).map(|(t, f)| t * f).collect();
                change = change.max(sup_diff(&new, &rho_h[n - 1]));
                rho_h[n - 1] = new;
            }
        }
        diagnostics = DensityDiagnostics {
            sweeps: sweep,
            residual: change,
            contraction: if previous.is_finite() && previous > 0.0 { change / previous } else { 0.0 },
        };
        previous = change;
        if change <= tol {
            converged = true;
            break;
        }
    }
    let rho_t: Vec<Vec<f64>> = (1..=n_max).map(|n| total(&rho_h, n)).collect();
    for (n, t) in rho_t.iter().enumerate() {
        if let Some(theta) = &fractions[n] {
            rho_h[n] = t.iter().zip(theta).map(|(t, f)| t * f).collect();
        }
    }
    let solution = DensitySolution { rho_t, rho_h, diagnostics };
    if converged {
        Ok(solution)
    } else {
        Err(solution)
    }
}

/// Assembles a state from a density solution. For ratio levels `rho_n`
/// uses the complementary fraction so that both densities stay accurate
/// where `eta_n` is huge.
pub(crate) fn assemble_state(
    grid: &Grid,
    levels: &[Level<'_>],
    solution: &DensitySolution,
    closure: ClosureRule,
) -> Result<StringState> {
    let mut rho = Vec::with_capacity(levels.len());
    let mut rho_h = Vec::with_capacity(levels.len());
    let mut eta = Vec::with_capacity(levels.len());
    for (n, level) in levels.iter().enumerate() {
        let t = &solution.rho_t[n];
        let (r, h, e): (Vec<f64>, Vec<f64>, Vec<f64>) = match level {
            Level::Ratio(log_eta) => {
                let r = t.iter().zip(*log_eta).map(|(t, &x)| t * hole_fraction(-x)).collect();
                let e = log_eta.iter().map(|&x| x.exp().min(f64::MAX)).collect();
                (r, solution.rho_h[n].clone(), e)
            }
            Level::Holes(target) => {
                let r: Vec<f64> = t.iter().zip(*target).map(|(t, h)| t - h).collect();
                let e = r.iter().zip(*target).map(|(r, h)| (h / r.max(1e-300)).min(f64::MAX)).collect();
                (r, target.to_vec(), e)
            }
        };
        rho.push(PeriodicFunction::new(grid, r)?);
        rho_h.push(PeriodicFunction::new(grid, h)?);
        eta.push(PeriodicFunction::new(grid, e)?);
    }
    StringState::new(rho, rho_h, eta, closure)
}

/// Recovers `rho_n` and `rho_{n,h} = eta_n rho_n` from `eta_1..eta_{n_max}`
/// through the decoupled equations.
///
/// When every `eta_n` exceeds `1e12` on the whole grid the empty state
/// (`rho_n = 0`, `rho_{n,h} = a_n`) is returned directly.
pub fn densities_from_eta(
    etas: &[PeriodicFunction],
    config: &SolverConfig,
) -> Result<(StringState, DensityDiagnostics)> {
    let grid = config.grid()?;
    if etas.len() != config.n_max {
        return Err(Error::InvalidConfig(format!("expected {} eta functions, got {}", config.n_max, etas.len())));
    }
    if etas.iter().all(|e| e.samples().iter().all(|&x| x > EMPTY_STATE_ETA)) {
        let state = StringState::empty(&grid, &config.params, config.n_max)?;
        return Ok((state, DensityDiagnostics { sweeps: 0, residual: 0.0, contraction: 0.0 }));
    }
    let logs: Vec<Vec<f64>> = etas.iter().map(|e| e.samples().iter().map(|x| x.ln()).collect()).collect();
    densities_from_log_eta(&grid, &logs, config).map(|(s, d, _)| (s, d))
}

pub(crate) fn densities_from_log_eta(
    grid: &Grid,
    log_eta: &[Vec<f64>],
    config: &SolverConfig,
) -> Result<(StringState, DensityDiagnostics, Vec<Vec<f64>>)> {
    let started = Instant::now();
    let kernel = SKernel::new(grid, &config.params);
    let levels: Vec<Level<'_>> = log_eta.iter().map(|l| Level::Ratio(l)).collect();
    match solve_densities(&kernel, &levels, None, config.density_tol, MAX_SWEEPS) {
        Ok(sol) => {
            let state = assemble_state(grid, &levels, &sol, config.closure)?;
            Ok((state, sol.diagnostics, sol.rho_h))
        }
        Err(sol) => {
            let report = ConvergenceReport {
                iterations: sol.diagnostics.sweeps,
                final_residual: sol.diagnostics.residual,
                residuals: vec![sol.diagnostics.residual],
                wall_time: started.elapsed().as_secs_f64(),
            };
            let partial = assemble_state(grid, &levels, &sol, config.closure).ok();
            Err(not_converged("density recovery", report, partial))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tba::{bethe_coupled_residual, bethe_decoupled_residual};

    fn config() -> SolverConfig {
        let mut c = SolverConfig::new(1.5).unwrap();
        c.grid_size = 128;
        c.cutoff = 32;
        c.n_max = 8;
        c
    }

    #[test]
    fn huge_eta_gives_empty_state() {
        let c = config();
        let grid = c.grid().unwrap();
        let etas = vec![PeriodicFunction::from_fn(&grid, |_| 1e13); c.n_max];
        let (state, d) = densities_from_eta(&etas, &c).unwrap();
        assert_eq!(d.sweeps, 0);
        assert!(state.all_rho().iter().all(|r| r.sup_norm() == 0.0));
    }

    #[test]
    fn constant_eta_solution_satisfies_both_forms() {
        let c = config();
        let grid = c.grid().unwrap();
        let etas: Vec<PeriodicFunction> = (1..=c.n_max)
            .map(|n| PeriodicFunction::from_fn(&grid, |x| ((n + 1) * (n + 1)) as f64 - 1.0 + 0.3 * (2.0 * x).cos()))
            .collect();
        let (state, d) = densities_from_eta(&etas, &c).unwrap();
        assert!(d.residual <= c.density_tol);
        assert!(d.contraction < 1.0);
        state.check_invariants(1e-12).unwrap();
        let dec = bethe_decoupled_residual(&state, &c.params);
        assert!(dec.iter().all(|&r| r < 1e-12), "{dec:?}");
        let coupled = bethe_coupled_residual(&state, &c.params);
        assert!(coupled.max_corrected() < 1e-12, "{:?}", coupled.corrected);
    }

    #[test]
    fn sweep_limit_reports_partial_solution() {
        let c = config();
        let grid = c.grid().unwrap();
        let kernel = SKernel::new(&grid, &c.params);
        let logs = vec![vec![3f64.ln(); grid.size()]; c.n_max];
        let levels: Vec<Level<'_>> = logs.iter().map(|l| Level::Ratio(l)).collect();
        match solve_densities(&kernel, &levels, None, c.density_tol, 2) {
            Err(sol) => {
                assert_eq!(sol.diagnostics.sweeps, 2);
                assert!(sol.diagnostics.residual > c.density_tol);
            }
            Ok(_) => panic!("two sweeps cannot reach the tolerance"),
        }
    }
}
