use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anderson::Anderson;
use super::densities::{assemble_state, solve_densities, DensitySolution, Level, MAX_SWEEPS};
use super::{logaddexp, not_converged, ConvergenceReport, SKernel, SolverConfig};
use crate::error::{Error, Result};
use crate::tba::{HoleConstraintSet, StringState};

/// Floor on `rho_{2 s_bar}` when its ratio `eta` is formed.
const RHO_FLOOR: f64 = 1e-300;
const ANDERSON_MEMORY: usize = 8;

/// Side information of a truncated GGE solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgeDiagnostics {
    /// Nodes where `rho_{2 s_bar}` fell below the floor in the final state.
    pub floored_points: usize,
    /// Density sweeps summed over all outer iterations.
    pub density_sweeps: usize,
    /// Smallest `rho_n` over the constrained levels in the final state.
    pub min_constrained_rho: f64,
}

/// Truncated GGE with hole densities of `n = 1..=2 s_bar` fixed to the
/// targets, starting from `ln eta_n = ln((n + 1)^2 - 1)` for the free levels.
pub fn solve_truncated_gge(
    config: &SolverConfig,
    constraints: &HoleConstraintSet,
) -> Result<(StringState, ConvergenceReport)> {
    solve_truncated_gge_seeded(config, constraints, None).map(|(s, r, _)| (s, r))
}

/// As [`solve_truncated_gge`], optionally starting from a previous state.
///
/// The free levels `n > 2 s_bar` carry unknowns `x_n = ln eta_n`. One outer
/// step solves the linear density equations with `rho_{n,h}` prescribed for
/// the constrained levels and `eta_n = e^{x_n}` for the free ones, reads off
/// `ln eta_{2 s_bar} = ln(target / rho_{2 s_bar})`, and maps
/// `x_n -> s * [ln(1 + eta_{n-1}) + ln(1 + eta_{n+1})]`. The fixed-point
/// map is accelerated with Anderson mixing.
pub fn solve_truncated_gge_seeded(
    config: &SolverConfig,
    constraints: &HoleConstraintSet,
    seed: Option<&StringState>,
) -> Result<(StringState, ConvergenceReport, GgeDiagnostics)> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid()?;
    let n_max = config.n_max;
    let tsb = config.two_sbar;
    if constraints.two_sbar() < tsb {
        return Err(Error::InvalidConfig(format!(
            "{} constraints given but 2 s_bar = {tsb}",
            constraints.two_sbar()
        )));
    }
    for n in 1..=tsb {
        if constraints.target(n).grid() != &grid {
            return Err(Error::GridMismatch(constraints.target(n).grid().size(), grid.size()));
        }
    }
    if let Some(s) = seed {
        if s.grid() != &grid || s.n_max() != n_max {
            return Err(Error::IncompatibleStates("seed state does not match the solver grid or n_max".into()));
        }
    }
    let g = grid.size();
    let kernel = SKernel::new(&grid, &config.params);
    let targets: Vec<Vec<f64>> = (1..=tsb).map(|n| constraints.target(n).samples().to_vec()).collect();
    let free = n_max - tsb;

    let mut x: Vec<f64> = Vec::with_capacity(free * g);
    let mut warm: Option<Vec<Vec<f64>>> = None;
    match seed {
        Some(s) => {
            for n in tsb + 1..=n_max {
                x.extend(s.eta(n).samples().iter().map(|e| e.ln()));
            }
            warm = Some(s.all_rho_h().iter().map(|h| h.samples().to_vec()).collect());
        }
        None => {
            for n in tsb + 1..=n_max {
                let v = (((n + 1) * (n + 1)) as f64 - 1.0).ln();
                x.extend(std::iter::repeat(v).take(g));
            }
        }
    }

    let solve_inner = |x: &[f64], warm: Option<&[Vec<f64>]>| -> std::result::Result<DensitySolution, DensitySolution> {
        let levels: Vec<Level<'_>> = targets
            .iter()
            .map(|t| Level::Holes(t))
            .chain(x.chunks(g).map(Level::Ratio))
            .collect();
        solve_densities(&kernel, &levels, warm, config.density_tol, MAX_SWEEPS)
    };

    // ln eta of the constrained levels from the solved densities
    let constrained_log_eta = |sol: &DensitySolution| -> (Vec<Vec<f64>>, usize) {
        let mut floored = 0;
        let logs = (0..tsb)
            .map(|i| {
                (0..g)
                    .map(|j| {
                        let rho = sol.rho_t[i][j] - targets[i][j];
                        if rho < RHO_FLOOR {
                            floored += usize::from(i + 1 == tsb);
                        }
                        targets[i][j].max(RHO_FLOOR).ln() - rho.max(RHO_FLOOR).ln()
                    })
                    .collect()
            })
            .collect();
        (logs, floored)
    };

    let map = |x: &[f64], sol: &DensitySolution| -> (Vec<f64>, usize) {
        let (mut logs, floored) = constrained_log_eta(sol);
        logs.extend(x.chunks(g).map(<[f64]>::to_vec));
        let refs: Vec<&[f64]> = logs.iter().map(Vec::as_slice).collect();
        let beyond = config.closure.extrapolate(&refs);
        let soft = |m: usize| -> Vec<f64> {
            let l: &[f64] = if m <= n_max { &logs[m - 1] } else { &beyond };
            l.iter().map(|&v| logaddexp(0.0, v)).collect()
        };
        let next: Vec<f64> = (tsb + 1..=n_max)
            .into_par_iter()
            .flat_map_iter(|n| {
                let sum: Vec<f64> = soft(n - 1).iter().zip(soft(n + 1)).map(|(a, b)| a + b).collect();
                kernel.apply(&sum)
            })
            .collect();
        (next, floored)
    };

    let assemble = |sol: &DensitySolution, x: &[f64]| -> Result<StringState> {
        let levels: Vec<Level<'_>> = targets
            .iter()
            .map(|t| Level::Holes(t))
            .chain(x.chunks(g).map(Level::Ratio))
            .collect();
        assemble_state(&grid, &levels, sol, config.closure)
    };

    let mut mixer = Anderson::new(ANDERSON_MEMORY, config.damping);
    let mut residuals = Vec::new();
    let mut density_sweeps = 0;
    let mut best = f64::INFINITY;
    let mut outcome = None;
    for _ in 0..config.max_iter {
        let sol = match solve_inner(&x, warm.as_deref()) {
            Ok(sol) => sol,
            Err(_) => {
                let report = ConvergenceReport::new(residuals, started);
                return Err(not_converged("GGE density solve", report, None));
            }
        };
        density_sweeps += sol.diagnostics.sweeps;
        let (gx, floored) = map(&x, &sol);
        let residual = gx.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !residual.is_finite() {
            return Err(Error::InvalidConfig("GGE iteration produced non-finite values".into()));
        }
        residuals.push(residual);
        warm = Some(sol.rho_h.clone());
        if residual <= config.tol {
            outcome = Some((sol, floored));
            break;
        }
        // a blown-up residual means the mixing history went stale
        if residual > 1e3 * best {
            mixer.reset();
        }
        best = best.min(residual);
        x = mixer.step(&x, &gx);
    }

    let report = ConvergenceReport::new(residuals, started);
    let Some((sol, floored)) = outcome else {
        let partial = solve_inner(&x, warm.as_deref())
            .ok()
            .and_then(|sol| assemble(&sol, &x).ok());
        return Err(not_converged("truncated GGE iteration", report, partial));
    };
    let state = assemble(&sol, &x)?;
    let min_constrained_rho = (1..=tsb)
        .flat_map(|n| state.rho(n).samples().to_vec())
        .fold(f64::INFINITY, f64::min);
    let diagnostics = GgeDiagnostics { floored_points: floored, density_sweeps, min_constrained_rho };
    Ok((state, report, diagnostics))
}
