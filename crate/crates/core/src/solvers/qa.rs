use std::time::Instant;

use rayon::prelude::*;

use super::densities::densities_from_log_eta;
use super::{logaddexp, not_converged, sup_diff, ConvergenceReport, SKernel, SolverConfig};
use crate::error::{Error, Result};
use crate::spectral::NeelDriving;
use crate::tba::StringState;

/// Solves `ln eta_n = d_n + s * [ln(1 + eta_{n-1}) + ln(1 + eta_{n+1})]`,
/// `eta_0 = 0`, for the Neel driving, then recovers the densities.
///
/// The driving splits as `d_n = (-1)^n O + E` with `O` log-singular at the
/// origin and `E` at the zone edge. Writing `ln eta_n = d_n + u_n`, every
/// term that enters a convolution becomes smooth:
/// `ln(1 + eta_m) = O + ln(e^{-O} + e^{E + u_m})` for even `m` and
/// `ln(1 + e^{-O + E + u_m})` for odd `m`, where `e^{-O}` and `e^{E}` are
/// entire. The singular `O` only appears as `s * O`, which is computed from
/// its exact Fourier coefficients. The iteration is damped Jacobi on `u_n`
/// starting from `u_n = 0`, i.e. `eta_n = e^{d_n}`.
pub fn solve_qa_gtba(config: &SolverConfig) -> Result<(StringState, ConvergenceReport)> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid()?;
    let params = &config.params;
    let driving = NeelDriving::new(params, &grid)?;
    let kernel = SKernel::new(&grid, params);
    let origin = driving.origin_log();
    let edge = driving.edge_log();
    let s_origin = kernel.apply_coefficients(|k| driving.origin_log_fourier(k));
    let n_max = config.n_max;
    let g = grid.size();

    // smooth part of ln(1 + eta_m) once the O term is taken out
    let smooth_log = |m: usize, u: &[f64]| -> Vec<f64> {
        if m == 0 {
            return vec![0.0; g];
        }
        (0..g)
            .map(|j| {
                if m % 2 == 0 {
                    logaddexp(-origin[j], edge[j] + u[j])
                } else {
                    logaddexp(0.0, -origin[j] + edge[j] + u[j])
                }
            })
            .collect()
    };
    // even neighbours m >= 2 contribute one s * O each
    let origin_count = |n: usize| [n - 1, n + 1].iter().filter(|&&m| m >= 2 && m % 2 == 0).count() as f64;

    // ln eta_n = d_n + u_n
    let full_log = |n: usize, u: &[f64]| -> Vec<f64> {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        (0..g).map(|j| sign * origin[j] + edge[j] + u[j]).collect()
    };
    let zeros = vec![0.0; g];

    let mut u = vec![vec![0.0; g]; n_max];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iter {
        let beyond = {
            let logs: Vec<Vec<f64>> = (1..=n_max).map(|n| full_log(n, &u[n - 1])).collect();
            let refs: Vec<&[f64]> = logs.iter().map(Vec::as_slice).collect();
            let next = config.closure.extrapolate(&refs);
            let driving = full_log(n_max + 1, &zeros);
            next.iter().zip(&driving).map(|(l, d)| l - d).collect::<Vec<f64>>()
        };
        let level = |m: usize| -> &[f64] {
            if m == 0 {
                &[]
            } else if m <= n_max {
                &u[m - 1]
            } else {
                &beyond
            }
        };
        let updated: Vec<Vec<f64>> = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let lower = smooth_log(n - 1, level(n - 1));
                let upper = smooth_log(n + 1, level(n + 1));
                let sum: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| a + b).collect();
                let c = origin_count(n);
                kernel.apply(&sum).iter().zip(&s_origin).map(|(v, so)| v + c * so).collect()
            })
            .collect();
        let change = u.iter().zip(&updated).map(|(a, b)| sup_diff(a, b)).fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::InvalidConfig("QA iteration produced non-finite values".into()));
        }
        residuals.push(change);
        let alpha = config.damping;
        for (old, new) in u.iter_mut().zip(&updated) {
            old.iter_mut().zip(new).for_each(|(o, n)| *o = (1.0 - alpha) * *o + alpha * n);
        }
        if change <= config.tol {
            converged = true;
            break;
        }
    }

    let log_eta: Vec<Vec<f64>> = (1..=n_max).map(|n| full_log(n, &u[n - 1])).collect();
    let densities = densities_from_log_eta(&grid, &log_eta, config);
    let report = ConvergenceReport::new(residuals, started);
    if !converged {
        let partial = match densities {
            Ok((s, _, _)) => Some(s),
            Err(Error::NotConverged(p)) => p.state,
            Err(_) => None,
        };
        return Err(not_converged("QA GTBA iteration", report, partial));
    }
    let (state, _, _) = densities?;
    Ok((state, report))
}
