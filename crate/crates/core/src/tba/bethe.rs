use num_complex::Complex64;

use super::StringState;
use crate::spectral::{kernel_a_fourier, kernel_anm_fourier, kernel_s_fourier, AnisotropyParams, PeriodicFunction};

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual norms of the coupled equations
/// `rho_{n,t} = a_n - sum_{m <= n_max} a_nm * rho_m`.
///
/// Truncating the sum at `n_max` while the state solves the decoupled system
/// with `rho_{n_max+1} = 0` leaves a residual that is fixed by kinematics
/// alone: with `h = a_{N+1} - sum_{m <= N} a_{N+1,m} * rho_m`,
/// `r^_n(k) = -h^(k) sinh(n |k| eta) / sinh((N+1) |k| eta)`.
/// `correction` is this closure term and `corrected = raw + correction`
/// measures how well the equations themselves are solved.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledResidual {
    pub raw: Vec<f64>,
    pub correction: Vec<f64>,
    pub corrected: Vec<f64>,
}

impl CoupledResidual {
    pub fn max_corrected(&self) -> f64 {
        sup(&self.corrected)
    }

    pub fn max_raw(&self) -> f64 {
        sup(&self.raw)
    }
}

/// `sinh(n x) / sinh(m x)` for `n <= m`, with the `x -> 0` limit `n/m`.
fn sinh_ratio(n: usize, m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return n as f64 / m as f64;
    }
    let (nf, mf) = (n as f64, m as f64);
    (-(mf - nf) * x).exp() * (-(-2.0 * nf * x).exp_m1()) / (-(-2.0 * mf * x).exp_m1())
}

pub fn bethe_coupled_residual(state: &StringState, params: &AnisotropyParams) -> CoupledResidual {
    let grid = state.grid();
    let g = grid.size();
    let n_max = state.n_max();
    let eta = params.eta();
    let spectra: Vec<Vec<Complex64>> = (1..=n_max).map(|m| grid.spectrum(state.rho(m).samples())).collect();

    // predicted total density at level n from the truncated sum, in Fourier space
    let predicted = |n: usize| -> Vec<Complex64> {
        (0..g)
            .map(|idx| {
                let k = grid.mode(idx);
                let mut c = Complex64::new(kernel_a_fourier(n, k, params), 0.0);
                for (m, spec) in spectra.iter().enumerate() {
                    c -= spec[idx] * kernel_anm_fourier(n, m + 1, k, params);
                }
                c
            })
            .collect()
    };

    let boundary = predicted(n_max + 1);
    let mut raw = Vec::with_capacity(n_max);
    let mut correction = Vec::with_capacity(n_max);
    let mut corrected = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let total = state.rho_t(n);
        let prediction = grid.synthesize(&predicted(n));
        let r: Vec<f64> = total.samples().iter().zip(&prediction).map(|(t, p)| t - p).collect();
        let c_spec: Vec<Complex64> = (0..g)
            .map(|idx| {
                let x = grid.mode(idx).unsigned_abs() as f64 * eta;
                boundary[idx] * sinh_ratio(n, n_max + 1, x)
            })
            .collect();
        let c = grid.synthesize(&c_spec);
        let fixed: Vec<f64> = r.iter().zip(&c).map(|(a, b)| a + b).collect();
        raw.push(sup(&r));
        correction.push(sup(&c));
        corrected.push(sup(&fixed));
    }
    CoupledResidual { raw, correction, corrected }
}

/// Right-hand side of the decoupled equation for level `n`,
/// `s * (eta_{n-1} rho_{n-1} + eta_{n+1} rho_{n+1})`, where `eta_m rho_m` is
/// taken as `rho_{m,h}`. The `n = 1` source `s * (eta_0 rho_0) = s` enters
/// through its Fourier coefficients, and level `n_max + 1` is empty.
pub fn bethe_decoupled_step(state: &StringState, n: usize, params: &AnisotropyParams) -> PeriodicFunction {
    let grid = state.grid();
    let mut sum = vec![0.0; grid.size()];
    for m in [n.wrapping_sub(1), n + 1] {
        if m >= 1 && m <= state.n_max() {
            for (acc, v) in sum.iter_mut().zip(state.rho_h(m).samples()) {
                *acc += v;
            }
        }
    }
    let mut spec = grid.spectrum(&sum);
    for (idx, c) in spec.iter_mut().enumerate() {
        let k = grid.mode(idx);
        if n == 1 {
            *c += 1.0;
        }
        *c *= kernel_s_fourier(k, params);
    }
    PeriodicFunction::from_raw(grid, grid.synthesize(&spec))
}

/// `|rho_{n,t} - bethe_decoupled_step(n)|_inf` for each level.
pub fn bethe_decoupled_residual(state: &StringState, params: &AnisotropyParams) -> Vec<f64> {
    (1..=state.n_max())
        .map(|n| {
            let rhs = bethe_decoupled_step(state, n, params);
            let total = state.rho_t(n);
            let diff: Vec<f64> = total.samples().iter().zip(rhs.samples()).map(|(a, b)| a - b).collect();
            sup(&diff)
        })
        .collect()
}
