use std::f64::consts::PI;

use super::{jacobi_theta, AnisotropyParams, Grid, PeriodicFunction};
use crate::error::{Error, Result};

/// Maximal disagreement tolerated between the two evaluations of `d_n`.
pub const DRIVING_AGREEMENT_TOL: f64 = 1e-10;

const SERIES_TERM_FLOOR: f64 = 1e-18;

#[inline]
fn parity_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_regular(n: usize, lambda: f64) -> Result<()> {
    if lambda.sin().abs() < 1e-15 || lambda.cos().abs() < 1e-15 {
        return Err(Error::DrivingSingular { n, lambda });
    }
    Ok(())
}

/// Fourier-series form of the Neel driving term,
/// `d_n = sum_k e^{-2ik lambda} tanh(k eta)/k [(-1)^n - (-1)^k]` with the
/// `k = 0` term `eta [(-1)^n - 1]`.
///
/// The slowly decaying `1/k` part is summed in closed form,
/// `sum_{k>=1} cos(2k lambda)/k = -ln|2 sin lambda|`, leaving a remainder with
/// coefficients `(tanh(k eta) - 1)/k` that decays like `e^{-2k eta}`. At most
/// `cutoff` remainder terms are used.
pub fn neel_driving_series(n: usize, lambda: f64, params: &AnisotropyParams, cutoff: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroStringLength);
    }
    check_regular(n, lambda)?;
    let eta = params.eta();
    let sign = parity_sign(n);
    let mut value = eta * (sign - 1.0) - 2.0 * sign * (2.0 * lambda.sin()).abs().ln()
        + 2.0 * (2.0 * lambda.cos()).abs().ln();
    for k in 1..=cutoff {
        let e = (-2.0 * k as f64 * eta).exp();
        let tanh_minus_one = -2.0 * e / (1.0 + e);
        let weight = sign - if k % 2 == 0 { 1.0 } else { -1.0 };
        if weight != 0.0 {
            value += 2.0 * (2.0 * k as f64 * lambda).cos() * tanh_minus_one / k as f64 * weight;
        }
        if e < SERIES_TERM_FLOOR {
            break;
        }
    }
    Ok(value)
}

/// Theta-function form of the Neel driving term,
/// `(-1)^n ln[theta_4^2/theta_1^2] + ln[theta_2^2/theta_3^2]` at nome `e^{-2 eta}`.
pub fn neel_driving_theta(n: usize, lambda: f64, params: &AnisotropyParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroStringLength);
    }
    check_regular(n, lambda)?;
    let (origin, edge) = split_logs(lambda, params.nome())?;
    Ok(parity_sign(n) * origin + edge)
}

/// `(ln[theta_4^2/theta_1^2], ln[theta_2^2/theta_3^2])`.
fn split_logs(lambda: f64, q: f64) -> Result<(f64, f64)> {
    let t1 = jacobi_theta(1, lambda, q)?;
    let t2 = jacobi_theta(2, lambda, q)?;
    let t3 = jacobi_theta(3, lambda, q)?;
    let t4 = jacobi_theta(4, lambda, q)?;
    Ok((
        2.0 * (t4.abs().ln() - t1.abs().ln()),
        2.0 * (t2.abs().ln() - t3.abs().ln()),
    ))
}

/// Remainder cutoff large enough for `e^{-2K eta}` to reach the term floor.
fn default_series_cutoff(params: &AnisotropyParams) -> usize {
    let needed = (-SERIES_TERM_FLOOR.ln() / (2.0 * params.eta())).ceil() as usize;
    needed.max(200)
}

/// Samples of `d_n` on the grid, evaluated by both the series and the theta
/// form; fails if they disagree by more than [`DRIVING_AGREEMENT_TOL`].
pub fn neel_driving(n: usize, grid: &Grid, params: &AnisotropyParams) -> Result<PeriodicFunction> {
    let cutoff = default_series_cutoff(params);
    let mut samples = Vec::with_capacity(grid.size());
    for lambda in grid.nodes() {
        let series = neel_driving_series(n, lambda, params, cutoff)?;
        let theta = neel_driving_theta(n, lambda, params)?;
        let diff = (series - theta).abs();
        if diff > DRIVING_AGREEMENT_TOL * theta.abs().max(1.0) {
            return Err(Error::DrivingMismatch { n, lambda, diff });
        }
        samples.push(theta);
    }
    PeriodicFunction::new(grid, samples)
}

/// The Neel driving split into its two logarithmic singularities,
/// `d_n = (-1)^n O + E` with `O = ln[theta_4^2/theta_1^2]` singular at the
/// origin and `E = ln[theta_2^2/theta_3^2]` singular at the zone edge.
///
/// The exponentials `e^{-O}` and `e^{E}` are entire, which lets the solvers
/// keep every sampled quantity smooth.
#[derive(Debug, Clone)]
pub struct NeelDriving {
    params: AnisotropyParams,
    grid: Grid,
    origin_log: Vec<f64>,
    edge_log: Vec<f64>,
}

impl NeelDriving {
    pub fn new(params: &AnisotropyParams, grid: &Grid) -> Result<Self> {
        let q = params.nome();
        let mut origin_log = Vec::with_capacity(grid.size());
        let mut edge_log = Vec::with_capacity(grid.size());
        for lambda in grid.nodes() {
            let (o, e) = split_logs(lambda, q)?;
            origin_log.push(o);
            edge_log.push(e);
        }
        Ok(Self { params: *params, grid: grid.clone(), origin_log, edge_log })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn origin_log(&self) -> &[f64] {
        &self.origin_log
    }

    pub fn edge_log(&self) -> &[f64] {
        &self.edge_log
    }

    /// `d_n` on the grid.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let sign = parity_sign(n);
        self.origin_log.iter().zip(&self.edge_log).map(|(o, e)| sign * o + e).collect()
    }

    /// Exact Fourier coefficient of the origin singularity:
    /// `pi tanh(k eta)/k`, and `pi eta` at `k = 0`.
    pub fn origin_log_fourier(&self, k: usize) -> f64 {
        let eta = self.params.eta();
        if k == 0 {
            PI * eta
        } else {
            PI * (k as f64 * eta).tanh() / k as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_agree_on_grid() {
        let grid = Grid::new(256).unwrap();
        for delta in [1.2, 2.0] {
            let p = AnisotropyParams::new(delta).unwrap();
            for n in 1..=4 {
                for lambda in grid.nodes() {
                    let a = neel_driving_series(n, lambda, &p, 200).unwrap();
                    let b = neel_driving_theta(n, lambda, &p).unwrap();
                    assert!((a - b).abs() < 1e-10, "n={n} lambda={lambda}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn depends_on_parity_only_and_is_even() {
        let grid = Grid::new(64).unwrap();
        let p = AnisotropyParams::new(2.0).unwrap();
        let d1 = neel_driving(1, &grid, &p).unwrap();
        assert_eq!(d1, neel_driving(3, &grid, &p).unwrap());
        assert_eq!(d1, neel_driving(5, &grid, &p).unwrap());
        let s = d1.samples();
        for j in 0..s.len() {
            assert!((s[j] - s[s.len() - 1 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_points_rejected() {
        let p = AnisotropyParams::new(2.0).unwrap();
        assert!(matches!(neel_driving_theta(2, 0.0, &p), Err(Error::DrivingSingular { .. })));
        assert!(matches!(neel_driving_series(2, 0.0, &p, 50), Err(Error::DrivingSingular { .. })));
    }

    #[test]
    fn split_reassembles() {
        let grid = Grid::new(32).unwrap();
        let p = AnisotropyParams::new(1.5).unwrap();
        let split = NeelDriving::new(&p, &grid).unwrap();
        for n in 1..=2 {
            let direct = neel_driving(n, &grid, &p).unwrap();
            for (a, b) in split.samples(n).iter().zip(direct.samples()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
