use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qalgebra::{omega_closed_form_complex, GeneratingFunctionSet};
use crate::spectral::{
    forward_transform, kernel_a, kernel_a_fourier, AnisotropyParams, FourierSeries, Grid, PeriodicFunction,
};

/// Default bound on the amplified tail `cosh(K eta) |Omega^_s(K)| / pi`.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-10;

/// A hole density together with the size of the last Fourier mode kept.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleDensity {
    pub rho_h: PeriodicFunction,
    pub tail: f64,
}

fn a_samples(n: usize, grid: &Grid, params: &AnisotropyParams) -> Result<Vec<f64>> {
    grid.nodes().iter().map(|&x| kernel_a(n, x, params)).collect()
}

/// `rho^_{2s,h}(k) = e^{-2s|k| eta} + cosh(k eta) Omega^_s(k) / pi` for
/// `|k| <= K`, synthesized on `grid`.
///
/// The `cosh(k eta)` factor amplifies any error in the supplied
/// coefficients, so this route is only as good as `omega` is exact; it is the
/// natural route for closed-form coefficients. Samples of `Omega_s` carry
/// round-off that the factor blows up, and for them
/// [`hole_density_from_shifted`] evaluates the same identity stably.
pub fn hole_density_from_omega(
    two_s: usize,
    omega: &FourierSeries,
    grid: &Grid,
    params: &AnisotropyParams,
    threshold: f64,
) -> Result<HoleDensity> {
    let cutoff = omega.cutoff();
    grid.check_cutoff(cutoff)?;
    let eta = params.eta();
    let tail = (cutoff as f64 * eta).cosh() * omega.coeff(cutoff as i64).abs() / PI;
    if !(tail <= threshold) {
        return Err(Error::TailAmplified { tail, threshold, cutoff });
    }
    let samples = grid.synthesize_even(|k| {
        let mut c = kernel_a_fourier(two_s, k as i64, params);
        if k <= cutoff {
            c += (k as f64 * eta).cosh() * omega.coeff(k as i64) / PI;
        }
        c
    });
    Ok(HoleDensity { rho_h: PeriodicFunction::new(grid, samples)?, tail })
}

/// Real-space form of the identity,
/// `rho_{2s,h} = a_{2s} + (1/2pi)[Omega_s(lambda + i eta/2) + Omega_s(lambda - i eta/2)]`,
/// from samples of the bracket divided by two (see
/// [`GeneratingFunction::shifted`](crate::qalgebra::GeneratingFunction)).
pub fn hole_density_from_shifted(
    two_s: usize,
    shifted: &PeriodicFunction,
    params: &AnisotropyParams,
) -> Result<PeriodicFunction> {
    let grid = shifted.grid();
    let a = a_samples(two_s, grid, params)?;
    PeriodicFunction::new(grid, a.iter().zip(shifted.samples()).map(|(a, w)| a + w / PI).collect())
}

/// Real-space identity with the analytically continued closed form of
/// `Omega_s`, for `2s` in `{1, 2}`.
pub fn hole_density_from_closed_form(two_s: usize, grid: &Grid, params: &AnisotropyParams) -> Result<PeriodicFunction> {
    let shift = Complex64::new(0.0, 0.5 * params.eta());
    let shifted = grid
        .nodes()
        .iter()
        .map(|&x| {
            let up = omega_closed_form_complex(two_s, Complex64::new(x, 0.0) + shift, params)?;
            let down = omega_closed_form_complex(two_s, Complex64::new(x, 0.0) - shift, params)?;
            Ok(0.5 * (up + down).re)
        })
        .collect::<Result<Vec<_>>>()?;
    hole_density_from_shifted(two_s, &PeriodicFunction::new(grid, shifted)?, params)
}

/// Target hole densities `rho_{n,h}` for `n = 1..=2 s_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleConstraintSet {
    targets: Vec<PeriodicFunction>,
    tails: Vec<f64>,
}

impl HoleConstraintSet {
    /// Checks positivity of every target (up to `-1e-12`).
    pub fn new(targets: Vec<PeriodicFunction>, tails: Vec<f64>) -> Result<Self> {
        if targets.is_empty() || targets.len() != tails.len() {
            return Err(Error::InvalidConfig("constraint set needs one tail per target".into()));
        }
        for (i, t) in targets.iter().enumerate() {
            if let Some(v) = t.samples().iter().find(|&&v| v < -1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "target hole density for n = {} is negative ({v:e})",
                    i + 1
                )));
            }
        }
        Ok(Self { targets, tails })
    }

    /// Targets from the generating functions through the real-space identity.
    ///
    /// The tail of each target is the size of its Fourier coefficient at the
    /// mode cutoff `K`, which is exactly `cosh(K eta) |Omega^_s(K)| / pi`; it
    /// must stay below `threshold`.
    pub fn from_generating_functions(
        set: &GeneratingFunctionSet,
        cutoff: usize,
        threshold: f64,
    ) -> Result<Self> {
        let params = set.params();
        let mut targets = Vec::new();
        let mut tails = Vec::new();
        for f in set.iter() {
            let series = forward_transform(&f.shifted, cutoff)?;
            let tail = series.coeff(cutoff as i64).abs() / PI;
            if !(tail <= threshold) {
                return Err(Error::TailAmplified { tail, threshold, cutoff });
            }
            targets.push(hole_density_from_shifted(f.two_s, &f.shifted, params)?);
            tails.push(tail);
        }
        Self::new(targets, tails)
    }

    /// `2 s_bar`, the number of constrained string levels.
    pub fn two_sbar(&self) -> usize {
        self.targets.len()
    }

    /// Target for string length `n`.
    pub fn target(&self, n: usize) -> &PeriodicFunction {
        &self.targets[n - 1]
    }

    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    /// The first `two_sbar` targets.
    pub fn truncated(&self, two_sbar: usize) -> Result<Self> {
        if two_sbar == 0 || two_sbar > self.two_sbar() {
            return Err(Error::InvalidConfig(format!(
                "cannot restrict {} constraints to {two_sbar}",
                self.two_sbar()
            )));
        }
        Self::new(self.targets[..two_sbar].to_vec(), self.tails[..two_sbar].to_vec())
    }
}
