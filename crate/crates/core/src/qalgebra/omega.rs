use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::transfer::{eigentriple_near, restrict};
use super::{build_two_channel_transfer_at, unit_domain_point, unit_eigentriple};
use crate::error::{Error, Result};
use crate::spectral::{forward_transform, AnisotropyParams, FourierSeries, Grid, PeriodicFunction};

/// Controls for [`omega_numeric_at`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOptions {
    /// Compare the perturbative derivative with a finite difference of the
    /// eigenvalue itself.
    pub cross_check: bool,
    /// Largest step of the fourth-order finite difference in `z2`. It is
    /// reduced when the spectral gap is small.
    pub fd_step: f64,
    /// Largest tolerated disagreement between the two estimators.
    pub fd_tolerance: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self { cross_check: true, fd_step: 1e-3, fd_tolerance: 1e-8 }
    }
}

/// One evaluation of `Omega_s` with its diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct OmegaPoint {
    pub value: Complex64,
    /// The unit eigenvalue `Lambda_s` at the evaluation point.
    pub eigenvalue: Complex64,
    pub gap: f64,
    /// Finite-difference estimate, when the cross-check ran.
    pub fd_value: Option<Complex64>,
}

/// `Omega_s(lambda) = (1/2) d Lambda_s / d z2` at `(z^-_lambda, z^+_lambda)`.
///
/// The derivative is first-order perturbation theory,
/// `d Lambda = left^T (dT/dz2) right` with `left^T right = 1`, using the
/// analytic `z2`-derivative of the transfer matrix. `lambda` may be complex.
pub fn omega_numeric_at(
    two_s: usize,
    lambda: Complex64,
    params: &AnisotropyParams,
    options: &OmegaOptions,
) -> Result<OmegaPoint> {
    let (z1, z2) = unit_domain_point(lambda, params);
    let t = build_two_channel_transfer_at(z1, z2, two_s, params)?;
    let triple = unit_eigentriple(&t)?;
    let block = t.largest_block();
    let dt = restrict(&t.z2_derivative(params)?, block);
    let d_lambda = (triple.left.transpose() * dt * &triple.right)[(0, 0)];
    let value = 0.5 * d_lambda;

    let fd_value = if options.cross_check {
        // the eigenvalue drifts by about |2 Omega| h per step, which has to
        // stay well inside the gap or the tracking jumps to a neighbour
        let h = options.fd_step.min(0.1 * triple.gap / (2.0 * value.norm()).max(1.0));
        let eig_at = |offset: f64| -> Result<Complex64> {
            let shifted = build_two_channel_transfer_at(z1, z2 + offset, two_s, params)?;
            Ok(eigentriple_near(&shifted.block_matrix(shifted.largest_block()), triple.value)?.value)
        };
        let fd = (-eig_at(2.0 * h)? + 8.0 * eig_at(h)? - 8.0 * eig_at(-h)? + eig_at(-2.0 * h)?) / (12.0 * h);
        let fd = 0.5 * fd;
        let diff = (fd - value).norm();
        if diff > options.fd_tolerance * value.norm().max(1.0) {
            return Err(Error::DerivativeMismatch { two_s, lambda, diff });
        }
        Some(fd)
    } else {
        None
    };
    Ok(OmegaPoint { value, eigenvalue: triple.value, gap: triple.gap, fd_value })
}

/// Real-rapidity generating function with the default cross-check.
pub fn omega_numeric(two_s: usize, lambda: f64, params: &AnisotropyParams) -> Result<f64> {
    Ok(omega_numeric_at(two_s, Complex64::new(lambda, 0.0), params, &OmegaOptions::default())?.value.re)
}

/// `Omega = A / (B - C cos 2 lambda)` for the spins that have a closed form.
fn closed_form_coefficients(two_s: usize, params: &AnisotropyParams) -> Result<(f64, f64, f64)> {
    let eta = params.eta();
    match two_s {
        1 => Ok((-(2.0 * eta).sinh(), 1.0 + (2.0 * eta).cosh(), 2.0)),
        2 => Ok((-2.0 * (3.0 * eta).sinh(), eta.cosh() + 2.0 * (3.0 * eta).cosh(), 3.0)),
        other => Err(Error::NoClosedForm(other)),
    }
}

/// Closed forms for `s = 1/2` and `s = 1`:
/// `Omega_{1/2} = -sinh 2eta / (1 - 2 cos 2lambda + cosh 2eta)` and
/// `Omega_1 = 2 sinh 3eta / (3 cos 2lambda - cosh eta - 2 cosh 3eta)`.
pub fn omega_closed_form(two_s: usize, lambda: f64, params: &AnisotropyParams) -> Result<f64> {
    let (a, b, c) = closed_form_coefficients(two_s, params)?;
    Ok(a / (b - c * (2.0 * lambda).cos()))
}

pub fn omega_closed_form_complex(two_s: usize, lambda: Complex64, params: &AnisotropyParams) -> Result<Complex64> {
    let (a, b, c) = closed_form_coefficients(two_s, params)?;
    Ok(a / (b - c * (2.0 * lambda).cos()))
}

/// Exact Fourier coefficient of the closed form,
/// `pi A r^|k| / sqrt(B^2 - C^2)` with `r = (B - sqrt(B^2 - C^2)) / C`.
pub fn omega_closed_form_fourier(two_s: usize, k: i64, params: &AnisotropyParams) -> Result<f64> {
    let (a, b, c) = closed_form_coefficients(two_s, params)?;
    let root = (b * b - c * c).sqrt();
    // (B - root)/C written without cancellation
    let r = c / (b + root);
    Ok(PI * a * r.powi(k.unsigned_abs() as i32) / root)
}

/// `Omega_s` on a grid together with the data the hole-density identity needs.
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    pub two_s: usize,
    /// Samples of `Omega_s(lambda)`.
    pub omega: PeriodicFunction,
    /// `Omega^_s(k)` for `k = 0..=K`.
    pub coeffs: FourierSeries,
    /// `(1/2)[Omega_s(lambda + i eta/2) + Omega_s(lambda - i eta/2)]`, whose
    /// Fourier coefficients are `cosh(k eta) Omega^_s(k)`.
    pub shifted: PeriodicFunction,
}

/// Generating functions for `s = 1/2, 1, ..., s_max`.
#[derive(Debug, Clone)]
pub struct GeneratingFunctionSet {
    params: AnisotropyParams,
    functions: Vec<GeneratingFunction>,
}

impl GeneratingFunctionSet {
    /// Evaluates every `Omega_s` numerically, in parallel over grid nodes.
    pub fn new(
        params: &AnisotropyParams,
        grid: &Grid,
        two_s_max: usize,
        cutoff: usize,
        options: &OmegaOptions,
    ) -> Result<Self> {
        grid.check_cutoff(cutoff)?;
        let shift = Complex64::new(0.0, 0.5 * params.eta());
        let nodes = grid.nodes();
        let functions = (1..=two_s_max)
            .map(|two_s| {
                let points: Vec<(f64, f64)> = nodes
                    .par_iter()
                    .map(|&lambda| {
                        let real = Complex64::new(lambda, 0.0);
                        let on_axis = omega_numeric_at(two_s, real, params, options)?;
                        let off_axis = omega_numeric_at(two_s, real + shift, params, options)?;
                        Ok((on_axis.value.re, off_axis.value.re))
                    })
                    .collect::<Result<_>>()?;
                let (omega, shifted): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
                let omega = PeriodicFunction::new(grid, omega)?;
                let coeffs = forward_transform(&omega, cutoff)?;
                Ok(GeneratingFunction { two_s, omega, coeffs, shifted: PeriodicFunction::new(grid, shifted)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params: *params, functions })
    }

    pub fn params(&self) -> &AnisotropyParams {
        &self.params
    }

    pub fn two_s_max(&self) -> usize {
        self.functions.len()
    }

    pub fn get(&self, two_s: usize) -> Option<&GeneratingFunction> {
        two_s.checked_sub(1).and_then(|i| self.functions.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = &GeneratingFunction> {
        self.functions.iter()
    }
}
