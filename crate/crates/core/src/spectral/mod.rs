//! Periodic Fourier analysis on the rapidity interval `[-pi/2, pi/2)`, the
//! string kernels of the gapped XXZ chain and the Neel driving terms.
//!
//! Conventions: a pi-periodic function `f` has coefficients
//! `f^(k) = int_{-pi/2}^{pi/2} e^{2ik lambda} f(lambda) d lambda` and is
//! reconstructed as `f(lambda) = (1/pi) sum_k e^{-2ik lambda} f^(k)`. With these
//! conventions the convolution `(f*g)(lambda) = int f(lambda - mu) g(mu) d mu`
//! has coefficients `f^(k) g^(k)`.

mod driving;
mod fourier;
mod kernels;
mod theta;

pub use driving::{
    neel_driving, neel_driving_series, neel_driving_theta, NeelDriving, DRIVING_AGREEMENT_TOL,
};
pub use fourier::{convolve, forward_transform, inverse_transform, FourierSeries, Grid, PeriodicFunction};
pub use kernels::{
    kernel_a, kernel_a_fourier, kernel_anm, kernel_anm_fourier, kernel_s, kernel_s_fourier,
};
pub use theta::jacobi_theta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest anisotropy accepted; below it `eta` degenerates every kernel.
pub const MIN_DELTA: f64 = 1.0 + 1e-6;

/// Anisotropy `Delta = cosh(eta)` of the chain, restricted to the gapped regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyParams {
    delta: f64,
    eta: f64,
}

impl AnisotropyParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < MIN_DELTA {
            return Err(Error::InvalidAnisotropy(delta));
        }
        Ok(Self { delta, eta: delta.acosh() })
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Nome `q = e^{-2 eta}` of the theta functions in the Neel driving terms.
    #[inline]
    pub fn nome(&self) -> f64 {
        (-2.0 * self.eta).exp()
    }
}
