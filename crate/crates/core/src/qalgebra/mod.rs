//! q-deformed spin-s representations, the normalized L-operators, the
//! two-channel auxiliary transfer matrix of the Neel state and the generating
//! functions `Omega_s(lambda)` obtained from its unit eigenvalue.
//!
//! Spins are passed everywhere as the integer `two_s = 2s`.

mod lop;
mod omega;
mod rep;
mod transfer;

pub use lop::{build_l_normalized, LComponents, LSign};
pub use omega::{
    omega_closed_form, omega_closed_form_complex, omega_closed_form_fourier, omega_numeric,
    omega_numeric_at, GeneratingFunction, GeneratingFunctionSet, OmegaOptions, OmegaPoint,
};
pub use rep::{build_qspin_rep, q_number, QSpinRep};
pub use transfer::{
    build_two_channel_transfer, build_two_channel_transfer_at, leading_eigentriple, power_iteration,
    unit_eigentriple, EigenTriple, TwoChannelTransfer, WeightBlock, MIN_SPECTRAL_GAP,
};

use num_complex::Complex64;

use crate::spectral::AnisotropyParams;

/// The evaluation points `z^-_lambda = -eta/2 + i lambda` and
/// `z^+_lambda = eta/2 + i lambda` at which the boundary partition function
/// is normalized to one. `lambda` may be complex for analytic continuation.
#[inline]
pub fn unit_domain_point(lambda: Complex64, params: &AnisotropyParams) -> (Complex64, Complex64) {
    let i_lambda = Complex64::i() * lambda;
    let half = Complex64::new(0.5 * params.eta(), 0.0);
    (i_lambda - half, i_lambda + half)
}
