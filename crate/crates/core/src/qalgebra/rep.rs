use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::AnisotropyParams;

/// q-number `[x]_q = sinh(eta x) / sinh(eta)`.
#[inline]
pub fn q_number(x: f64, params: &AnisotropyParams) -> f64 {
    (params.eta() * x).sinh() / params.eta().sinh()
}

/// Spin-s irreducible representation of `U_q(sl2)` on `C^{2s+1}`.
///
/// Basis index `i = 0..=2s` carries weight `k = i - s`.
#[derive(Debug, Clone, PartialEq)]
pub struct QSpinRep {
    two_s: usize,
    pub sz: DMatrix<f64>,
    pub splus: DMatrix<f64>,
    pub sminus: DMatrix<f64>,
}

impl QSpinRep {
    #[inline]
    pub fn two_s(&self) -> usize {
        self.two_s
    }

    #[inline]
    pub fn spin(&self) -> f64 {
        0.5 * self.two_s as f64
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    /// Weight `k` of basis vector `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        i as f64 - self.spin()
    }
}

pub fn build_qspin_rep(two_s: usize, params: &AnisotropyParams) -> Result<QSpinRep> {
    if two_s == 0 {
        return Err(Error::InvalidSpin(two_s));
    }
    let dim = two_s + 1;
    let s = 0.5 * two_s as f64;
    let sz = DMatrix::from_fn(dim, dim, |r, c| if r == c { r as f64 - s } else { 0.0 });
    let mut splus = DMatrix::zeros(dim, dim);
    let mut sminus = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let k = i as f64 - s;
        if i + 1 < dim {
            splus[(i + 1, i)] = (q_number(s + 1.0 + k, params) * q_number(s - k, params)).sqrt();
        }
        if i > 0 {
            sminus[(i - 1, i)] = (q_number(s + 1.0 - k, params) * q_number(s + k, params)).sqrt();
        }
    }
    Ok(QSpinRep { two_s, sz, splus, sminus })
}
