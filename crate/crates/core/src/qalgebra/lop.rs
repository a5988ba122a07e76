use nalgebra::DMatrix;
use num_complex::Complex64;

use super::QSpinRep;
use crate::error::{Error, Result};
use crate::spectral::AnisotropyParams;

/// Which normalization `sinh(z +- s eta)` is divided out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LSign {
    Plus,
    Minus,
}

impl LSign {
    #[inline]
    fn factor(self) -> f64 {
        match self {
            LSign::Plus => 1.0,
            LSign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            LSign::Plus => '+',
            LSign::Minus => '-',
        }
    }
}

/// The four physical components of a normalized L-operator, each an operator
/// on the auxiliary space:
/// `up_up = <up|L|up>`, `up_down = <up|L|down>`, `down_up = <down|L|up>`,
/// `down_down = <down|L|down>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LComponents {
    pub up_up: DMatrix<Complex64>,
    pub up_down: DMatrix<Complex64>,
    pub down_up: DMatrix<Complex64>,
    pub down_down: DMatrix<Complex64>,
}

/// `L^(+-)(z, s) = L(z, s) sinh(eta) / sinh(z +- s eta)` where
/// `<up|L|up> = sinh(z + eta s^z)/sinh(eta)`, `<down|L|down> = sinh(z - eta s^z)/sinh(eta)`,
/// `<up|L|down> = s^-` and `<down|L|up> = s^+`.
///
/// With `derivative` set, returns the componentwise `z`-derivative instead.
pub fn build_l_normalized(
    z: Complex64,
    rep: &QSpinRep,
    sign: LSign,
    params: &AnisotropyParams,
    derivative: bool,
) -> Result<LComponents> {
    let eta = params.eta();
    let shift = sign.factor() * rep.spin() * eta;
    let den = (z + shift).sinh();
    if den.norm() < 1e-14 {
        return Err(Error::NormalizationPole { re: z.re, im: z.im, sign: sign.symbol() });
    }
    let den_prime = (z + shift).cosh();
    let dim = rep.dim();

    // f(z)/den or its derivative f'/den - f den'/den^2
    let scaled = |f: Complex64, f_prime: Complex64| {
        if derivative {
            f_prime / den - f * den_prime / (den * den)
        } else {
            f / den
        }
    };

    let mut up_up = DMatrix::zeros(dim, dim);
    let mut down_down = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let k = rep.weight(i) * eta;
        up_up[(i, i)] = scaled((z + k).sinh(), (z + k).cosh());
        down_down[(i, i)] = scaled((z - k).sinh(), (z - k).cosh());
    }
    let off = eta.sinh() * scaled(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let up_down = rep.sminus.map(|x| off * x);
    let down_up = rep.splus.map(|x| off * x);
    Ok(LComponents { up_up, up_down, down_up, down_down })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::build_qspin_rep;

    fn params(delta: f64) -> AnisotropyParams {
        AnisotropyParams::new(delta).unwrap()
    }

    #[test]
    fn spin_half_diagonal_element() {
        let p = params(2.0);
        let rep = build_qspin_rep(1, &p).unwrap();
        let z = Complex64::new(0.3, 0.7);
        let l = build_l_normalized(z, &rep, LSign::Plus, &p, false).unwrap();
        // undo the normalization and compare with the six-vertex weights
        let norm = (z + 0.5 * p.eta()).sinh() / p.eta().sinh();
        let h = 0.5 * p.eta();
        let e0 = l.up_up[(0, 0)] * norm;
        let e1 = l.up_up[(1, 1)] * norm;
        assert!((e0 - (z - h).sinh() / p.eta().sinh()).norm() < 1e-14);
        assert!((e1 - (z + h).sinh() / p.eta().sinh()).norm() < 1e-14);
        assert!((l.down_up[(1, 0)] * norm - 1.0).norm() < 1e-14);
    }

    #[test]
    fn highest_weight_is_normalized() {
        let p = params(1.4);
        for two_s in 1..=5 {
            let rep = build_qspin_rep(two_s, &p).unwrap();
            for z in [Complex64::new(0.1, -0.4), Complex64::new(-0.8, 2.0)] {
                let l = build_l_normalized(z, &rep, LSign::Plus, &p, false).unwrap();
                assert!((l.up_up[(two_s, two_s)] - 1.0).norm() < 1e-14);
                let l = build_l_normalized(z, &rep, LSign::Minus, &p, false).unwrap();
                assert!((l.up_up[(0, 0)] - 1.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = params(1.2);
        let rep = build_qspin_rep(3, &p).unwrap();
        let z = Complex64::new(0.4, 0.25);
        let h = 1e-5;
        let d = build_l_normalized(z, &rep, LSign::Plus, &p, true).unwrap();
        let fp = build_l_normalized(z + h, &rep, LSign::Plus, &p, false).unwrap();
        let fm = build_l_normalized(z - h, &rep, LSign::Plus, &p, false).unwrap();
        let pairs = [
            (&d.up_up, &fp.up_up, &fm.up_up),
            (&d.up_down, &fp.up_down, &fm.up_down),
            (&d.down_up, &fp.down_up, &fm.down_up),
            (&d.down_down, &fp.down_down, &fm.down_down),
        ];
        for (a, b, c) in pairs {
            let fd = (b - c) / Complex64::new(2.0 * h, 0.0);
            assert!((a - fd).camax() < 1e-8);
        }
    }

    #[test]
    fn pole_rejected() {
        let p = params(2.0);
        let rep = build_qspin_rep(2, &p).unwrap();
        let z = Complex64::new(-p.eta(), 0.0);
        assert!(matches!(
            build_l_normalized(z, &rep, LSign::Plus, &p, false),
            Err(Error::NormalizationPole { sign: '+', .. })
        ));
    }
}
