use std::f64::consts::PI;

use super::AnisotropyParams;
use crate::error::{Error, Result};

/// `a_n(lambda) = (1/2pi) 2 sinh(n eta) / (cosh(n eta) - cos 2 lambda)`.
///
/// `n = 0` is a delta distribution and is never sampled.
pub fn kernel_a(n: usize, lambda: f64, params: &AnisotropyParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroStringLength);
    }
    let x = n as f64 * params.eta();
    // divided through by cosh(n eta) so large n cannot overflow
    Ok(x.tanh() / (PI * (1.0 - (2.0 * lambda).cos() / x.cosh())))
}

/// Fourier coefficient `a_n^(k) = e^{-|k| eta n}`; `a_0^(k) = 1`.
#[inline]
pub fn kernel_a_fourier(n: usize, k: i64, params: &AnisotropyParams) -> f64 {
    (-(k.unsigned_abs() as f64) * params.eta() * n as f64).exp()
}

/// Orders `(1 - delta_nm)|n-m|, |n-m|+2, ..., n+m` with weights 1, 2, ..., 2, 1.
fn anm_terms(n: usize, m: usize) -> impl Iterator<Item = (usize, f64)> {
    let lo = n.abs_diff(m);
    let hi = n + m;
    (lo..=hi).step_by(2).filter_map(move |j| {
        if j == lo {
            (lo != 0).then_some((j, 1.0))
        } else if j == hi {
            Some((j, 1.0))
        } else {
            Some((j, 2.0))
        }
    })
}

/// String-string scattering kernel `a_nm`.
pub fn kernel_anm(n: usize, m: usize, lambda: f64, params: &AnisotropyParams) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::ZeroStringLength);
    }
    anm_terms(n, m).try_fold(0.0, |acc, (j, w)| Ok(acc + w * kernel_a(j, lambda, params)?))
}

pub fn kernel_anm_fourier(n: usize, m: usize, k: i64, params: &AnisotropyParams) -> f64 {
    anm_terms(n, m).map(|(j, w)| w * kernel_a_fourier(j, k, params)).sum()
}

/// `s^(k) = 1 / (2 cosh k eta)`.
#[inline]
pub fn kernel_s_fourier(k: i64, params: &AnisotropyParams) -> f64 {
    let e = (-(k.unsigned_abs() as f64) * params.eta()).exp();
    e / (1.0 + e * e)
}

/// `s(lambda) = (1/2pi) sum_k e^{-2ik lambda} / cosh(k eta)`, summed until the
/// terms drop below 1e-18.
pub fn kernel_s(lambda: f64, params: &AnisotropyParams) -> f64 {
    let mut sum = kernel_s_fourier(0, params);
    let mut k = 1i64;
    loop {
        let c = kernel_s_fourier(k, params);
        if c < 1e-18 {
            break;
        }
        sum += 2.0 * c * (2.0 * k as f64 * lambda).cos();
        k += 1;
    }
    sum / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64) -> AnisotropyParams {
        AnisotropyParams::new(delta).unwrap()
    }

    #[test]
    fn a1_at_origin() {
        // sinh(eta) = sqrt(3) at Delta = 2
        let v = kernel_a(1, 0.0, &params(2.0)).unwrap();
        assert!((v - 3f64.sqrt() / PI).abs() < 1e-15);
        assert!((v - 0.551_328_895_421_792_1).abs() < 1e-12);
    }

    #[test]
    fn a_n_even_periodic_positive() {
        let p = params(1.2);
        for n in 1..6 {
            for &x in &[0.1, 0.7, 1.4] {
                let v = kernel_a(n, x, &p).unwrap();
                assert!(v > 0.0);
                assert_eq!(v, kernel_a(n, -x, &p).unwrap());
                assert!((v - kernel_a(n, x + PI, &p).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn a0_rejected() {
        assert!(matches!(kernel_a(0, 0.3, &params(2.0)), Err(Error::ZeroStringLength)));
    }

    #[test]
    fn a_large_n_is_finite() {
        let v = kernel_a(5000, 0.2, &params(2.0)).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn fourier_coefficients() {
        let p = params(2.0);
        assert_eq!(kernel_a_fourier(2, 0, &p), 1.0);
        assert!((kernel_a_fourier(1, 3, &p) - (-3.0 * p.eta()).exp()).abs() < 1e-16);
        for k in [-4, 0, 7] {
            assert_eq!(kernel_a_fourier(0, k, &p), 1.0);
        }
        assert_eq!(kernel_s_fourier(0, &p), 0.5);
        let expect = 1.0 / (2.0 * (2.0 * 2f64.acosh()).cosh());
        assert!((kernel_s_fourier(2, &p) - expect).abs() < 1e-16);
    }

    #[test]
    fn anm_expansions() {
        let p = params(1.5);
        for &x in &[0.0, 0.3, -1.1] {
            let a = |n| kernel_a(n, x, &p).unwrap();
            assert!((kernel_anm(1, 1, x, &p).unwrap() - a(2)).abs() < 1e-15);
            assert!((kernel_anm(1, 2, x, &p).unwrap() - (a(1) + a(3))).abs() < 1e-14);
            let a23 = a(1) + 2.0 * a(3) + a(5);
            assert!((kernel_anm(2, 3, x, &p).unwrap() - a23).abs() < 1e-14);
            assert_eq!(kernel_anm(2, 3, x, &p).unwrap(), kernel_anm(3, 2, x, &p).unwrap());
            let a33 = 2.0 * a(2) + 2.0 * a(4) + a(6);
            assert!((kernel_anm(3, 3, x, &p).unwrap() - a33).abs() < 1e-14);
        }
        for n in 1..8 {
            for m in 1..8 {
                for k in -5..5 {
                    assert_eq!(kernel_anm_fourier(n, m, k, &p), kernel_anm_fourier(m, n, k, &p));
                }
            }
        }
    }

    #[test]
    fn s_kernel_partial_sum_oracle() {
        let p = params(2.0);
        for &x in &[0.0, 0.4, 1.2] {
            // direct partial sum of the defining series with K = 200
            let mut oracle = 1.0;
            for k in 1..=200 {
                oracle += 2.0 * (2.0 * k as f64 * x).cos() / (k as f64 * p.eta()).cosh();
            }
            oracle /= 2.0 * PI;
            assert!((kernel_s(x, &p) - oracle).abs() < 1e-15);
        }
    }
}
