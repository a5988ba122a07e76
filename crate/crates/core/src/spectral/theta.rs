use crate::error::{Error, Result};

const TERM_FLOOR: f64 = 1e-16;

/// Jacobi theta function `theta_j(lambda, q)`, `j = 1..=4`, from its q-series.
///
/// Summation stops once a term falls below 1e-16 in absolute value.
pub fn jacobi_theta(j: u8, lambda: f64, nome: f64) -> Result<f64> {
    if !(nome > 0.0 && nome < 1.0) {
        return Err(Error::NomeOutOfRange(nome));
    }
    let ln_q = nome.ln();
    match j {
        1 | 2 => {
            let mut sum = 0.0;
            for n in 0.. {
                let half = n as f64 + 0.5;
                let w = 2.0 * (half * half * ln_q).exp();
                if w < TERM_FLOOR {
                    break;
                }
                let arg = (2 * n + 1) as f64 * lambda;
                sum += if j == 1 {
                    if n % 2 == 0 { w * arg.sin() } else { -w * arg.sin() }
                } else {
                    w * arg.cos()
                };
            }
            Ok(sum)
        }
        3 | 4 => {
            let mut sum = 1.0;
            for n in 1.. {
                let nf = n as f64;
                let w = 2.0 * (nf * nf * ln_q).exp();
                if w < TERM_FLOOR {
                    break;
                }
                let t = w * (2.0 * nf * lambda).cos();
                sum += if j == 4 && n % 2 == 1 { -t } else { t };
            }
            Ok(sum)
        }
        other => Err(Error::ThetaIndex(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nome(delta: f64) -> f64 {
        (-2.0 * f64::acosh(delta)).exp()
    }

    #[test]
    fn theta1_vanishes_at_origin() {
        assert_eq!(jacobi_theta(1, 0.0, nome(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn theta4_over_theta1_blows_up() {
        let q = nome(1.2);
        let mut last = 0.0;
        for &x in &[1e-1, 1e-3, 1e-6, 1e-9] {
            let r = jacobi_theta(4, x, q).unwrap() / jacobi_theta(1, x, q).unwrap();
            assert!(r > last);
            last = r;
        }
        assert!(last > 1e8);
    }

    #[test]
    fn theta3_matches_partial_sum_and_product() {
        let q = nome(2.0);
        let x = 0.3;
        let mut partial = 1.0;
        for n in 1..=100 {
            let nf = n as f64;
            partial += 2.0 * q.powf(nf * nf) * (2.0 * nf * x).cos();
        }
        // triple product: prod (1 - q^2m)(1 + 2 q^(2m-1) cos 2x + q^(4m-2))
        let mut product = 1.0;
        for m in 1..=60 {
            let mf = m as f64;
            product *= (1.0 - q.powf(2.0 * mf))
                * (1.0 + 2.0 * q.powf(2.0 * mf - 1.0) * (2.0 * x).cos() + q.powf(4.0 * mf - 2.0));
        }
        let v = jacobi_theta(3, x, q).unwrap();
        assert!((v - partial).abs() < 1e-14);
        assert!((v - product).abs() < 1e-14);
    }

    #[test]
    fn quarter_period_shifts() {
        let q = nome(1.5);
        let h = std::f64::consts::FRAC_PI_2;
        for &x in &[0.1, 0.5, 1.0] {
            let t = |j, y| jacobi_theta(j, y, q).unwrap();
            assert!((t(1, x + h) - t(2, x)).abs() < 1e-14);
            assert!((t(4, x + h) - t(3, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(jacobi_theta(1, 0.1, 1.0), Err(Error::NomeOutOfRange(_))));
        assert!(matches!(jacobi_theta(5, 0.1, 0.5), Err(Error::ThetaIndex(5))));
    }
}
