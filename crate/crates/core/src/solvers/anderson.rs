use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Anderson mixing for a fixed-point problem `x = g(x)`.
///
/// Keeps the last `memory` differences of iterates and residuals
/// `f = g(x) - x` and steps to the combination that minimizes the linearized
/// residual, mixed with weight `beta`. With an empty history this is the
/// damped step `x + beta f`.
#[derive(Debug, Clone)]
pub(crate) struct Anderson {
    memory: usize,
    beta: f64,
    xs: VecDeque<Vec<f64>>,
    fs: VecDeque<Vec<f64>>,
}

impl Anderson {
    pub fn new(memory: usize, beta: f64) -> Self {
        Self { memory, beta, xs: VecDeque::new(), fs: VecDeque::new() }
    }

    pub fn reset(&mut self) {
        self.xs.clear();
        self.fs.clear();
    }

    pub fn step(&mut self, x: &[f64], gx: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = gx.iter().zip(x).map(|(g, x)| g - x).collect();
        self.xs.push_back(x.to_vec());
        self.fs.push_back(f.clone());
        if self.xs.len() > self.memory + 1 {
            self.xs.pop_front();
            self.fs.pop_front();
        }
        let damped: Vec<f64> = x.iter().zip(&f).map(|(x, f)| x + self.beta * f).collect();
        let m = self.xs.len() - 1;
        if m == 0 {
            return damped;
        }
        let n = x.len();
        let df = DMatrix::from_fn(n, m, |r, c| self.fs[c + 1][r] - self.fs[c][r]);
        let dx = DMatrix::from_fn(n, m, |r, c| self.xs[c + 1][r] - self.xs[c][r]);
        let svd = df.clone().svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let gamma = match svd.solve(&DVector::from_column_slice(&f), cutoff) {
            Ok(g) => g,
            Err(_) => {
                self.reset();
                return damped;
            }
        };
        let correction = (dx + df * self.beta) * gamma;
        let next: Vec<f64> = damped.iter().zip(correction.iter()).map(|(d, c)| d - c).collect();
        if next.iter().all(|v| v.is_finite()) {
            next
        } else {
            self.reset();
            damped
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_fixed_point_fast() {
        // g(x) = A x + b with a slowly contracting A
        let a = [[0.95, 0.02], [0.01, 0.97]];
        let b = [1.0, -2.0];
        let g = |x: &[f64]| vec![a[0][0] * x[0] + a[0][1] * x[1] + b[0], a[1][0] * x[0] + a[1][1] * x[1] + b[1]];
        let mut mixer = Anderson::new(5, 1.0);
        let mut x = vec![0.0, 0.0];
        let mut steps = 0;
        loop {
            let gx = g(&x);
            let res = (gx[0] - x[0]).abs().max((gx[1] - x[1]).abs());
            if res < 1e-12 || steps > 50 {
                break;
            }
            x = mixer.step(&x, &gx);
            steps += 1;
        }
        assert!(steps <= 5, "took {steps} steps");
    }

    #[test]
    fn first_step_is_damped() {
        let mut mixer = Anderson::new(3, 0.5);
        assert_eq!(mixer.step(&[1.0], &[3.0]), vec![2.0]);
    }
}
