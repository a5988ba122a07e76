use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{build_l_normalized, build_qspin_rep, unit_domain_point, LComponents, LSign};
use crate::error::{Error, Result};
use crate::spectral::AnisotropyParams;

/// Smallest separation between the selected eigenvalue and the rest of the
/// block spectrum that is still treated as non-degenerate.
pub const MIN_SPECTRAL_GAP: f64 = 1e-8;

/// Basis states of `V_s (x) V_s` with fixed total auxiliary weight
/// `i1 + i2 = weight`; the composite index is `i1 (2s+1) + i2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightBlock {
    pub weight: usize,
    pub indices: Vec<usize>,
}

impl WeightBlock {
    #[inline]
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// `T_s(z1, z2) = L^{up up} L^{down down}` acting on two copies of the
/// auxiliary space, with `L^{aa} = <a| L^(-)_{a1}(z1) L^(+)_{a2}(z2) |a>`.
#[derive(Debug, Clone)]
pub struct TwoChannelTransfer {
    two_s: usize,
    z1: Complex64,
    z2: Complex64,
    matrix: DMatrix<Complex64>,
    blocks: Vec<WeightBlock>,
}

fn channel_products(first: &LComponents, second: &LComponents) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let up = first.up_up.kronecker(&second.up_up) + first.up_down.kronecker(&second.down_up);
    let down = first.down_up.kronecker(&second.up_down) + first.down_down.kronecker(&second.down_down);
    (up, down)
}

fn weight_blocks(two_s: usize) -> Vec<WeightBlock> {
    let dim = two_s + 1;
    (0..=2 * two_s)
        .map(|weight| WeightBlock {
            weight,
            indices: (0..dim)
                .filter_map(|i1| weight.checked_sub(i1).filter(|&i2| i2 < dim).map(|i2| i1 * dim + i2))
                .collect(),
        })
        .collect()
}

pub fn build_two_channel_transfer_at(
    z1: Complex64,
    z2: Complex64,
    two_s: usize,
    params: &AnisotropyParams,
) -> Result<TwoChannelTransfer> {
    let rep = build_qspin_rep(two_s, params)?;
    let first = build_l_normalized(z1, &rep, LSign::Minus, params, false)?;
    let second = build_l_normalized(z2, &rep, LSign::Plus, params, false)?;
    let (up, down) = channel_products(&first, &second);
    Ok(TwoChannelTransfer { two_s, z1, z2, matrix: up * down, blocks: weight_blocks(two_s) })
}

/// Transfer matrix at `(z^-_lambda, z^+_lambda)` for real `lambda`.
pub fn build_two_channel_transfer(lambda: f64, two_s: usize, params: &AnisotropyParams) -> Result<TwoChannelTransfer> {
    let (z1, z2) = unit_domain_point(Complex64::new(lambda, 0.0), params);
    build_two_channel_transfer_at(z1, z2, two_s, params)
}

impl TwoChannelTransfer {
    #[inline]
    pub fn two_s(&self) -> usize {
        self.two_s
    }

    #[inline]
    pub fn points(&self) -> (Complex64, Complex64) {
        (self.z1, self.z2)
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn blocks(&self) -> &[WeightBlock] {
        &self.blocks
    }

    /// The block of total weight `2s`, of dimension `2s + 1`.
    pub fn largest_block(&self) -> &WeightBlock {
        &self.blocks[self.two_s]
    }

    pub fn block_matrix(&self, block: &WeightBlock) -> DMatrix<Complex64> {
        restrict(&self.matrix, block)
    }

    /// Largest modulus of an entry coupling two different weight blocks.
    pub fn off_block_norm(&self) -> f64 {
        let dim = self.two_s + 1;
        let weight = |i: usize| i / dim + i % dim;
        let mut worst = 0.0f64;
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                if weight(r) != weight(c) {
                    worst = worst.max(self.matrix[(r, c)].norm());
                }
            }
        }
        worst
    }

    /// Analytic derivative `d T / d z2`.
    pub fn z2_derivative(&self, params: &AnisotropyParams) -> Result<DMatrix<Complex64>> {
        let rep = build_qspin_rep(self.two_s, params)?;
        let first = build_l_normalized(self.z1, &rep, LSign::Minus, params, false)?;
        let second = build_l_normalized(self.z2, &rep, LSign::Plus, params, false)?;
        let second_prime = build_l_normalized(self.z2, &rep, LSign::Plus, params, true)?;
        let (up, down) = channel_products(&first, &second);
        let (d_up, d_down) = channel_products(&first, &second_prime);
        Ok(d_up * down + up * d_down)
    }

    /// Spectral radius of every block other than the largest one.
    pub fn other_blocks_radius(&self) -> Result<f64> {
        let mut radius = 0.0f64;
        for block in self.blocks.iter().filter(|b| b.weight != self.two_s) {
            let m = self.block_matrix(block);
            let ev = eigenvalues(&m)?;
            radius = ev.iter().fold(radius, |r, e| r.max(e.norm()));
        }
        Ok(radius)
    }
}

pub(crate) fn restrict(m: &DMatrix<Complex64>, block: &WeightBlock) -> DMatrix<Complex64> {
    let n = block.dim();
    DMatrix::from_fn(n, n, |r, c| m[(block.indices[r], block.indices[c])])
}

fn eigenvalues(m: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
    if m.nrows() == 1 {
        return Ok(DVector::from_element(1, m[(0, 0)]));
    }
    m.eigenvalues().ok_or_else(|| Error::Eigen("Schur decomposition did not converge".into()))
}

/// Eigenvalue with bilinearly normalized left and right eigenvectors,
/// `left^T right = 1`, expressed in the coordinates of the block it was
/// computed in.
#[derive(Debug, Clone)]
pub struct EigenTriple {
    pub value: Complex64,
    pub left: DVector<Complex64>,
    pub right: DVector<Complex64>,
    /// Distance to the nearest other eigenvalue of the block.
    pub gap: f64,
    /// `|T r - value r|` with `|r| = 1`.
    pub residual: f64,
}

enum Selection {
    LargestModulus,
    Nearest(Complex64),
}

fn inverse_iteration(m: &DMatrix<Complex64>, shift: Complex64) -> Result<DVector<Complex64>> {
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mut eps = 1e-12 * shift.norm().max(1.0);
    for _ in 0..6 {
        let shifted = m - DMatrix::identity(n, n) * (shift + eps);
        let lu = shifted.lu();
        match lu.solve(&v) {
            Some(w) if w.iter().all(|x| x.re.is_finite() && x.im.is_finite()) => {
                let norm = w.norm();
                if norm == 0.0 {
                    return Err(Error::Eigen("inverse iteration collapsed".into()));
                }
                v = w / Complex64::new(norm, 0.0);
            }
            _ => {
                eps *= 10.0;
                continue;
            }
        }
    }
    Ok(v)
}

fn eigentriple(m: &DMatrix<Complex64>, selection: Selection) -> Result<EigenTriple> {
    let ev = eigenvalues(m)?;
    let pick = match selection {
        Selection::LargestModulus => |e: &Complex64, _: Complex64| -e.norm(),
        Selection::Nearest(_) => |e: &Complex64, t: Complex64| (e - t).norm(),
    };
    let target = match selection {
        Selection::Nearest(t) => t,
        Selection::LargestModulus => Complex64::new(0.0, 0.0),
    };
    let (idx, &approx) = ev
        .iter()
        .enumerate()
        .min_by(|a, b| pick(a.1, target).total_cmp(&pick(b.1, target)))
        .ok_or_else(|| Error::Eigen("empty matrix".into()))?;
    let gap = ev
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != idx)
        .map(|(_, e)| (e - approx).norm())
        .fold(f64::INFINITY, f64::min);
    if gap < MIN_SPECTRAL_GAP {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let right = inverse_iteration(m, approx)?;
    let mut left = inverse_iteration(&m.transpose(), approx)?;
    let overlap = left.transpose() * &right;
    let overlap = overlap[(0, 0)];
    if overlap.norm() < 1e-300 {
        return Err(Error::Eigen("left and right eigenvectors are orthogonal".into()));
    }
    left /= overlap;
    let value = (left.transpose() * m * &right)[(0, 0)];
    let residual = (m * &right - &right * value).norm();
    Ok(EigenTriple { value, left, right, gap, residual })
}

/// Leading eigentriple of the largest weight block of `t`.
pub fn leading_eigentriple(t: &TwoChannelTransfer) -> Result<EigenTriple> {
    eigentriple(&t.block_matrix(t.largest_block()), Selection::LargestModulus)
}

/// Eigentriple of the largest weight block whose eigenvalue is closest to 1.
///
/// Coincides with [`leading_eigentriple`] for real rapidity; off the real axis
/// it follows the analytic continuation of the unit eigenvalue.
pub fn unit_eigentriple(t: &TwoChannelTransfer) -> Result<EigenTriple> {
    eigentriple(&t.block_matrix(t.largest_block()), Selection::Nearest(Complex64::new(1.0, 0.0)))
}

pub(crate) fn eigentriple_near(m: &DMatrix<Complex64>, target: Complex64) -> Result<EigenTriple> {
    eigentriple(m, Selection::Nearest(target))
}

/// Dominant eigenvalue by plain power iteration with a Rayleigh-quotient
/// estimate. Slow but independent of the dense eigensolver.
pub fn power_iteration(m: &DMatrix<Complex64>, max_iter: usize, tol: f64) -> Result<Complex64> {
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mut estimate = Complex64::new(0.0, 0.0);
    for _ in 0..max_iter {
        let w = m * &v;
        let next = v.dotc(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        v = w / Complex64::new(norm, 0.0);
        if (next - estimate).norm() < tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Eigen(format!("power iteration did not settle in {max_iter} steps")))
}
