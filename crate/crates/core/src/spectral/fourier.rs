use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform offset grid `lambda_j = -pi/2 + (j + 1/2) pi / G`, `j = 0..G`.
///
/// `G` is even, so neither `lambda = 0` nor `lambda = -pi/2` is a node. The
/// grid owns its FFT plans and is cheap to clone.
#[derive(Clone)]
pub struct Grid {
    size: usize,
    analysis: Arc<dyn Fft<f64>>,
    synthesis: Arc<dyn Fft<f64>>,
    phase: Arc<[Complex64]>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("size", &self.size).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl Grid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 || size % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid size must be even and at least 4, got {size}"
            )));
        }
        let mut planner = FftPlanner::new();
        let analysis = planner.plan_fft_inverse(size);
        let synthesis = planner.plan_fft_forward(size);
        let offset = -PI + PI / size as f64;
        let phase: Vec<Complex64> = (0..size)
            .map(|m| {
                let k = signed_mode(m, size) as f64;
                Complex64::from_polar(1.0, k * offset)
            })
            .collect();
        Ok(Self { size, analysis, synthesis, phase: phase.into() })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        PI / self.size as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -0.5 * PI + (j as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.node(j)).collect()
    }

    /// Largest mode cutoff `K` admitted by this grid (`G >= 2K + 2`).
    #[inline]
    pub fn max_cutoff(&self) -> usize {
        (self.size - 2) / 2
    }

    pub fn check_cutoff(&self, cutoff: usize) -> Result<()> {
        if self.size < 2 * cutoff + 2 {
            return Err(Error::CutoffTooLarge { cutoff, grid: self.size });
        }
        Ok(())
    }

    /// Full coefficient vector `f^(k)`, stored at index `k mod G`. The Nyquist
    /// slot is zeroed.
    pub fn spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.size, "sample count does not match grid");
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.analysis.process(&mut buf);
        let scale = PI / self.size as f64;
        for (m, c) in buf.iter_mut().enumerate() {
            *c *= self.phase[m] * scale;
        }
        buf[self.size / 2] = Complex64::new(0.0, 0.0);
        buf
    }

    /// Inverse of [`Grid::spectrum`]; returns the real part of the synthesis.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.size, "coefficient count does not match grid");
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .zip(self.phase.iter())
            .map(|(c, p)| c * p.conj())
            .collect();
        buf[self.size / 2] = Complex64::new(0.0, 0.0);
        self.synthesis.process(&mut buf);
        buf.iter().map(|c| c.re / PI).collect()
    }

    /// Convolution with an even kernel given by its coefficients as a
    /// function of `|k|`.
    pub fn apply_even_multiplier(&self, samples: &[f64], multiplier: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut spec = self.spectrum(samples);
        for (m, c) in spec.iter_mut().enumerate() {
            *c *= multiplier(signed_mode(m, self.size).unsigned_abs() as usize);
        }
        self.synthesize(&spec)
    }

    /// Samples of the even function with coefficients `coeff(|k|)` for all
    /// modes resolved by the grid.
    pub fn synthesize_even(&self, coeff: impl Fn(usize) -> f64) -> Vec<f64> {
        let spec: Vec<Complex64> = (0..self.size)
            .map(|m| Complex64::new(coeff(signed_mode(m, self.size).unsigned_abs() as usize), 0.0))
            .collect();
        self.synthesize(&spec)
    }

    /// Signed mode number stored at index `m`.
    #[inline]
    pub fn mode(&self, m: usize) -> i64 {
        signed_mode(m, self.size)
    }
}

#[inline]
fn signed_mode(m: usize, size: usize) -> i64 {
    if m <= size / 2 {
        m as i64
    } else {
        m as i64 - size as i64
    }
}

/// Real samples of a pi-periodic function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    grid: Grid,
    samples: Vec<f64>,
}

impl PeriodicFunction {
    pub fn new(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.size()
            )));
        }
        if let Some(j) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at node {j}")));
        }
        Ok(Self { grid: grid.clone(), samples })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples = (0..grid.size()).map(|j| f(grid.node(j))).collect();
        Self { grid: grid.clone(), samples }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), samples: vec![0.0; grid.size()] }
    }

    /// Wraps samples produced internally without re-validating finiteness.
    pub(crate) fn from_raw(grid: &Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.size());
        Self { grid: grid.clone(), samples }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Integral over one period (exact for trigonometric polynomials
    /// resolved by the grid).
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.samples.iter().sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.samples.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.size(), other.grid.size()));
        }
        Ok(Self::from_raw(
            &self.grid,
            self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }
}

/// Fourier coefficients `f^(k)`, `k = 0..=K`, of a real even function.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    coeffs: Vec<f64>,
}

impl FourierSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a Fourier series needs at least the k = 0 coefficient");
        Self { coeffs }
    }

    pub fn from_fn(cutoff: usize, f: impl Fn(usize) -> f64) -> Self {
        Self { coeffs: (0..=cutoff).map(f).collect() }
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient at mode `k`; zero beyond the cutoff.
    #[inline]
    pub fn coeff(&self, k: i64) -> f64 {
        self.coeffs.get(k.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Even-part Fourier coefficients of `f` up to the cutoff `K`.
pub fn forward_transform(f: &PeriodicFunction, cutoff: usize) -> Result<FourierSeries> {
    let grid = f.grid();
    grid.check_cutoff(cutoff)?;
    let spec = grid.spectrum(f.samples());
    let g = grid.size();
    let coeffs = (0..=cutoff)
        .map(|k| 0.5 * (spec[k].re + spec[(g - k) % g].re))
        .collect();
    Ok(FourierSeries { coeffs })
}

/// `f(lambda) = (1/pi) [f^(0) + 2 sum_{k=1}^K f^(k) cos 2k lambda]` on the grid.
pub fn inverse_transform(fhat: &FourierSeries, grid: &Grid) -> Result<PeriodicFunction> {
    grid.check_cutoff(fhat.cutoff())?;
    let samples = grid.synthesize_even(|k| fhat.coeff(k as i64));
    Ok(PeriodicFunction::from_raw(grid, samples))
}

/// `(f*g)(lambda) = int f(lambda - mu) g(mu) d mu`, evaluated as a product of
/// Fourier coefficients.
pub fn convolve(f: &PeriodicFunction, g: &PeriodicFunction) -> Result<PeriodicFunction> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(f.grid().size(), g.grid().size()));
    }
    let grid = f.grid();
    let a = grid.spectrum(f.samples());
    let b = grid.spectrum(g.samples());
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(PeriodicFunction::from_raw(grid, grid.synthesize(&prod)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_excludes_origin_and_edge() {
        let g = Grid::new(16).unwrap();
        assert!(g.nodes().iter().all(|&x| x.abs() > 1e-3 && (x + 0.5 * PI).abs() > 1e-3));
        assert!(Grid::new(15).is_err());
        assert!(Grid::new(2).is_err());
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = Grid::new(32).unwrap();
        let f = PeriodicFunction::from_fn(&g, |_| 2.5);
        let fh = forward_transform(&f, 15).unwrap();
        assert!((fh.coeff(0) - 2.5 * PI).abs() < 1e-13);
        assert!(fh.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn cutoff_validation() {
        let g = Grid::new(32).unwrap();
        let f = PeriodicFunction::zeros(&g);
        assert!(forward_transform(&f, 15).is_ok());
        assert!(matches!(forward_transform(&f, 16), Err(Error::CutoffTooLarge { .. })));
        assert!(inverse_transform(&FourierSeries::new(vec![0.0; 17]), &g).is_err());
    }

    #[test]
    fn single_mode_roundtrip() {
        let g = Grid::new(64).unwrap();
        // cos(6 lambda) has f^(+-3) = pi/2
        let f = PeriodicFunction::from_fn(&g, |x| (6.0 * x).cos());
        let fh = forward_transform(&f, 31).unwrap();
        assert!((fh.coeff(3) - 0.5 * PI).abs() < 1e-13);
        assert!((fh.coeff(-3) - 0.5 * PI).abs() < 1e-13);
        let back = inverse_transform(&fh, &g).unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = PeriodicFunction::zeros(&Grid::new(16).unwrap());
        let b = PeriodicFunction::zeros(&Grid::new(32).unwrap());
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(16, 32))));
    }

    fn trig_poly(coeffs: &[(f64, f64)]) -> impl Fn(f64) -> f64 + '_ {
        move |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * (2.0 * k as f64 * x).cos() + b * (2.0 * k as f64 * x).sin())
                .sum()
        }
    }

    proptest! {
        #[test]
        fn even_roundtrip_is_identity(coeffs in prop::collection::vec(-1.0f64..1.0, 1..20)) {
            let g = Grid::new(64).unwrap();
            let f = PeriodicFunction::from_fn(&g, |x| {
                coeffs.iter().enumerate().map(|(k, c)| c * (2.0 * k as f64 * x).cos()).sum()
            });
            let back = inverse_transform(&forward_transform(&f, 31).unwrap(), &g).unwrap();
            for (a, b) in back.samples().iter().zip(f.samples()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn convolution_commutes(
            a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12),
            b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12),
        ) {
            let g = Grid::new(32).unwrap();
            let f = PeriodicFunction::from_fn(&g, trig_poly(&a));
            let h = PeriodicFunction::from_fn(&g, trig_poly(&b));
            let fh = convolve(&f, &h).unwrap();
            let hf = convolve(&h, &f).unwrap();
            for (x, y) in fh.samples().iter().zip(hf.samples()) {
                prop_assert!((x - y).abs() < 1e-13);
            }
        }
    }
}
