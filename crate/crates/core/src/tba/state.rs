use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{kernel_a, AnisotropyParams, Grid, PeriodicFunction};

/// Prescription for `eta_{n_max+1}`; `rho_{n_max+1}` is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureRule {
    /// `eta_{N+1} = eta_{N-1}^2 / eta_{N-3}`: quotient extrapolation within
    /// the parity class of `N + 1`.
    ParityQuotient,
    /// `sqrt(1 + eta_{N+1}) = 2 sqrt(1 + eta_{N-1}) - sqrt(1 + eta_{N-3})`.
    /// Exact for the zero-field asymptotics `eta_n = (n + a)^2 - 1` and for
    /// levels that settle to a parity-periodic profile, and it rules out the
    /// geometric growth that corresponds to a magnetic field.
    ParitySquareRoot,
}

impl ClosureRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosureRule::ParityQuotient => "parity_quotient",
            ClosureRule::ParitySquareRoot => "parity_square_root",
        }
    }

    /// Smallest `n_max` the rule can be applied to.
    pub fn min_strings(self) -> usize {
        match self {
            ClosureRule::ParityQuotient | ClosureRule::ParitySquareRoot => 4,
        }
    }

    /// `ln eta_{N+1}` from `ln eta_1..ln eta_N` (index `n - 1`).
    pub fn extrapolate(self, log_eta: &[&[f64]]) -> Vec<f64> {
        let n = log_eta.len();
        match self {
            ClosureRule::ParityQuotient => {
                log_eta[n - 2].iter().zip(log_eta[n - 4]).map(|(a, b)| 2.0 * a - b).collect()
            }
            ClosureRule::ParitySquareRoot => {
                log_eta[n - 2].iter().zip(log_eta[n - 4]).map(|(&a, &b)| square_root_step(a, b)).collect()
            }
        }
    }
}

/// `ln eta` of `sqrt(1 + eta) = 2 sqrt(1 + e^a) - sqrt(1 + e^b)`, in log space.
fn square_root_step(a: f64, b: f64) -> f64 {
    let log_root = |x: f64| 0.5 * if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    let (ra, rb) = (log_root(a), log_root(b));
    let ratio = (rb - ra).exp();
    if ratio >= 2.0 {
        return f64::MIN_POSITIVE.ln();
    }
    // c = ln sqrt(1 + eta) of the new level
    let c = ra + (2.0 - ratio).ln();
    if c <= 0.0 {
        f64::MIN_POSITIVE.ln()
    } else if c < 20.0 {
        (2.0 * c).exp_m1().ln()
    } else {
        2.0 * c + (-(-2.0 * c).exp()).ln_1p()
    }
}

/// Densities `rho_n`, `rho_{n,h}` and ratios `eta_n` for `n = 1..=n_max`.
///
/// `eta_n` is clamped to `f64::MAX` where it overflows, which happens at the
/// zeros of `rho_n` and for large `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringState {
    grid: Grid,
    rho: Vec<PeriodicFunction>,
    rho_h: Vec<PeriodicFunction>,
    eta: Vec<PeriodicFunction>,
    closure: ClosureRule,
}

impl StringState {
    pub fn new(
        rho: Vec<PeriodicFunction>,
        rho_h: Vec<PeriodicFunction>,
        eta: Vec<PeriodicFunction>,
        closure: ClosureRule,
    ) -> Result<Self> {
        let n_max = rho.len();
        if n_max == 0 || rho_h.len() != n_max || eta.len() != n_max {
            return Err(Error::MalformedState(format!(
                "need equally many (>0) string levels, got {} / {} / {}",
                rho.len(),
                rho_h.len(),
                eta.len()
            )));
        }
        let grid = rho[0].grid().clone();
        for f in rho.iter().chain(&rho_h).chain(&eta) {
            if *f.grid() != grid {
                return Err(Error::GridMismatch(grid.size(), f.grid().size()));
            }
        }
        Ok(Self { grid, rho, rho_h, eta, closure })
    }

    /// The state without particles: `rho_n = 0`, `rho_{n,h} = a_n`, `eta_n = inf`.
    pub fn empty(grid: &Grid, params: &AnisotropyParams, n_max: usize) -> Result<Self> {
        let mut rho_h = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let a = grid.nodes().iter().map(|&x| kernel_a(n, x, params)).collect::<Result<Vec<_>>>()?;
            rho_h.push(PeriodicFunction::new(grid, a)?);
        }
        let rho = vec![PeriodicFunction::zeros(grid); n_max];
        let eta = vec![PeriodicFunction::from_fn(grid, |_| f64::MAX); n_max];
        Self::new(rho, rho_h, eta, ClosureRule::ParitySquareRoot)
    }

    /// Builds a state from `rho` and `rho_h`, deriving `eta_n = rho_{n,h}/rho_n`.
    pub fn from_densities(
        rho: Vec<PeriodicFunction>,
        rho_h: Vec<PeriodicFunction>,
        closure: ClosureRule,
    ) -> Result<Self> {
        let eta = rho
            .iter()
            .zip(&rho_h)
            .map(|(r, h)| r.zip_with(h, ratio))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rho, rho_h, eta, closure)
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.rho.len()
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn closure(&self) -> ClosureRule {
        self.closure
    }

    /// `rho_n`, `n = 1..=n_max`.
    pub fn rho(&self, n: usize) -> &PeriodicFunction {
        &self.rho[n - 1]
    }

    pub fn rho_h(&self, n: usize) -> &PeriodicFunction {
        &self.rho_h[n - 1]
    }

    pub fn eta(&self, n: usize) -> &PeriodicFunction {
        &self.eta[n - 1]
    }

    pub fn rho_t(&self, n: usize) -> PeriodicFunction {
        PeriodicFunction::from_raw(
            &self.grid,
            self.rho(n).samples().iter().zip(self.rho_h(n).samples()).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn all_rho(&self) -> &[PeriodicFunction] {
        &self.rho
    }

    pub fn all_rho_h(&self) -> &[PeriodicFunction] {
        &self.rho_h
    }

    pub fn all_eta(&self) -> &[PeriodicFunction] {
        &self.eta
    }

    /// Checks non-negativity of the densities (with `slack`) and consistency
    /// of `eta_n` with `rho_{n,h}/rho_n` where `rho_n` is not negligible.
    pub fn check_invariants(&self, slack: f64) -> Result<()> {
        for n in 1..=self.n_max() {
            let (r, h, e) = (self.rho(n).samples(), self.rho_h(n).samples(), self.eta(n).samples());
            for j in 0..r.len() {
                if r[j] < -slack || h[j] < -slack {
                    return Err(Error::MalformedState(format!(
                        "negative density at n = {n}, node {j}: rho = {}, rho_h = {}",
                        r[j], h[j]
                    )));
                }
                if r[j] > 1e-8 && e[j] < 1e8 {
                    let expect = h[j] / r[j];
                    if (e[j] - expect).abs() > 1e-8 * expect.abs().max(1.0) {
                        return Err(Error::MalformedState(format!(
                            "eta_{n} = {} but rho_h/rho = {expect} at node {j}",
                            e[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn ratio(r: f64, h: f64) -> f64 {
    (h / r.max(1e-300)).min(f64::MAX)
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Yang-Yang entropy density
/// `sum_n int [rho_t ln rho_t - rho ln rho - rho_h ln rho_h] d lambda`,
/// with `0 ln 0 = 0` and tiny negative round-off treated as zero.
pub fn yang_yang_entropy(state: &StringState) -> f64 {
    let w = state.grid().spacing();
    let mut total = 0.0;
    for n in 1..=state.n_max() {
        let level: f64 = state
            .rho(n)
            .samples()
            .iter()
            .zip(state.rho_h(n).samples())
            .map(|(&r, &h)| {
                let (r, h) = (r.max(0.0), h.max(0.0));
                xlnx(r + h) - xlnx(r) - xlnx(h)
            })
            .sum();
        total += w * level;
    }
    total
}

/// Filling `sum_n n int rho_n` and the closure tail
/// `(n_max + 1)/2 int rho_{n_max,h}` that a truncated solution of the
/// decoupled equations falls short of one half by.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRule {
    pub value: f64,
    pub tail: f64,
    /// `sum_{n <= m} n int rho_n` for `m = 1..=n_max`; non-decreasing.
    pub partial_sums: Vec<f64>,
}

impl SumRule {
    /// Distance to one half beyond the reported tail.
    pub fn excess_deficit(&self) -> f64 {
        ((0.5 - self.value).abs() - self.tail).max(0.0)
    }
}

pub fn magnetization_sum_rule(state: &StringState) -> SumRule {
    let n_max = state.n_max();
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = (1..=n_max)
        .map(|n| {
            acc += n as f64 * state.rho(n).integral();
            acc
        })
        .collect();
    let tail = 0.5 * (n_max + 1) as f64 * state.rho_h(n_max).integral();
    SumRule { value: acc, tail, partial_sums }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_state_diagnostics() {
        let p = AnisotropyParams::new(2.0).unwrap();
        let grid = Grid::new(64).unwrap();
        let s = StringState::empty(&grid, &p, 6).unwrap();
        assert_eq!(yang_yang_entropy(&s), 0.0);
        let rule = magnetization_sum_rule(&s);
        assert_eq!(rule.value, 0.0);
        assert!(rule.partial_sums.iter().all(|&x| x == 0.0));
        s.check_invariants(0.0).unwrap();
    }

    #[test]
    fn entropy_of_a_uniform_filling() {
        // rho = rho_h = c on every level gives 2 c ln 2 per level and unit length
        let grid = Grid::new(16).unwrap();
        let c = 0.1;
        let f = PeriodicFunction::from_fn(&grid, |_| c);
        let s = StringState::from_densities(vec![f.clone(); 3], vec![f; 3], ClosureRule::ParityQuotient).unwrap();
        let expect = 3.0 * std::f64::consts::PI * 2.0 * c * 2f64.ln();
        assert!((yang_yang_entropy(&s) - expect).abs() < 1e-13);
        assert!(s.eta(2).samples().iter().all(|&e| (e - 1.0).abs() < 1e-15));
    }

    #[test]
    fn negative_density_rejected() {
        let grid = Grid::new(8).unwrap();
        let bad = PeriodicFunction::from_fn(&grid, |x| x);
        let ok = PeriodicFunction::from_fn(&grid, |_| 1.0);
        let s = StringState::from_densities(vec![bad], vec![ok], ClosureRule::ParityQuotient).unwrap();
        assert!(s.check_invariants(1e-12).is_err());
    }

    #[test]
    fn parity_quotient_closure() {
        let levels: Vec<Vec<f64>> = (1..=6).map(|n| vec![n as f64]).collect();
        let refs: Vec<&[f64]> = levels.iter().map(Vec::as_slice).collect();
        // 2 ln eta_5 - ln eta_3 on linear data gives the value for n = 7
        assert_eq!(ClosureRule::ParityQuotient.extrapolate(&refs), vec![7.0]);
    }

    #[test]
    fn square_root_closure_is_exact_on_zero_field_profile() {
        let logs: Vec<Vec<f64>> = (1..=6).map(|n| vec![(((n + 2) * (n + 2)) as f64 - 1.0).ln()]).collect();
        let refs: Vec<&[f64]> = logs.iter().map(Vec::as_slice).collect();
        let next = ClosureRule::ParitySquareRoot.extrapolate(&refs)[0];
        assert!((next - 80f64.ln()).abs() < 1e-14, "{next}");
        // a flat profile stays flat, including tiny and huge eta
        for v in [-30.0, 0.3, 900.0] {
            let flat = vec![vec![v]; 4];
            let refs: Vec<&[f64]> = flat.iter().map(Vec::as_slice).collect();
            let next = ClosureRule::ParitySquareRoot.extrapolate(&refs)[0];
            assert!((next - v).abs() < 1e-9 * v.abs().max(1.0), "{v} -> {next}");
        }
    }
}
