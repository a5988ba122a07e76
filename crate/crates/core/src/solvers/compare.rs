use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PeriodicFunction;
use crate::tba::StringState;

/// Levels entering the aggregate distances by default: the levels fixed by
/// the largest ensemble of the usual scan up to `s_bar = 2`.
pub const DEFAULT_REPORT_LEVELS: usize = 4;

/// Relative distances between one string level of two states. Norms are
/// taken relative to the mean of the two norms, which keeps them symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDistance {
    pub rho_linf: f64,
    pub rho_l2: f64,
    pub rho_h_linf: f64,
    pub rho_h_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateComparison {
    pub levels: Vec<LevelDistance>,
    pub n_report: usize,
    /// Largest relative L2 distance of `rho_n` over `n <= n_report`.
    pub delta: f64,
    /// Relative L2 distance of the stacked densities `(rho_1, .., rho_{n_report})`.
    /// Unlike `delta` it weighs each level by its size, so nearly empty
    /// high strings do not dominate.
    pub stacked: f64,
}

fn difference(a: &PeriodicFunction, b: &PeriodicFunction) -> PeriodicFunction {
    PeriodicFunction::from_raw(a.grid(), a.samples().iter().zip(b.samples()).map(|(x, y)| x - y).collect())
}

fn relative(a: &PeriodicFunction, b: &PeriodicFunction, norm: impl Fn(&PeriodicFunction) -> f64) -> f64 {
    let diff = difference(a, b);
    let scale = 0.5 * (norm(a) + norm(b));
    let d = norm(&diff);
    if d == 0.0 {
        0.0
    } else {
        d / scale
    }
}

pub fn compare_states(a: &StringState, b: &StringState, n_report: usize) -> Result<StateComparison> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(a.grid().size(), b.grid().size()));
    }
    if a.n_max() != b.n_max() {
        return Err(Error::IncompatibleStates(format!("n_max {} vs {}", a.n_max(), b.n_max())));
    }
    if n_report == 0 || n_report > a.n_max() {
        return Err(Error::IncompatibleStates(format!("n_report must lie in 1..={}, got {n_report}", a.n_max())));
    }
    let levels: Vec<LevelDistance> = (1..=a.n_max())
        .map(|n| LevelDistance {
            rho_linf: relative(a.rho(n), b.rho(n), PeriodicFunction::sup_norm),
            rho_l2: relative(a.rho(n), b.rho(n), PeriodicFunction::l2_norm),
            rho_h_linf: relative(a.rho_h(n), b.rho_h(n), PeriodicFunction::sup_norm),
            rho_h_l2: relative(a.rho_h(n), b.rho_h(n), PeriodicFunction::l2_norm),
        })
        .collect();
    let delta = levels[..n_report].iter().map(|l| l.rho_l2).fold(0.0, f64::max);
    let (mut diff, mut norm_a, mut norm_b) = (0.0, 0.0, 0.0);
    for n in 1..=n_report {
        let d = difference(a.rho(n), b.rho(n));
        diff += d.l2_norm().powi(2);
        norm_a += a.rho(n).l2_norm().powi(2);
        norm_b += b.rho(n).l2_norm().powi(2);
    }
    let stacked = if diff == 0.0 { 0.0 } else { diff.sqrt() / (0.5 * (norm_a.sqrt() + norm_b.sqrt())) };
    Ok(StateComparison { levels, n_report, delta, stacked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{AnisotropyParams, Grid};
    use crate::tba::ClosureRule;

    fn state(shift: f64) -> StringState {
        let grid = Grid::new(32).unwrap();
        let rho: Vec<_> = (1..=4)
            .map(|n| PeriodicFunction::from_fn(&grid, |x| 1.0 / n as f64 + shift * (2.0 * x).cos()))
            .collect();
        let rho_h = vec![PeriodicFunction::from_fn(&grid, |_| 0.5); 4];
        StringState::from_densities(rho, rho_h, ClosureRule::ParityQuotient).unwrap()
    }

    #[test]
    fn identical_states_have_zero_distance() {
        let s = state(0.1);
        let c = compare_states(&s, &s, 4).unwrap();
        assert_eq!((c.delta, c.stacked), (0.0, 0.0));
        assert!(c.levels.iter().all(|l| l.rho_linf == 0.0 && l.rho_h_l2 == 0.0));
    }

    #[test]
    fn symmetric() {
        let (a, b) = (state(0.1), state(0.2));
        let ab = compare_states(&a, &b, 3).unwrap();
        let ba = compare_states(&b, &a, 3).unwrap();
        assert_eq!(ab.delta, ba.delta);
        assert_eq!(ab.stacked, ba.stacked);
        assert!(ab.stacked > 0.0);
        assert!(ab.delta > 0.0);
    }

    #[test]
    fn incompatible_rejected() {
        let p = AnisotropyParams::new(2.0).unwrap();
        let a = StringState::empty(&Grid::new(32).unwrap(), &p, 4).unwrap();
        let b = StringState::empty(&Grid::new(64).unwrap(), &p, 4).unwrap();
        assert!(matches!(compare_states(&a, &b, 2), Err(Error::GridMismatch(32, 64))));
        let c = StringState::empty(&Grid::new(32).unwrap(), &p, 5).unwrap();
        assert!(compare_states(&a, &c, 2).is_err());
    }
}
