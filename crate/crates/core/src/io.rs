//! Plain-text persistence: JSON state files and CSV tables.
//!
//! Every number is written so that it reads back to the same bits, which
//! makes saving, loading and saving again byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{AnisotropyParams, Grid, PeriodicFunction};
use crate::tba::{ClosureRule, StringState};

/// Solve metadata stored next to the densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub iterations: usize,
    pub residual: f64,
    pub closure: ClosureRule,
    /// `"qa"` or `"gge"`.
    pub solver: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_sbar: Option<usize>,
}

/// On-disk form of a [`StringState`]. Arrays are indexed `[n - 1][node]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub delta: f64,
    pub eta: f64,
    pub grid: usize,
    pub n_max: usize,
    pub converged: bool,
    pub rho: Vec<Vec<f64>>,
    pub rho_h: Vec<Vec<f64>>,
    pub eta_fn: Vec<Vec<f64>>,
    pub meta: StateMeta,
}

fn samples(fs: &[PeriodicFunction]) -> Vec<Vec<f64>> {
    fs.iter().map(|f| f.samples().to_vec()).collect()
}

impl StateFile {
    pub fn from_state(state: &StringState, params: &AnisotropyParams, converged: bool, meta: StateMeta) -> Self {
        Self {
            delta: params.delta(),
            eta: params.eta(),
            grid: state.grid().size(),
            n_max: state.n_max(),
            converged,
            rho: samples(state.all_rho()),
            rho_h: samples(state.all_rho_h()),
            eta_fn: samples(state.all_eta()),
            meta,
        }
    }

    /// Rebuilds the state, checking every array against `grid` and `n_max`.
    pub fn to_state(&self) -> Result<StringState> {
        let grid = Grid::new(self.grid).map_err(|e| Error::MalformedState(e.to_string()))?;
        let convert = |name: &str, rows: &[Vec<f64>]| -> Result<Vec<PeriodicFunction>> {
            if rows.len() != self.n_max {
                return Err(Error::MalformedState(format!("{name} has {} levels, expected {}", rows.len(), self.n_max)));
            }
            rows.iter()
                .map(|r| PeriodicFunction::new(&grid, r.clone()).map_err(|e| Error::MalformedState(format!("{name}: {e}"))))
                .collect()
        };
        let rho = convert("rho", &self.rho)?;
        let rho_h = convert("rho_h", &self.rho_h)?;
        let eta = convert("eta_fn", &self.eta_fn)?;
        StringState::new(rho, rho_h, eta, self.meta.closure).map_err(|e| Error::MalformedState(e.to_string()))
    }

    pub fn params(&self) -> Result<AnisotropyParams> {
        AnisotropyParams::new(self.delta)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedState(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A CSV value: text is written as is, floats with 17 significant digits.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    Int(i64),
    Float(f64),
    Text(&'a str),
}

/// Renders a CSV table with a header line and `\n` line endings.
pub fn csv_table(header: &[&str], rows: &[Vec<Cell<'_>>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match cell {
                Cell::Int(v) => write!(out, "{v}").unwrap(),
                Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
                Cell::Text(v) => out.push_str(v),
            }
        }
        out.push('\n');
    }
    out
}
