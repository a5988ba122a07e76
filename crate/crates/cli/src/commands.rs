use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use xxz_gge::error::Error;
use xxz_gge::io::{csv_table, Cell, StateFile, StateMeta};
use xxz_gge::qalgebra::{omega_numeric, GeneratingFunctionSet, OmegaOptions};
use xxz_gge::solvers::{
    compare_states, solve_qa_gtba, solve_truncated_gge_seeded, ConvergenceReport, SolverConfig,
};
use xxz_gge::spectral::{AnisotropyParams, Grid};
use xxz_gge::tba::{magnetization_sum_rule, yang_yang_entropy, ClosureRule, HoleConstraintSet, StringState};

use crate::manifest::{manifest_path, RunManifest, SubRun};
use crate::Log;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotConverged(String),
    Verification(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::NotConverged(m) | CliError::Verification(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidAnisotropy(_)
            | Error::InvalidGrid(_)
            | Error::CutoffTooLarge { .. }
            | Error::InvalidSpin(_)
            | Error::InvalidConfig(_) => CliError::Usage(msg),
            Error::TailAmplified { .. } => CliError::Usage(format!("{msg} (use --kmax, keeping it below --grid / 2)")),
            Error::NotConverged(_) => CliError::NotConverged(msg),
            _ => CliError::Failure(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClosureArg {
    ParitySquareRoot,
    ParityQuotient,
}

impl From<ClosureArg> for ClosureRule {
    fn from(c: ClosureArg) -> Self {
        match c {
            ClosureArg::ParitySquareRoot => ClosureRule::ParitySquareRoot,
            ClosureArg::ParityQuotient => ClosureRule::ParityQuotient,
        }
    }
}

/// Truncation and iteration flags shared by the solving subcommands.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Number of string levels kept
    #[arg(long, default_value_t = 24)]
    pub nmax: usize,
    /// Fourier mode cutoff of the generating functions
    #[arg(long, default_value_t = 64)]
    pub kmax: usize,
    /// Number of rapidity grid points
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Stopping tolerance on the update of ln(eta_n)
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, value_enum, default_value = "parity-square-root")]
    pub closure: ClosureArg,
    /// Largest tolerated Fourier tail of a target hole density
    #[arg(long, default_value_t = 1e-10)]
    pub tail_threshold: f64,
}

impl SolverArgs {
    pub fn config(&self, delta: f64, two_sbar: usize) -> Result<SolverConfig, CliError> {
        let mut c = SolverConfig::new(delta)?;
        c.n_max = self.nmax;
        c.cutoff = self.kmax;
        c.grid_size = self.grid;
        c.tol = self.tol;
        c.max_iter = self.max_iter;
        c.damping = self.damping;
        c.closure = self.closure.into();
        c.two_sbar = two_sbar;
        c.validate()?;
        if !(self.tail_threshold > 0.0) {
            return Err(CliError::Usage(format!("--tail-threshold must be positive, got {}", self.tail_threshold)));
        }
        Ok(c)
    }
}

fn sub_run(label: String, converged: bool, report: &ConvergenceReport) -> SubRun {
    SubRun {
        label,
        converged,
        iterations: report.iterations,
        final_residual: report.final_residual,
        wall_time: report.wall_time,
    }
}

fn write_output(path: &Path, text: &str, manifest: &mut RunManifest) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    manifest.record_output(path)?;
    Ok(())
}

fn constraints_for(config: &SolverConfig, two_s_max: usize, threshold: f64) -> Result<HoleConstraintSet, CliError> {
    let grid = config.grid()?;
    let set = GeneratingFunctionSet::new(&config.params, &grid, two_s_max, config.cutoff, &OmegaOptions::default())?;
    Ok(HoleConstraintSet::from_generating_functions(&set, config.cutoff, threshold)?)
}

fn state_summary(log: &Log, state: &StringState) {
    let rule = magnetization_sum_rule(state);
    log.info(&format!(
        "sum rule {:.12} + tail {:.3e}, Yang-Yang entropy {:.12}",
        rule.value,
        rule.tail,
        yang_yang_entropy(state)
    ));
}

pub fn omega(delta: f64, two_s: usize, grid: usize, out: &Path, log: &Log) -> CliResult {
    let params = AnisotropyParams::new(delta)?;
    let grid = Grid::new(grid)?;
    let mut manifest = RunManifest::start(json!({ "delta": delta, "two_s": two_s, "grid": grid.size() }));
    let rows = grid
        .nodes()
        .iter()
        .map(|&l| Ok(vec![Cell::Float(l), Cell::Float(omega_numeric(two_s, l, &params)?)]))
        .collect::<Result<Vec<_>, Error>>()?;
    write_output(out, &csv_table(&["lambda", "omega"], &rows), &mut manifest)?;
    log.info(&format!("wrote {} rows to {}", rows.len(), out.display()));
    manifest.finish(&manifest_path(out))?;
    Ok(())
}

/// Writes `state` (possibly partial) with its manifest.
fn save_state(
    out: &Path,
    state: &StringState,
    config: &SolverConfig,
    converged: bool,
    report: &ConvergenceReport,
    two_sbar: Option<usize>,
    mut manifest: RunManifest,
) -> CliResult {
    let meta = StateMeta {
        iterations: report.iterations,
        residual: report.final_residual,
        closure: config.closure,
        solver: if two_sbar.is_some() { "gge" } else { "qa" }.into(),
        two_sbar,
    };
    let file = StateFile::from_state(state, &config.params, converged, meta);
    write_output(out, &file.to_json()?, &mut manifest)?;
    manifest.finish(&manifest_path(out))?;
    Ok(())
}

fn solve_outcome(
    result: Result<(StringState, ConvergenceReport), Error>,
) -> Result<(Option<StringState>, ConvergenceReport, Option<String>), CliError> {
    match result {
        Ok((state, report)) => Ok((Some(state), report, None)),
        Err(Error::NotConverged(partial)) => {
            let partial = *partial;
            let msg = format!(
                "{} did not converge: residual {:e} after {} iterations",
                partial.what, partial.report.final_residual, partial.report.iterations
            );
            Ok((partial.state, partial.report, Some(msg)))
        }
        Err(e) => Err(e.into()),
    }
}

fn finish_solve(
    out: &Path,
    config: &SolverConfig,
    outcome: (Option<StringState>, ConvergenceReport, Option<String>),
    two_sbar: Option<usize>,
    mut manifest: RunManifest,
    log: &Log,
) -> CliResult {
    let (state, report, failure) = outcome;
    let label = match two_sbar {
        Some(t) => format!("gge two_sbar={t}"),
        None => "qa".to_string(),
    };
    manifest.runs.push(sub_run(label, failure.is_none(), &report));
    log.info(&format!("{} iterations, residual {:.3e}, {:.2} s", report.iterations, report.final_residual, report.wall_time));
    log.debug(&format!("residual history: {:?}", report.residuals));
    match (state, failure) {
        (Some(state), None) => {
            state_summary(log, &state);
            save_state(out, &state, config, true, &report, two_sbar, manifest)?;
            log.info(&format!("wrote {}", out.display()));
            Ok(())
        }
        (Some(state), Some(msg)) => {
            save_state(out, &state, config, false, &report, two_sbar, manifest)?;
            log.info(&format!("wrote partial state to {}", out.display()));
            Err(CliError::NotConverged(msg))
        }
        (None, Some(msg)) => {
            manifest.finish(&manifest_path(out))?;
            Err(CliError::NotConverged(msg))
        }
        (None, None) => unreachable!("a converged solve always has a state"),
    }
}

pub fn qa_solve(delta: f64, solver: &SolverArgs, out: &Path, log: &Log) -> CliResult {
    let config = solver.config(delta, 1)?;
    let manifest = RunManifest::start(json!({ "command": "qa-solve", "solver": config }));
    let outcome = solve_outcome(solve_qa_gtba(&config))?;
    finish_solve(out, &config, outcome, None, manifest, log)
}

pub fn gge_solve(delta: f64, two_sbar: usize, solver: &SolverArgs, seed: Option<&Path>, out: &Path, log: &Log) -> CliResult {
    let config = solver.config(delta, two_sbar)?;
    let manifest = RunManifest::start(json!({ "command": "gge-solve", "solver": config, "seed": seed }));
    let constraints = constraints_for(&config, two_sbar, solver.tail_threshold)?;
    log.debug(&format!("constraint tails: {:?}", constraints.tails()));
    let seed_state = seed.map(|p| StateFile::load(p).and_then(|f| f.to_state())).transpose()?;
    let result = solve_truncated_gge_seeded(&config, &constraints, seed_state.as_ref()).map(|(s, r, d)| {
        log.debug(&format!("GGE diagnostics: {d:?}"));
        if d.floored_points > 0 {
            log.info(&format!("warning: rho_{two_sbar} hit the floor at {} nodes", d.floored_points));
        }
        (s, r)
    });
    let outcome = solve_outcome(result)?;
    finish_solve(out, &config, outcome, Some(two_sbar), manifest, log)
}

pub fn verify_identity(delta: f64, two_s_list: &[usize], threshold: f64, solver: &SolverArgs, out: &Path, log: &Log) -> CliResult {
    if two_s_list.is_empty() {
        return Err(CliError::Usage("--smax needs at least one 2s value".into()));
    }
    let mut list = two_s_list.to_vec();
    list.sort_unstable();
    list.dedup();
    let two_s_max = *list.last().unwrap();
    let config = solver.config(delta, 1)?;
    if two_s_max > config.n_max {
        return Err(CliError::Usage(format!("2s = {two_s_max} exceeds --nmax {}", config.n_max)));
    }
    let mut manifest = RunManifest::start(json!({ "command": "verify-identity", "solver": config, "two_s": list, "threshold": threshold }));
    let (state, report) = match solve_qa_gtba(&config) {
        Ok(r) => r,
        Err(e) => {
            manifest.finish(&manifest_path(out))?;
            return Err(e.into());
        }
    };
    manifest.runs.push(sub_run("qa".into(), true, &report));
    let constraints = constraints_for(&config, two_s_max, solver.tail_threshold)?;
    let mut rows = Vec::new();
    let mut worst: Option<(usize, f64)> = None;
    for &two_s in &list {
        let identity = constraints.target(two_s).samples();
        let solved = state.rho_h(two_s).samples();
        let scale = identity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = solved.iter().zip(identity).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        log.info(&format!("2s = {two_s}: relative sup error {err:.3e}"));
        if !(err < threshold) && worst.map_or(true, |(_, w)| err > w || w.is_nan()) {
            worst = Some((two_s, err));
        }
        rows.push(vec![
            Cell::Int(two_s as i64),
            Cell::Float(err),
            Cell::Float(constraints.tails()[two_s - 1]),
            Cell::Text(if err < threshold { "pass" } else { "fail" }),
        ]);
    }
    write_output(out, &csv_table(&["two_s", "rel_linf_error", "fourier_tail", "status"], &rows), &mut manifest)?;
    manifest.finish(&manifest_path(out))?;
    match worst {
        None => Ok(()),
        Some((two_s, err)) => Err(CliError::Verification(format!(
            "identity check failed; worst offender 2s = {two_s} with relative error {err:e} (threshold {threshold:e})"
        ))),
    }
}

pub fn scan(deltas: &[f64], two_sbars: &[usize], report_levels: usize, solver: &SolverArgs, out: &Path, log: &Log) -> CliResult {
    if deltas.is_empty() || two_sbars.is_empty() {
        return Err(CliError::Usage("--delta-list and --sbar-list must be non-empty".into()));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut sbars = two_sbars.to_vec();
    sbars.sort_unstable();
    sbars.dedup();
    let two_s_max = *sbars.last().unwrap();
    let configs = deltas.iter().map(|&d| solver.config(d, two_s_max)).collect::<Result<Vec<_>, _>>()?;
    if report_levels == 0 || report_levels > solver.nmax {
        return Err(CliError::Usage(format!("--report-levels must lie in 1..={}", solver.nmax)));
    }
    let mut manifest = RunManifest::start(json!({
        "command": "scan", "solver": configs[0], "deltas": deltas, "two_sbars": sbars, "report_levels": report_levels
    }));
    let mut rows = Vec::new();
    for mut config in configs {
        let delta = config.params.delta();
        let context = |e: Error| CliError::from(e).with_context(&format!("delta = {delta}"));
        let (qa, report) = solve_qa_gtba(&config).map_err(context)?;
        manifest.runs.push(sub_run(format!("qa delta={delta}"), true, &report));
        let constraints = constraints_for(&config, two_s_max, solver.tail_threshold)
            .map_err(|e| e.with_context(&format!("delta = {delta}")))?;
        for &two_sbar in &sbars {
            config.two_sbar = two_sbar;
            let (state, report, _) = solve_truncated_gge_seeded(&config, &constraints, None)
                .map_err(|e| CliError::from(e).with_context(&format!("delta = {delta}, 2 s_bar = {two_sbar}")))?;
            manifest.runs.push(sub_run(format!("gge delta={delta} two_sbar={two_sbar}"), true, &report));
            let cmp = compare_states(&state, &qa, report_levels)?;
            log.info(&format!("delta = {delta}, 2 s_bar = {two_sbar}: delta_metric {:.3e}, stacked {:.3e}", cmp.delta, cmp.stacked));
            rows.push(vec![Cell::Float(delta), Cell::Int(two_sbar as i64), Cell::Float(cmp.delta), Cell::Float(cmp.stacked)]);
        }
    }
    write_output(out, &csv_table(&["delta", "two_sbar", "delta_metric", "stacked_metric"], &rows), &mut manifest)?;
    manifest.finish(&manifest_path(out))?;
    Ok(())
}

pub fn compare(a: &Path, b: &Path, report_levels: usize, out: Option<&PathBuf>, log: &Log) -> CliResult {
    let load = |p: &Path| -> Result<StringState, CliError> {
        StateFile::load(p).and_then(|f| f.to_state()).map_err(|e| CliError::Failure(format!("{}: {e}", p.display())))
    };
    let (sa, sb) = (load(a)?, load(b)?);
    let cmp = compare_states(&sa, &sb, report_levels).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("delta_metric {:.16e}", cmp.delta);
    println!("stacked_metric {:.16e}", cmp.stacked);
    if let Some(out) = out {
        let mut manifest = RunManifest::start(json!({ "command": "compare", "a": a, "b": b, "report_levels": report_levels }));
        let rows: Vec<_> = cmp
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                vec![
                    Cell::Int(i as i64 + 1),
                    Cell::Float(l.rho_linf),
                    Cell::Float(l.rho_l2),
                    Cell::Float(l.rho_h_linf),
                    Cell::Float(l.rho_h_l2),
                ]
            })
            .collect();
        write_output(out, &csv_table(&["n", "rho_linf", "rho_l2", "rho_h_linf", "rho_h_l2"], &rows), &mut manifest)?;
        manifest.finish(&manifest_path(out))?;
        log.info(&format!("wrote {}", out.display()));
    }
    Ok(())
}

impl CliError {
    fn with_context(self, context: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{context}: {m}")),
            CliError::NotConverged(m) => CliError::NotConverged(format!("{context}: {m}")),
            CliError::Verification(m) => CliError::Verification(format!("{context}: {m}")),
            CliError::Failure(m) => CliError::Failure(format!("{context}: {m}")),
        }
    }
}
