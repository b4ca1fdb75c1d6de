//! One solve per frequency: scenario, timed setup, timed GMRES.

use std::time::Instant;

use helmsweep::scenario::{make_force, make_velocity};
use helmsweep::vecops::rel_diff;
use helmsweep::{
    assemble_global, dense_solve_oracle, global_profiles, gmres_solve, operator_residual, Complex64, GridSpec,
    LinearOperator, PmlStrength, SolveReport, SubproblemResidual, SweepConfig, SweepPreconditioner,
};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::ResultRow;

/// Everything one run produces.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub grid: GridSpec,
    pub solution: Vec<Complex64>,
    pub report: SolveReport,
    pub subproblems: usize,
    /// Random right-hand-side residuals of every factored subproblem, when requested.
    pub factor_residuals: Vec<SubproblemResidual>,
}

pub fn grid_for(cfg: &ExperimentConfig, freq: f64) -> Result<GridSpec> {
    let dim = cfg.grid.dim;
    Ok(match cfg.grid.n {
        Some(n) => GridSpec::new(dim, n, 2.0 * std::f64::consts::PI * freq)?,
        None => GridSpec::from_ppw(dim, freq, cfg.grid.ppw)?,
    })
}

pub fn sweep_config(cfg: &ExperimentConfig, c_max: f64) -> SweepConfig {
    let (boundary, auxiliary) = cfg.strengths(c_max);
    let mut sc = SweepConfig::new(cfg.grid.dim, cfg.partition.gamma, cfg.partition.b, boundary);
    sc.gamma_aux = cfg.gamma_aux();
    sc.strength = PmlStrength { boundary, auxiliary };
    sc.symmetric = cfg.symmetric();
    sc
}

/// Solve at one frequency. Setup time covers assembly and factorization; solve time covers GMRES.
pub fn run_case(cfg: &ExperimentConfig, freq: f64, check_factors: bool) -> Result<RunOutcome> {
    let grid = grid_for(cfg, freq)?;
    let velocity = make_velocity(&cfg.scenario.medium, &grid)?;
    let f = make_force(&cfg.scenario, &grid)?;
    let sc = sweep_config(cfg, velocity.c_max());

    let t0 = Instant::now();
    let profiles = global_profiles(&grid, sc.strength.boundary, sc.gamma)?;
    let a = assemble_global(&grid, &velocity, &profiles)?;
    let pc = SweepPreconditioner::setup(&grid, &velocity, &sc)?;
    let t_setup = t0.elapsed().as_secs_f64();

    let (u, report) = gmres_solve(&a, &pc, &f, &cfg.gmres)?;
    let factor_residuals = if check_factors { pc.factorization_residuals(1)? } else { Vec::new() };
    let row = ResultRow {
        schema: crate::output::SCHEMA_VERSION,
        dim: grid.dim(),
        freq,
        n: grid.n(),
        unknowns: grid.len(),
        t_setup,
        n_iter: report.iterations,
        t_solve: report.wall_time.as_secs_f64(),
        converged: report.converged,
        final_residual: report.final_residual,
        medium: cfg.scenario.medium.label().to_string(),
        force: cfg.scenario.force.label().to_string(),
        config_hash: cfg.hash(),
    };
    Ok(RunOutcome { row, grid, solution: u, report, subproblems: pc.subproblem_count(), factor_residuals })
}

/// Run every configured frequency in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.grid.frequencies.iter().map(|&freq| run_case(cfg, freq, false)).collect()
}

/// Small-scale end-to-end check against the dense direct solution.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OracleReport {
    pub freq: f64,
    pub unknowns: usize,
    pub n_iter: usize,
    pub converged: bool,
    /// `||u_gmres - u_dense|| / ||u_dense||`.
    pub solution_error: f64,
    /// `||f - A M f|| / ||f||` for one preconditioner application.
    pub one_shot_residual: f64,
}

pub fn oracle_check(cfg: &ExperimentConfig, freq: f64) -> Result<OracleReport> {
    let grid = grid_for(cfg, freq)?;
    let velocity = make_velocity(&cfg.scenario.medium, &grid)?;
    let f = make_force(&cfg.scenario, &grid)?;
    let sc = sweep_config(cfg, velocity.c_max());
    let a = assemble_global(&grid, &velocity, &global_profiles(&grid, sc.strength.boundary, sc.gamma)?)?;
    let pc = SweepPreconditioner::setup(&grid, &velocity, &sc)?;
    let (u, report) = gmres_solve(&a, &pc, &f, &cfg.gmres)?;
    let dense = dense_solve_oracle(&a, &f)?;
    let mut mf = vec![Complex64::new(0.0, 0.0); f.len()];
    LinearOperator::apply(&pc, &f, &mut mf);
    Ok(OracleReport {
        freq,
        unknowns: grid.len(),
        n_iter: report.iterations,
        converged: report.converged,
        solution_error: rel_diff(&u, &dense),
        one_shot_residual: operator_residual(&a, &mf, &f)?.0,
    })
}
