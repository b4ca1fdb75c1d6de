use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helmsweep_cli::{
    dump_solution, init_threads, oracle_check, run_case, scaling_summary, write_csv, CliError, ExperimentConfig,
    Mode, Overrides, ResultRow,
};

#[derive(Parser)]
#[command(name = "helmsweep", version, about = "Additive sweeping preconditioner experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at the first configured frequency and dump the field.
    Solve(Flags),
    /// Solve at every configured frequency and write a result table.
    Table(Flags),
    /// Compare GMRES against a dense direct solve on small grids.
    OracleCheck(Flags),
    /// Fit growth exponents of setup and per-iteration solve time.
    Scaling(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frequencies omega / 2 pi, comma separated.
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    gamma: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Seed of the random medium.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn resolve(self, mode: Mode) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        Overrides {
            frequencies: self.omega,
            dim: self.dim,
            gamma: self.gamma,
            b: self.b,
            seed: self.seed,
            output: self.out,
            threads: self.threads,
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn print_row(r: &ResultRow) {
    println!(
        "freq {:>6} N {:>9} setup {:>9.3}s iter {:>3} solve {:>9.3}s residual {:.2e}{}",
        r.freq,
        r.unknowns,
        r.t_setup,
        r.n_iter,
        r.t_solve,
        r.final_residual,
        if r.converged { "" } else { " (not converged)" }
    );
}

fn ensure_dir(cfg: &ExperimentConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.output).map_err(|e| CliError::io(&cfg.output, e))
}

/// Runs every frequency, writes the table and returns whether all converged.
fn table(cfg: &ExperimentConfig, dump: bool) -> Result<(Vec<ResultRow>, bool), CliError> {
    ensure_dir(cfg)?;
    let mut rows = Vec::new();
    for &freq in &cfg.grid.frequencies {
        let out = run_case(cfg, freq, false)?;
        print_row(&out.row);
        if dump || cfg.dump_fields {
            let path = cfg.output.join(format!("field_{}d_{}.bin", cfg.grid.dim, freq));
            dump_solution(&out.solution, &out.grid, &out.row.config_hash, &path)?;
        }
        rows.push(out.row);
    }
    write_csv(&cfg.output.join("results.csv"), &rows)?;
    let ok = rows.iter().all(|r| r.converged);
    Ok((rows, ok))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve(flags) => {
            let mut cfg = flags.resolve(Mode::Solve)?;
            init_threads(cfg.solver.threads);
            cfg.grid.frequencies.truncate(1);
            Ok(table(&cfg, true)?.1)
        }
        Command::Table(flags) => {
            let cfg = flags.resolve(Mode::Table)?;
            init_threads(cfg.solver.threads);
            Ok(table(&cfg, false)?.1)
        }
        Command::OracleCheck(flags) => {
            let cfg = flags.resolve(Mode::OracleCheck)?;
            init_threads(cfg.solver.threads);
            let mut ok = true;
            for &freq in &cfg.grid.frequencies {
                let r = oracle_check(&cfg, freq)?;
                println!(
                    "freq {} N {} iter {} solution error {:.3e} one-shot residual {:.3e}",
                    r.freq, r.unknowns, r.n_iter, r.solution_error, r.one_shot_residual
                );
                ok &= r.converged;
            }
            Ok(ok)
        }
        Command::Scaling(flags) => {
            let cfg = flags.resolve(Mode::SweepScaling)?;
            init_threads(cfg.solver.threads);
            let (rows, ok) = table(&cfg, false)?;
            let s = scaling_summary(&rows)?;
            println!(
                "setup exponent {:.3} (fit residual {:.3}), solve/iteration exponent {:.3} (fit residual {:.3})",
                s.setup.exponent, s.setup.residual, s.solve_per_iteration.exponent, s.solve_per_iteration.residual
            );
            let path = cfg.output.join("scaling.json");
            let json = serde_json::to_string_pretty(&s).map_err(|e| CliError::Format(e.to_string()))?;
            std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
