//! `casimir`: run, compare and sweep Casimir scenarios described in TOML.

mod compare;
mod config;
mod error;
mod report;
mod run;
mod svg;
mod sweep;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Scenario;
use crate::error::CliError;
use crate::report::{io_err, rows_csv, rows_svg};

#[derive(Parser)]
#[command(name = "casimir", version, about = "Casimir energies, forces and pressures from scenario files")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "CASIMIR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report files.
    Run {
        config: PathBuf,
        /// Print the summary only; write no files.
        #[arg(long)]
        dry: bool,
    },
    /// Run several scenarios describing the same observable and compare them.
    Compare {
        #[arg(required = true, num_args = 2..)]
        configs: Vec<PathBuf>,
        /// Largest accepted pairwise relative difference.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        /// Also write the pairwise table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// One of: a, d, dx, l_max, T, n.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Parse and validate scenarios without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Run { config, dry } => {
            let s = Scenario::load(&config)?;
            let report = run::run(&s)?;
            print!("{}", report.summary());
            if !dry {
                for p in report.write(&s.output_dir(), s.prefix(), s.config.output.svg)? {
                    println!("wrote {}", p.display());
                }
            }
            Ok(0)
        }
        Command::Compare { configs, tolerance, csv } => {
            if !(tolerance >= 0.0) {
                return Err(CliError::Config(format!("tolerance must be >= 0 (got {tolerance})")));
            }
            let scenarios: Vec<Scenario> = configs.iter().map(|p| Scenario::load(p)).collect::<Result<_, _>>()?;
            let labels: Vec<_> = scenarios.iter().map(|s| (s.name.clone(), s.kind(), run::quantity_of(s))).collect();
            let quantity = compare::check_quantities(&labels)?;
            let reports = scenarios.iter().map(run::run).collect::<Result<Vec<_>, _>>()?;
            let cmp = compare::compare(quantity, reports, tolerance);
            print!("{}", cmp.table());
            if let Some(path) = csv {
                fs::write(&path, cmp.csv()).map_err(|e| io_err(&path, e))?;
            }
            Ok(if cmp.passed() { 0 } else { 4 })
        }
        Command::Sweep { config, param, values } => {
            let p = sweep::Param::parse(&param)?;
            let s = Scenario::load(&config)?;
            let result = sweep::sweep(&s, p, &values)?;
            let table = rows_csv(result.quantity, &result.rows);
            print!("{table}");
            let dir = s.output_dir();
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            let stem = format!("{}_sweep_{}", s.prefix(), result.param.name());
            let csv_path = dir.join(format!("{stem}.csv"));
            fs::write(&csv_path, table).map_err(|e| io_err(&csv_path, e))?;
            println!("wrote {}", csv_path.display());
            if s.config.output.svg {
                let svg_path = dir.join(format!("{stem}.svg"));
                let title = format!("{}: {} against {}", s.name, result.quantity.name(), result.param.name());
                fs::write(&svg_path, rows_svg(&title, result.quantity, &result.rows)).map_err(|e| io_err(&svg_path, e))?;
                println!("wrote {}", svg_path.display());
            }
            for r in &result.reports {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Ok(0)
        }
        Command::Validate { configs } => {
            for path in &configs {
                let s = Scenario::load(path)?;
                println!("ok: {} ({}, {})", path.display(), s.kind(), run::quantity_of(&s).name());
            }
            Ok(0)
        }
    }
}
