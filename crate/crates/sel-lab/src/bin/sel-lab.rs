//! Thin command-line front end over the library: parameter sweeps, the
//! validation suite, and radial quasi-probability reports.
//!
//! Exit codes: 0 success, 1 validation failure, 2 config error, 3 solver
//! error in single-point modes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sel_lab::sweep::{
    parse_config, parse_value_grid, qfunc_report, render_csv, render_plot_script, run_sweep,
    QfuncSource, SweepError,
};
use sel_lab::validate::{run_validation, Level};

#[derive(Parser)]
#[command(name = "sel-lab", version, about = "Single-emitter laser toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep from a config file and write CSV (and
    /// optionally a gnuplot script).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (defaults to sweep.csv).
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Also emit a gnuplot script next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Run the validation suite and print the report.
    Validate {
        #[arg(long, value_parser = ["quick", "full"], default_value = "quick")]
        level: String,
        /// Write the report to a file as well as stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tabulate the radial quasi-probabilities for given parameters or a
    /// limit case.
    Qfunc {
        #[arg(long, requires = "eta", requires = "tau", conflicts_with = "limit")]
        omega: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        /// Limit case: 1 (vacuum) or 2 (strong coupling).
        #[arg(long, conflicts_with_all = ["omega", "eta", "tau"])]
        limit: Option<u8>,
        /// Intensity grid as start:step:end.
        #[arg(long, default_value = "0:0.1:6")]
        grid: String,
        #[arg(long, default_value = "qfunc.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<SweepError>() {
                Some(SweepError::Config(_)) => ExitCode::from(2),
                Some(_) => ExitCode::from(3),
                None => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sweep { config, out, plot } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| SweepError::Config(sel_lab::sweep::ConfigError::Malformed(
                    0,
                    format!("cannot read {}: {e}", config.display()),
                )))?;
            let spec = parse_config(&text).map_err(SweepError::Config)?;
            let rows = run_sweep(&spec);
            std::fs::write(&out, render_csv(&spec, &rows))?;
            if plot || spec.plot {
                let gp = render_plot_script(&spec, &out.to_string_lossy());
                std::fs::write(out.with_extension("gp"), gp)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { level, report } => {
            let level = if level == "full" { Level::Full } else { Level::Quick };
            let result = run_validation(level);
            let text = result.render();
            print!("{text}");
            if let Some(path) = report {
                std::fs::write(path, &text)?;
            }
            Ok(if result.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Qfunc {
            omega,
            eta,
            tau,
            limit,
            grid,
            out,
        } => {
            let source = match (omega, limit) {
                (Some(w), None) => QfuncSource::Params {
                    omega: w,
                    eta: eta.unwrap(),
                    tau: tau.unwrap(),
                },
                (None, Some(case)) => QfuncSource::Limit(case),
                _ => anyhow::bail!("pass either --omega/--eta/--tau or --limit"),
            };
            let grid = parse_value_grid(&grid, "grid").map_err(SweepError::Config)?;
            let csv = qfunc_report(&source, &grid, 16).map_err(|e| anyhow::Error::new(e))?;
            std::fs::write(&out, csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
