use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adhesive_plate::config::RunConfig;
use adhesive_plate::report::{emit_report, read_trajectory_file, BalanceSummary, Certification, OutputFormat};
use adhesive_plate::simulate::run_simulation;
use adhesive_plate::studies::{study_dimred_damped, study_dimred_undamped, study_nu_to_zero};
use adhesive_plate_core::stepper::{check_balance, BALANCE_TOLERANCE, ONE_SIDED_TOLERANCE};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Adhesive contact of thin viscoelastic plates: simulation, asymptotic
/// studies and certification of energy balances.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Seed of the random semistability competitors.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides `scheme.dt` of the configuration.
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Format of study reports.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and certify the trajectory.
    Simulate { config: PathBuf },
    /// Run one of the asymptotic studies.
    Study { which: StudyKind, config: PathBuf },
    /// Check the energy balance recorded in a trajectory CSV.
    Certify {
        trajectory: PathBuf,
        /// Relative tolerance; defaults to the one for the chosen check.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Check only the energy inequality, for runs without viscosity.
        #[arg(long)]
        one_sided: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StudyKind {
    Nu,
    DimredUndamped,
    DimredDamped,
}

fn load_config(path: &Path, dt: Option<f64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(dt) = dt {
        cfg.scheme.dt = dt;
        cfg.validate().context("the --dt override")?;
    }
    Ok(cfg)
}

fn status(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(&config, cli.dt)?;
            let outcome = run_simulation(&cfg, cli.seed, &cli.out_dir)?;
            println!("{}", outcome.certification.to_json());
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(status(outcome.certification.passed))
        }
        Command::Study { which, config } => {
            let cfg = load_config(&config, cli.dt)?;
            let report = match which {
                StudyKind::Nu => study_nu_to_zero(&cfg)?,
                StudyKind::DimredUndamped => study_dimred_undamped(&cfg)?,
                StudyKind::DimredDamped => study_dimred_damped(&cfg, cli.seed)?,
            };
            for c in &report.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                let kind = if c.required { "" } else { " (informational)" };
                println!("{tag} {}{kind}: {}", c.name, c.detail);
            }
            for f in emit_report(&report, cli.format, &cli.out_dir)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(status(report.passed()))
        }
        Command::Certify { trajectory, tolerance, one_sided } => {
            let records = read_trajectory_file(&trajectory)?;
            let tol = tolerance.unwrap_or(if one_sided { ONE_SIDED_TOLERANCE } else { BALANCE_TOLERANCE });
            let balance = check_balance(&records, one_sided, tol);
            let cert = Certification::new(BalanceSummary::from(&balance), None, None);
            std::fs::create_dir_all(&cli.out_dir)
                .with_context(|| format!("creating {}", cli.out_dir.display()))?;
            let path = cli.out_dir.join("certification.json");
            std::fs::write(&path, cert.to_json()).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", cert.to_json());
            Ok(status(cert.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
