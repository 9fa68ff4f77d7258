use clap::{Args, Parser, Subcommand};
use maslovflow_cli::config::parse_window;
use maslovflow_cli::{cmd_maslov, cmd_sflow, cmd_spectra, cmd_verify, CommandError, ConfigError, Identity, Overrides, ProblemConfig, Report};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "maslovflow", version, about = "Maslov index and spectral flow of Lagrangian boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maslov index of the pair (gamma1, gamma2).
    Maslov(Common),
    /// Spectral flow of the boundary value family.
    Sflow(Common),
    /// Eigenvalues in the solver window on a uniform lambda grid, as CSV.
    Spectra {
        #[command(flatten)]
        common: Common,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Checks an index identity on the configured instance, or on a seeded
    /// random suite when the config has no paths.
    Verify {
        identity: Identity,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON problem file. Suites run on defaults without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// RK4 steps per unit time.
    #[arg(long)]
    steps: Option<usize>,
    /// Eigenvalue detector tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Spectral window `min,max`.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<[f64; 2]>,
}

impl Common {
    fn load(&self) -> Result<ProblemConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => ProblemConfig::load(p)?,
            None => ProblemConfig::default(),
        };
        cfg.apply(&Overrides { seed: self.seed, steps: self.steps, tol: self.tol, window: self.window })?;
        Ok(cfg)
    }
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CommandError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CommandError::Config(ConfigError(format!("{}: {e}", p.display())))),
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe (`| head`) is not an error
            match writeln!(out, "{}", text.trim_end()) {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CommandError::Config(ConfigError(format!("stdout: {e}")))),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<Report, CommandError> {
    let (common, report) = match &cli.command {
        Command::Maslov(c) => (c, cmd_maslov(&c.load()?)?),
        Command::Sflow(c) => (c, cmd_sflow(&c.load()?)?),
        Command::Spectra { common, csv } => {
            let (report, text) = cmd_spectra(&common.load()?)?;
            write(csv.as_deref(), &text)?;
            if csv.is_none() {
                // CSV already went to stdout
                if let Some(out) = &common.out {
                    write(Some(out), &report.to_json())?;
                }
                return Ok(report);
            }
            (common, report)
        }
        Command::Verify { identity, common } => (common, cmd_verify(&common.load()?, *identity)?),
    };
    write(common.out.as_deref(), &report.to_json())?;
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(r) if r.passed => ExitCode::SUCCESS,
        Ok(r) => {
            eprintln!("{}: check failed", r.command);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
