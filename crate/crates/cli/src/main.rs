use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klfield_cli::{run, CliError, RunConfig, Task, EXIT_FLAGGED, EXIT_OK};

/// Karhunen-Loeve spectra, Mercer errors and seeded sampling of random fields.
#[derive(Parser)]
#[command(name = "klfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and eigenfunction node values (eigs.csv, eigs.json).
    Eigs(Required),
    /// Mercer reconstruction errors per truncation order.
    Mercer(Required),
    /// Realizations and their coefficients.
    Sample(Required),
    /// Statistical checks on a sample; exits 1 if any trips.
    Verify(Required),
    /// Every dataset in one go; the config defaults to the reference run.
    Figures(Optional),
}

#[derive(Args)]
struct Overrides {
    /// Replaces `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Replaces `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Required {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Optional {
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help, --version
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn execute(command: Command) -> Result<i32, CliError> {
    configure_threads()?;
    let (task, path, overrides) = match command {
        Command::Eigs(a) => (Task::Eigs, Some(a.config), a.overrides),
        Command::Mercer(a) => (Task::Mercer, Some(a.config), a.overrides),
        Command::Sample(a) => (Task::Sample, Some(a.config), a.overrides),
        Command::Verify(a) => (Task::Verify, Some(a.config), a.overrides),
        Command::Figures(a) => (Task::Figures, a.config, a.overrides),
    };
    let mut cfg = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::reference(),
    };
    if let Some(dir) = overrides.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    let outcome = run(task, &cfg)?;
    let summary = serde_json::json!({
        "output_dir": cfg.output_dir,
        "files": outcome.files,
        "passed": outcome.passed,
    });
    println!("{summary}");
    if outcome.passed {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "{}",
            serde_json::json!({
                "error": "statistical_flag",
                "exit_code": EXIT_FLAGGED,
                "message": "one or more statistical checks tripped; see verify.json",
            })
        );
        Ok(EXIT_FLAGGED)
    }
}

/// `KLFIELD_THREADS` caps the worker pool; unset means one per core.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("KLFIELD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "KLFIELD_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
