use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use panel_flutter::config::RunConfig;
use panel_flutter::runner::{build_model, run_case, run_study, write_case, write_study};

#[derive(Parser)]
#[command(name = "panel-flutter", version, about = "Supersonic flutter of cracked FGM plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flutter analysis and write its reports.
    Run(Args),
    /// Run the parameter study described by the [study] block.
    Study(Args),
    /// Parse and validate a configuration without solving.
    Validate {
        config: PathBuf,
    },
    /// Assemble the constrained K, M and A and write them as Matrix Market files.
    DumpMatrices(Args),
}

#[derive(clap::Args)]
struct Args {
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn out_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

fn load(path: &Path) -> panel_flutter::Result<RunConfig> {
    RunConfig::from_file(path)?.resolved()
}

/// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn execute(cli: Cli) -> panel_flutter::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(&args.config)?;
            let outcome = run_case(&cfg)?;
            let dir = out_dir(&args, &cfg);
            write_case(&outcome, &dir)?;
            match &outcome.report.flutter {
                Some(f) => say!(
                    "lambda_cr_nd={:.4} omega_cr_nd={:.4} omega2_cr_nd={:.3} modes={}-{}",
                    f.lambda_cr_nd,
                    f.omega_cr_nd,
                    f.omega2_cr_nd,
                    f.mode_pair.0 + 1,
                    f.mode_pair.1 + 1
                ),
                None => say!("no coalescence up to lambda_nd={}", cfg.solver.sweep.lambda_max),
            }
            say!("reports written to {}", dir.display());
        }
        Command::Study(args) => {
            let cfg = load(&args.config)?;
            let table = run_study(&cfg)?;
            let dir = out_dir(&args, &cfg);
            write_study(&table, &dir)?;
            let _ = std::io::stdout().lock().write_all(table.to_csv().as_bytes());
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let (nx, ny) = cfg.mesh_divisions();
            say!(
                "configuration ok: mesh {nx}x{ny}, {} modes, boundary {:?}, crack {}",
                cfg.modes(),
                cfg.boundary(),
                if cfg.crack_geometry().is_some() { "present" } else { "absent" }
            );
        }
        Command::DumpMatrices(args) => {
            let cfg = load(&args.config)?;
            let model = build_model(&cfg)?;
            let dir = out_dir(&args, &cfg);
            model.system.write_matrix_market(&dir)?;
            say!("{} free DOFs written to {}", model.system.free_count(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
