use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jetrao::{
    cmd_bounds, cmd_efficiency, cmd_families_list, cmd_jet_check, env_deterministic, env_threads,
    exit, CliError, Format, Report, RunConfig, RunOptions,
};

/// Jet-bundle identity checks and square-root jet-span variance bounds.
#[derive(Parser)]
#[command(name = "jetrao", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound ladder per θ.
    Bounds(RunArgs),
    /// ODE coefficients and efficiency certificates per θ.
    Efficiency(RunArgs),
    /// Symbolic identity suite for jet orders 1..=M.
    JetCheck {
        #[arg(short = 'm', long = "max-order", value_parser = clap::value_parser!(u8).range(1..=8))]
        max_order: u8,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Built-in families.
    Families {
        #[command(subcommand)]
        action: FamiliesAction,
    },
}

#[derive(Subcommand)]
enum FamiliesAction {
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit timing so that identical inputs give identical bytes.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(short = 'c', long = "config")]
    config: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    allow_degenerate: bool,
    #[command(flatten)]
    common: CommonArgs,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(common: &CommonArgs, tol: Option<f64>, allow_degenerate: bool) -> Result<RunOptions, CliError> {
    Ok(RunOptions {
        tol,
        allow_degenerate,
        deterministic: common.deterministic || env_deterministic(),
        threads: env_threads()?,
    })
}

fn run_ladder(args: &RunArgs, efficiency: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let opts = options(&args.common, args.tol, args.allow_degenerate)?;
    let report: Report = if efficiency {
        cmd_efficiency(&cfg, &opts)?
    } else {
        cmd_bounds(&cfg, &opts)?
    };
    let text = match args.format.unwrap_or(cfg.output.format) {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv()?,
    };
    emit(&text, args.common.out.as_ref().or(cfg.output.path.as_ref()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(args) => run_ladder(&args, false),
        Command::Efficiency(args) => run_ladder(&args, true),
        Command::JetCheck {
            max_order,
            json,
            common,
        } => {
            let report = cmd_jet_check(max_order as usize, &options(&common, None, false)?)?;
            let text = if json {
                report.to_json()
            } else {
                report.jet_check_text()
            };
            emit(&text, common.out.as_ref())?;
            match report.identity_failures() {
                0 => Ok(()),
                n => Err(CliError::IdentityFailure(n)),
            }
        }
        Command::Families {
            action: FamiliesAction::List { json },
        } => emit(&cmd_families_list(json), None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("jetrao: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
