use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use magnls::cli::{dispatch, example_config, exit_code, load_config, parse_eps_list, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Limit,
    Map,
    Solve,
    Sweep,
    Vortex,
    Verify,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Limit => Subcommand::Limit,
            Command::Map => Subcommand::Map,
            Command::Solve => Subcommand::Solve,
            Command::Sweep => Subcommand::Sweep,
            Command::Vortex => Subcommand::Vortex,
            Command::Verify => Subcommand::Verify,
        }
    }
}

/// Semiclassical solutions of the cylindrically symmetric magnetic NLS.
#[derive(Debug, Parser)]
#[command(name = "magnls", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (JSON); the built-in example when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated eps values, overriding the config.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Winding number for `vortex`.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i32>,
}

fn run(cli: Cli) -> magnls::Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => example_config(),
    };
    if let Some(e) = &cli.eps {
        cfg.eps = parse_eps_list(e)?;
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.k {
        cfg.vortex.k = k;
    }
    cfg.validate()?;
    let outcome = dispatch(cli.command.into(), &cfg)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
