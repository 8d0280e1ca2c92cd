use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use honeydirac::cli::{cmd_bifurcate, cmd_integrals, cmd_spectrum, cmd_verify, RunConfig};

#[derive(Parser)]
#[command(
    name = "honeydirac",
    version,
    about = "Nonlinear Schrödinger eigenmodes at the Dirac point of a honeycomb lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear spectrum, symmetry classes and the Dirac pair
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Also sweep the lowest eigenvalues along k = K + (t, 0)
        #[arg(long)]
        sweep: bool,
    },
    /// Quartic integrals, T2 sum and the necessary-condition landscape
    Integrals(Common),
    /// Equator scan, root bisection and the eight-mode bifurcation
    Bifurcate(Common),
    /// Re-certify stored modes (residuals, uniqueness, rotation generation)
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key-value config file
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output_dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's cutoff
    #[arg(long)]
    cutoff: Option<u32>,
    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
}

fn load(common: &Common) -> honeydirac::Result<RunConfig> {
    let mut cfg = RunConfig::parse_file(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(cutoff) = common.cutoff {
        cfg.cutoff = cutoff;
    }
    cfg.quiet = common.quiet;
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> honeydirac::Result<()> {
    match cli.command {
        Command::Spectrum { common, sweep } => {
            let mut cfg = load(&common)?;
            cfg.sweep = sweep;
            cmd_spectrum(&cfg)
        }
        Command::Integrals(c) => cmd_integrals(&load(&c)?),
        Command::Bifurcate(c) => cmd_bifurcate(&load(&c)?),
        Command::Verify(c) => cmd_verify(&load(&c)?),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
