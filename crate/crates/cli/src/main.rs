use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thetavoa_cli::commands::{self, Options, Output};
use thetavoa_cli::config::{NamedLattice, RunConfig};
use thetavoa_cli::{CliError, Expansion, Result, Suite};

#[derive(Parser)]
#[command(name = "thetavoa", version, about = "Verify trace-function identities for lattice vertex algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Lattice JSON file {"name": ..., "gram": [[...]]}; defaults to [[4]]
    #[arg(long, global = true)]
    lattice: Option<PathBuf>,

    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sample points (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run independent checks on this many threads
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Print a readable summary to stderr
    #[arg(long, global = true)]
    human: bool,

    /// Record per-check runtime_ms in the report
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Fit the transition matrix for a unimodular matrix
    Fit {
        /// Matrix entries "a,b,f,d"
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Print a q-expansion
    Expand {
        #[arg(long, value_enum)]
        what: Expansion,
        #[arg(long)]
        order: u32,
        /// Coset coordinates in the lattice basis, e.g. "1/4" or "1/3,2/3"
        #[arg(long, allow_hyphen_values = true)]
        coset: Option<String>,
    },
}

fn options(cli: &Cli) -> Result<Options> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let lattice = match cli.lattice.as_ref().or(config.lattice_file.as_ref()) {
        Some(p) => NamedLattice::load(p)?,
        None => NamedLattice::default_rank_one(),
    };
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    Ok(Options {
        seed: cli.seed.unwrap_or(config.seed),
        config,
        lattice,
        jobs: cli.jobs,
        timings: cli.timings,
    })
}

fn run(cli: &Cli) -> Result<Output> {
    let opts = options(cli)?;
    match &cli.command {
        Command::Verify { suite } => commands::verify(*suite, &opts),
        Command::Fit { alpha } => commands::fit(&commands::parse_alpha(alpha)?, &opts),
        Command::Expand { what, order, coset } => commands::expand(*what, *order, coset.as_deref(), &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", out.json),
    }
    if cli.human {
        eprint!("{}", out.summary);
    }
    ExitCode::from(out.exit_code as u8)
}
