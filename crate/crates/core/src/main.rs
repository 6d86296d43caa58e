use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use precs_core::cli::{cmd_evolve, cmd_grid, cmd_verify, CliError, EXIT_CONFIG};
use precs_core::config::RunConfig;

#[derive(Parser)]
#[command(name = "precs", version, about = "Coherent-state simulation of unitary pre-measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of the reduced state, entropy and readout (evolve.csv).
    Evolve(Common),
    /// Phase-space field and ε-supports at one time (grid_t<t>.csv).
    Grid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: f64,
    },
    /// Oracle verification report (verify.csv); exit 1 on any failure.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long = "gap-cells")]
    gap_cells: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::from_file(&self.config)?;
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(precs_core::Error::InvalidEps(eps).into());
            }
            cfg.eps = eps;
        }
        if let Some(n) = self.nmax {
            cfg.n_max = n;
        }
        if let Some(k) = self.gap_cells {
            cfg.gap_cells = k;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Evolve(common) => {
            let path = cmd_evolve(&common.load()?)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Grid { common, time } => {
            let (grid, supports) = cmd_grid(&common.load()?, time)?;
            println!("wrote {}", grid.display());
            println!("wrote {}", supports.display());
            Ok(0)
        }
        Command::Verify(common) => {
            let report = cmd_verify(&common.load()?)?;
            print!("{}", report.to_text());
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
