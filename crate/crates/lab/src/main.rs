use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eehc_lab::{Command, LabError, Overrides};

#[derive(Parser)]
#[command(name = "eehc-lab", version, about = "Energy model sweeps, optimal cluster counts and network simulations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Per-role energies for one scenario.
    Analyze(Common),
    /// Parameter grid from a preset or a config document.
    Sweep(Common),
    /// Round-by-round network simulation.
    Simulate(Common),
    /// Closed-form and numeric optimal cluster counts.
    OptimalK(Common),
}

#[derive(Args)]
struct Common {
    /// JSON document with flat dotted keys, e.g. {"radio.pa_efficiency": 0.4}.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; sidecars are written next to it. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paper_db_compat: bool,
    #[arg(long)]
    rounds: Option<u64>,
    /// Write the per-event energy ledger (simulate).
    #[arg(long)]
    trace: bool,
    /// Initial battery per node in joules (simulate).
    #[arg(long)]
    e_start: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    /// Power amplifier efficiency.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d_bs: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d_intra: Option<f64>,
    /// Frames per round.
    #[arg(long)]
    nf: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    field_side: Option<f64>,
}

fn execute(cli: Cli) -> Result<(), LabError> {
    let (command, c) = match cli.command {
        Sub::Analyze(c) => (Command::Analyze, c),
        Sub::Sweep(c) => (Command::Sweep, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::OptimalK(c) => (Command::OptimalK, c),
    };
    let document = match &c.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?),
        None => None,
    };
    let flags = Overrides {
        command: Some(command),
        preset: c.preset,
        seed: c.seed,
        out: c.out,
        paper_db_compat: c.paper_db_compat,
        rounds: c.rounds,
        n: c.n,
        k: c.k,
        m: c.m,
        eta: c.eta,
        snr_db: c.snr_db,
        d_bs: c.d_bs,
        d_intra: c.d_intra,
        nf: c.nf,
        field_side: c.field_side,
        e_start: c.e_start,
        trace: c.trace,
    };
    let cfg = eehc_lab::parse_config(document.as_deref(), &flags)?;
    log::info!("running {:?}", cfg.command);
    eehc_lab::run(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
