use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use salpeter::runner::{execute_file, Command, RunOptions};

/// Wavepacket tunneling for the 1D relativistic Schrödinger (Salpeter) equation.
#[derive(Parser)]
#[command(name = "salpeter", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Every output the scenario enables
    Run(Common),
    /// Eigenvalue spectrum of the discretized Hamiltonian
    Eigen(Common),
    /// Position-space density snapshots
    Evolve(Common),
    /// Outside-the-light-cone fraction time series and its global maximum
    Olc(Common),
    /// OLC maximum over a (v0, width) sweep
    Scan(Common),
    /// Narrow-barrier eigenvector against the delta-limit profile
    DeltaCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a scenario field, e.g. `potential.v0=3`
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Always re-diagonalize; do not read or write the eigenbasis cache
    #[arg(long)]
    no_cache: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Eigen(a) => (Command::Eigen, a),
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Olc(a) => (Command::Olc, a),
        Cmd::Scan(a) => (Command::Scan, a),
        Cmd::DeltaCheck(a) => (Command::DeltaCheck, a),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        out_dir: args.out,
        use_cache: !args.no_cache,
        scenario_file: None,
    };
    match execute_file(command, &args.scenario, &args.overrides, &opts) {
        Ok(m) => {
            println!(
                "{}: wrote {} to {} in {:.2}s",
                m.command,
                m.outputs.join(", "),
                opts.out_dir.display(),
                m.wall_time_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
