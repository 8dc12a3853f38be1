use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use distill_cli::commands::{run, Command, Format, RunOptions};

/// Simulate entanglement distillation through a polarization-dependent
/// filter, with state and process tomography.
#[derive(Parser)]
#[command(name = "distill", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration's seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prepare and filter the configured state and write simulated counts
    Simulate(Common),
    /// Reconstruct a two-photon state from counts
    Qst {
        #[command(flatten)]
        common: Common,
        /// CSV count table (arm1,arm2,count); simulated from the config when absent
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Process tomography of the filter and fit of its V transmission
    Qpt(Common),
    /// Full distillation run with metrics for both stages
    Distill(Common),
    /// Distill with each transmission in `sweep.tv_list`
    SweepTv(Common),
    /// Distill each amplitude ratio in `sweep.eps_list`
    SweepEps(Common),
    /// Model predictions for the six published mixed-state rows
    Table1(Common),
}

fn options(cmd: Cmd) -> RunOptions {
    let (command, common, counts) = match cmd {
        Cmd::Simulate(c) => (Command::Simulate, c, None),
        Cmd::Qst { common, counts } => (Command::Qst, common, counts),
        Cmd::Qpt(c) => (Command::Qpt, c, None),
        Cmd::Distill(c) => (Command::Distill, c, None),
        Cmd::SweepTv(c) => (Command::SweepTv, c, None),
        Cmd::SweepEps(c) => (Command::SweepEps, c, None),
        Cmd::Table1(c) => (Command::Table1, c, None),
    };
    RunOptions {
        command,
        config: common.config,
        out: common.out,
        seed: common.seed,
        format: common.format,
        counts,
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(&options(cli.command)) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
