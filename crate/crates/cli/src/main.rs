use std::path::PathBuf;
use std::process::ExitCode;

use cfs_cli::{cmd_battery, cmd_models, cmd_smallball, CliError, Outcome, RawConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cfs", version, about = "Monte Carlo small-ball batteries for conditional full support")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List model tags and their configuration keys.
    Models,
    /// Estimate one conditional small-ball probability.
    Smallball(RunArgs),
    /// Run the query battery over one model or a preset.
    Battery(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plotdata,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Existing directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl RunArgs {
    fn into_config(self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        if let Some(s) = self.seed {
            raw.set("seed", s.to_string());
        }
        if let Some(r) = self.reps {
            raw.set("reps", r.to_string());
        }
        if let Some(w) = self.workers {
            raw.set("workers", w.to_string());
        }
        if let Some(o) = self.out {
            raw.set("out", o.to_string_lossy());
        }
        if let Some(f) = self.format {
            let name = match f {
                Format::Csv => "csv",
                Format::Json => "json",
                Format::Plotdata => "plotdata",
            };
            raw.set("format", name);
        }
        Ok(raw)
    }
}

fn run(args: RunArgs, command: fn(&RawConfig) -> Result<Outcome, CliError>) -> Result<(), CliError> {
    let outcome = command(&args.into_config()?)?;
    print!("{}", outcome.summary());
    eprintln!("{} continuations in {:.2} s", outcome.report.replications, outcome.report.wall_clock.as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Models => {
            print!("{}", cmd_models());
            Ok(())
        }
        Command::Smallball(args) => run(args, cmd_smallball),
        Command::Battery(args) => run(args, cmd_battery),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cfs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
