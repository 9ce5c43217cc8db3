use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homfit_cli::{run_pipeline, write_outcome, AnalysisConfig, CliError, Task};

#[derive(Parser)]
#[command(name = "homfit", version, about = "Two-photon interference fitting and waveguide design")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory. `run` defaults to the directory of its config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; drawn from the OS when omitted and saved in config.json.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(flatten)]
    Task(Task),
    /// Re-run a saved config.json.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("homfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let (cfg, out) = match cli.command {
        Command::Task(task) => (AnalysisConfig::new(task, cli.seed)?, cli.out.unwrap_or_else(|| "out".into())),
        Command::Run { config } => {
            let mut cfg = AnalysisConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = config.parent().map(PathBuf::from).unwrap_or_default();
            (cfg, cli.out.unwrap_or(dir))
        }
    };
    let outcome = run_pipeline(&cfg)?;
    write_outcome(&out, &cfg, &outcome)?;
    print!("{}", homfit_cli::report::render_text(&serde_json::to_value(&outcome.report).expect("report serializes")));
    Ok(())
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        super::Cli::command().debug_assert();
    }
}
