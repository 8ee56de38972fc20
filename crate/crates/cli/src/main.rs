use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diraclab::commands::{self, CliError, Source, SweepValues};
use diraclab::config::RunConfig;
use diraclab_core::scenarios;

#[derive(Parser)]
#[command(name = "diraclab", version, about = "Selection-mutation simulations, fate classification and limit dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Run configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario id (see `preset list`).
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration entry, e.g. `--set solver.t_end=5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct Output {
    /// Output directory.
    #[arg(long, env = "DIRACLAB_OUT", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the PDE and write the observables as CSV.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        /// Also write a density snapshot every STRIDE steps.
        #[arg(long, value_name = "STRIDE")]
        snapshots: Option<usize>,
    },
    /// Print the fate verdict for the initial data as JSON.
    Classify {
        #[command(flatten)]
        input: Input,
    },
    /// Per-period statistics over a range of switching periods.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        /// Comma-separated periods.
        #[arg(long, value_delimiter = ',', conflicts_with = "log_range")]
        values: Vec<f64>,
        /// `lo:hi:count` log-spaced periods.
        #[arg(long)]
        log_range: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Integrate the limit ODE and report extinction-duration bounds.
    Hjlimit {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Built-in scenarios.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a scenario in the configuration format.
    Export {
        id: String,
    },
}

fn load(input: &Input) -> Result<RunConfig, CliError> {
    let source = match (&input.config, &input.preset) {
        (Some(path), _) => Source::Config(path),
        (None, Some(id)) => Source::Preset(id),
        (None, None) => return Err(CliError::Config("need --config or --preset".into())),
    };
    commands::load(source, &input.overrides)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { input, output, snapshots } => {
            let cfg = load(&input)?;
            for f in commands::simulate(&cfg, &output.out, snapshots)? {
                println!("{}", f.display());
            }
        }
        Command::Classify { input } => {
            let cfg = load(&input)?;
            println!("{}", commands::classify_json(&commands::classify(&cfg)));
        }
        Command::Sweep { input, output, values, log_range, jobs } => {
            let cfg = load(&input)?;
            let values = match (values.is_empty(), log_range) {
                (false, _) => SweepValues::List(values),
                (true, Some(r)) => commands::parse_log_range(&r)?,
                (true, None) => SweepValues::FromConfig,
            };
            let outcome = commands::sweep(&cfg, values, jobs, &output.out)?;
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if !outcome.failures.is_empty() {
                let msg: Vec<String> = outcome.failures.iter().map(|(t, e)| format!("T = {t}: {e}")).collect();
                return Err(CliError::Numerical(msg.join("; ")));
            }
        }
        Command::Hjlimit { input, output } => {
            let cfg = load(&input)?;
            let (_, files) = commands::hjlimit(&cfg, &output.out)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Preset { action: PresetAction::List } => {
            for id in scenarios::preset_ids() {
                println!("{id}");
            }
        }
        Command::Preset { action: PresetAction::Export { id } } => {
            let p = scenarios::preset(&id).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{}", RunConfig::from_preset(p).to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("diraclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
