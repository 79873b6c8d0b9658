use std::path::PathBuf;
use std::process::ExitCode;

use bergman_cli::config::{DomainName, FunctionSpec, RunConfig};
use bergman_cli::{run, CliError, Command};
use bergman_extremal::FunctionKind;
use clap::Parser;

#[derive(Parser)]
#[command(name = "bergdist", version, about = "Weighted Bergman distance toolkit")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (JSON); optional for `suite`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; affects speed only.
    #[arg(long)]
    threads: Option<usize>,
}

fn suite_config() -> RunConfig {
    RunConfig {
        domain: DomainName::Halfplane,
        n: 1,
        function: FunctionSpec { kind: FunctionKind::Zero, scale: 1.0 },
        params: Default::default(),
        ladder: None,
        quad: None,
        payload: Default::default(),
        seed: 0,
    }
}

fn execute(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Command::Suite) => suite_config(),
        (None, _) => return Err(CliError::Config("--config is required".into())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| run(cli.command, &cfg, &cli.out)),
        None => run(cli.command, &cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("summary serialises"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
