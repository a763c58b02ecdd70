use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metrorisk_cli::{run, CliError, Command, RunConfig};
use metrorisk_core::contagion::{ResidualSource, SerialPolicy};

#[derive(Debug, Parser)]
#[command(name = "metrorisk", version, about = "Housing-market integration, jump, contagion and diversification analysis")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true, env = "METRORISK_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "METRORISK_OUT")]
    out: Option<PathBuf>,

    /// HPI panel CSV.
    #[arg(long, global = true, env = "METRORISK_HPI")]
    hpi: Option<PathBuf>,

    /// Raw factor CSV.
    #[arg(long, global = true, env = "METRORISK_FACTORS")]
    factors: Option<PathBuf>,

    /// Synthetic scenario TOML, used when no HPI file is given.
    #[arg(long, global = true, env = "METRORISK_SCENARIO")]
    scenario: Option<PathBuf>,

    /// Rolling regression window in quarters.
    #[arg(long, global = true, env = "METRORISK_WINDOW")]
    window: Option<usize>,

    /// Bipower variation window in quarters.
    #[arg(long, global = true, env = "METRORISK_BIPOWER_WINDOW")]
    bipower_window: Option<usize>,

    /// Fit the factor model on raw returns.
    #[arg(long, global = true, env = "METRORISK_NO_PREWHITEN")]
    no_prewhiten: bool,

    /// Serial-correlation policy: auto, never or always.
    #[arg(long, global = true, env = "METRORISK_SERIAL")]
    serial: Option<SerialPolicy>,

    /// Interaction residual source: coastal or ca-equal-weighted.
    #[arg(long, global = true, env = "METRORISK_INTERACTION_RESIDUAL")]
    interaction_residual: Option<ResidualSource>,

    /// Scenario seed override.
    #[arg(long, global = true, env = "METRORISK_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Parse inputs and write returns and transformed factors.
    Ingest,
    /// Rolling factor-model integration series and summaries.
    Integrate,
    /// Lee–Mykland jump statistics and incidence.
    Jumps,
    /// Pairwise return and jump correlations.
    Correlate,
    /// Lagged contagion regressions.
    Contagion,
    /// Equal-weighted portfolio risk and diversification.
    Portfolio,
    /// Generate a synthetic panel.
    Synth,
    /// Table- and figure-shaped outputs.
    Report,
    /// Every module plus the report.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Integrate => Command::Integrate,
            Cmd::Jumps => Command::Jumps,
            Cmd::Correlate => Command::Correlate,
            Cmd::Contagion => Command::Contagion,
            Cmd::Portfolio => Command::Portfolio,
            Cmd::Synth => Command::Synth,
            Cmd::Report => Command::Report,
            Cmd::All => Command::All,
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &cli.hpi {
        cfg.hpi = Some(v.clone());
    }
    if let Some(v) = &cli.factors {
        cfg.factors = Some(v.clone());
    }
    if let Some(v) = &cli.scenario {
        cfg.scenario = Some(v.clone());
    }
    if let Some(v) = cli.window {
        cfg.window = v;
    }
    if let Some(v) = cli.bipower_window {
        cfg.jumps.bipower_window = v;
    }
    if cli.no_prewhiten {
        cfg.prewhiten = false;
    }
    if let Some(v) = cli.serial {
        cfg.serial = v;
    }
    if let Some(v) = cli.interaction_residual {
        cfg.interaction_residual = v;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let command = Command::from(cli.command);
    let result = build_config(&cli).and_then(|cfg| run(command, &cfg));
    match result {
        Ok(summary) => {
            for f in &summary.files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
