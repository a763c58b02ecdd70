//! Command-line pipeline over the `metrorisk-core` analytics.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod render;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use config::RunConfig;
pub use error::CliError;
pub use output::{Manifest, MANIFEST_FILE};

use metrorisk_core::synth::ground_truth_report;
use output::Artifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Integrate,
    Jumps,
    Correlate,
    Contagion,
    Portfolio,
    Synth,
    Report,
    All,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Ingest,
        Command::Integrate,
        Command::Jumps,
        Command::Correlate,
        Command::Contagion,
        Command::Portfolio,
        Command::Synth,
        Command::Report,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Integrate => "integrate",
            Command::Jumps => "jumps",
            Command::Correlate => "correlate",
            Command::Contagion => "contagion",
            Command::Portfolio => "portfolio",
            Command::Synth => "synth",
            Command::Report => "report",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command '{s}'")))
    }
}

/// Outcome of a successful run.
#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<String>,
    pub manifest: Manifest,
}

fn synth_files(s: &pipeline::Synthetic, art: &mut Artifacts) {
    art.add("hpi.csv", s.hpi_csv.clone());
    art.add("factors.csv", s.factors_csv.clone());
    art.add("transforms.toml", s.scenario.transform_config().to_toml_string().into_bytes());
    art.add("scenario.toml", s.scenario.to_toml_string().into_bytes());
    let mut json = serde_json::to_vec_pretty(&ground_truth_report(&s.panel.truth)).expect("report serializes");
    json.push(b'\n');
    art.add("ground_truth.json", json);
}

/// Runs one command and publishes its artifacts into `config.out`.
pub fn run(command: Command, config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    let mut inputs = BTreeMap::new();
    let mut art = Artifacts::default();
    if command == Command::Synth {
        let s = pipeline::synthesize(config, &mut inputs)?;
        synth_files(&s, &mut art);
    } else {
        let data = pipeline::load(config, &mut inputs)?;
        let everything = matches!(command, Command::All | Command::Report);
        if command == Command::All {
            if let Some(s) = &data.synthetic {
                synth_files(s, &mut art);
            }
        }
        if matches!(command, Command::Ingest | Command::All) {
            render::ingest(&data, &mut art);
        }
        let integration = match command {
            Command::Integrate | Command::Portfolio => Some(pipeline::integrate(&data, config)?),
            _ if everything => Some(pipeline::integrate(&data, config)?),
            _ => None,
        };
        let jumps = match command {
            Command::Jumps | Command::Correlate => Some(pipeline::jumps(&data, config)?),
            _ if everything => Some(pipeline::jumps(&data, config)?),
            _ => None,
        };
        let correlations = match (&jumps, command) {
            (Some(j), Command::Correlate) => Some(pipeline::correlate(&data, j, config)?),
            (Some(j), _) if everything => Some(pipeline::correlate(&data, j, config)?),
            _ => None,
        };
        let contagion = (command == Command::Contagion || everything).then(|| pipeline::contagion(&data, config));
        let portfolios = match &integration {
            Some(i) if command == Command::Portfolio || everything => Some(pipeline::portfolios(&data, i, config)),
            _ => None,
        };

        let module = command != Command::Report;
        if module {
            if let Some(i) = &integration {
                if command != Command::Portfolio {
                    render::integration(&data, i, &mut art);
                }
            }
            if let Some(j) = &jumps {
                if command != Command::Correlate {
                    render::jumps(j, &mut art);
                }
            }
            if let Some(c) = &correlations {
                render::correlations(c, &mut art);
            }
            if let Some(c) = &contagion {
                render::contagion(c, &mut art);
            }
            if let Some(p) = &portfolios {
                render::portfolio(p, &mut art);
            }
        }
        if everything {
            report::write(
                integration.as_ref().expect("computed"),
                jumps.as_ref().expect("computed"),
                correlations.as_ref().expect("computed"),
                contagion.as_deref().expect("computed"),
                portfolios.as_ref().expect("computed"),
                &mut art,
            );
        }
    }
    let manifest = Manifest::new(command.name(), config.fingerprint(), inputs, &art);
    let files = output::publish(&config.out, art, &manifest)?;
    Ok(RunSummary { files, manifest })
}
