//! Integration, jump-risk, contagion and diversification analytics for
//! quarterly metropolitan house-price index panels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contagion;
pub mod correlations;
pub mod geography;
pub mod integration;
pub mod jumps;
pub mod portfolio;
pub mod regress;
pub mod stats;
pub mod synth;
pub mod timeseries;

pub use contagion::{ContagionError, ContagionFit, SerialPolicy, ResidualSource};
pub use correlations::{CorrelationError, PairCorrelation, PairKind, Timing};
pub use integration::{IntegrationError, IntegrationSeries, IntegrationSummary};
pub use jumps::{JumpError, JumpSeries};
pub use portfolio::{PortfolioError, PortfolioSeries};
pub use regress::{RegressError, RegressionFit};
pub use synth::{ScenarioConfig, SynthError};
pub use timeseries::{FactorTable, IndexPanel, Msa, MsaSeries, Quarter, QuarterSeries, ReturnPanel, TimeseriesError};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Jump(#[from] JumpError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Contagion(#[from] ContagionError),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Timeseries(TimeseriesError::Io { .. }) => "io",
            Error::Timeseries(TimeseriesError::Parse { .. } | TimeseriesError::Ingest { .. }) => "input",
            Error::Timeseries(TimeseriesError::Config(_)) => "config",
            Error::Timeseries(_) => "data",
            Error::Regress(_) => "regression",
            Error::Integration(IntegrationError::WindowTooShort { .. }) => "config",
            Error::Integration(_) => "integration",
            Error::Jump(JumpError::Config(_)) => "config",
            Error::Jump(_) => "jumps",
            Error::Correlation(CorrelationError::UnmappedState { .. }) => "config",
            Error::Correlation(_) => "correlation",
            Error::Contagion(_) => "contagion",
            Error::Portfolio(_) => "portfolio",
            Error::Synth(_) => "scenario",
        }
    }
}
