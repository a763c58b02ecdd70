//! Quarterly calendar, panels, returns, factor transforms, ingestion and
//! alignment.

mod align;
mod factors;
pub mod io;
mod panel;
mod quarter;

pub use align::{align, AlignedDataset, DroppedRow};
pub use factors::{transform_factor, FactorTable, TransformConfig, TransformKind, STANDARD_FACTORS};
pub use io::{load_factor_table, load_hpi_panel, read_factor_table, read_hpi_panel, RawFactorFile};
pub use panel::{compute_returns, log_returns_pct, IndexPanel, Msa, MsaSeries, QuarterSeries, ReturnPanel};
pub use quarter::{parse_quarter, quarter_range, Quarter};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimeseriesError {
    #[error("cannot parse quarter '{token}': {reason}")]
    Parse { token: String, reason: String },

    #[error("MSA {msa} at {quarter}: {reason}")]
    Domain {
        msa: String,
        quarter: Quarter,
        reason: String,
    },

    #[error("factor value {value} at position {index} is not positive under {kind}")]
    FactorDomain {
        index: usize,
        value: f64,
        kind: TransformKind,
    },

    #[error("ingestion error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
