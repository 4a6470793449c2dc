use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] dpcascade_core::Error),

    /// An index evaluated to NaN during a run.
    #[error("numeric fault in round {round}: index of item {item} is NaN")]
    NumericFault { round: u64, item: usize },

    #[error("{0} grid cell(s) failed")]
    CellsFailed(usize),

    #[error("aggregation: {0}")]
    Aggregation(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure happened while simulating rather than while
    /// reading configuration or writing output.
    pub fn is_simulation_fault(&self) -> bool {
        matches!(self, SimError::NumericFault { .. } | SimError::Core(_) | SimError::CellsFailed(_))
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
