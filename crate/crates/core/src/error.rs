use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid state{}: density {density}, pressure {pressure}", cell.map(|c| format!(" in cell {c}")).unwrap_or_default())]
    InvalidState {
        cell: Option<usize>,
        density: f64,
        pressure: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exact solution: {0}")]
    Oracle(String),

    #[error("config: {0}")]
    Config(String),

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("step {step} at t = {time}: {source}")]
    Solver {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a cell index to an invalid-state error raised without one.
    pub fn in_cell(self, j: usize) -> Self {
        match self {
            Error::InvalidState {
                cell: None,
                density,
                pressure,
            } => Error::InvalidState {
                cell: Some(j),
                density,
                pressure,
            },
            other => other,
        }
    }
}
