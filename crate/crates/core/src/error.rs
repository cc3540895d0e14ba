use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A vector or sequence had the wrong length. `cycle` is set when the
    /// mismatch was found while driving a trace.
    #[error("dimension mismatch{}: expected {expected}, got {actual}", at_cycle(.cycle))]
    Dimension {
        expected: usize,
        actual: usize,
        cycle: Option<u64>,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A trace row with the wrong number of columns.
    #[error("line {line}: expected {expected} fields, found {actual}")]
    RowWidth {
        line: u64,
        expected: usize,
        actual: usize,
    },

    #[error("combinational cycle through node {node}")]
    CombinationalCycle { node: usize },

    #[error("malformed gate graph: {0}")]
    Structure(String),

    #[error("no value assigned to source `{0}`")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_cycle(cycle: &Option<u64>) -> String {
    match cycle {
        Some(c) => format!(" at cycle {c}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn dimension(expected: usize, actual: usize) -> Self {
        Error::Dimension {
            expected,
            actual,
            cycle: None,
        }
    }

    /// Attach a cycle index to a dimension error; other errors pass through.
    pub(crate) fn at(self, at: u64) -> Self {
        match self {
            Error::Dimension {
                expected, actual, ..
            } => Error::Dimension {
                expected,
                actual,
                cycle: Some(at),
            },
            other => other,
        }
    }
}
