use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank must be at least 2, got {0}")]
    InvalidRank(usize),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("letter {letter} is outside the alphabet of rank {rank}")]
    LetterOutOfRank { letter: String, rank: usize },

    #[error("period reduces to the identity; not a boundary point")]
    TrivialPeriod,

    #[error("{0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not integrable against the double-boundary measure at this resolution: nonzero value {value} on nested cell ({x}, {y})")]
    NotIntegrable { x: String, y: String, value: String },

    #[error("boundary extension undefined at depth {depth}: values do not stabilize below {cell}")]
    ExtensionUndefined { depth: usize, cell: String },

    #[error("malformed cell set: {0}")]
    MalformedCells(String),

    #[error("metric axiom violated: {0}")]
    MetricAxiom(String),

    #[error("invalid point map: {0}")]
    InvalidMap(String),

    #[error("sample is not closed under the action: the orbit of {point} under {element} and its inverse exceeds the point cap")]
    NotClosed { element: String, point: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
