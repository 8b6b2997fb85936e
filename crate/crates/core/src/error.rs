use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),

    #[error("graph sequence has no snapshots")]
    EmptySequence,

    #[error("segment [{start}, {end}) is outside [1, {limit}]")]
    OutOfBounds {
        start: usize,
        end: usize,
        limit: usize,
    },

    #[error("node {0} has no community assignment")]
    UnassignedNode(usize),

    #[error("link probability {0} is outside [0, 1]")]
    DomainError(f64),

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("invalid community assignment: {0}")]
    InvalidAssignment(String),

    #[error("snapshot {0} has no edges")]
    DegenerateSnapshot(usize),

    #[error("unknown setting {0}; built-in settings are 1 to 6")]
    UnknownSetting(usize),

    #[error("invalid setting spec: {0}")]
    InvalidSpec(String),

    #[error("partitions share no nodes")]
    EmptyDomain,

    #[error("change points differ: estimated {estimated:?}, truth {truth:?}")]
    SegmentMismatch {
        estimated: Vec<usize>,
        truth: Vec<usize>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used on the command line's error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "self_loop",
            Error::EmptySequence => "empty_sequence",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::UnassignedNode(_) => "unassigned_node",
            Error::DomainError(_) => "domain_error",
            Error::InvalidSegmentation(_) => "invalid_segmentation",
            Error::InvalidAssignment(_) => "invalid_assignment",
            Error::DegenerateSnapshot(_) => "degenerate_snapshot",
            Error::UnknownSetting(_) => "unknown_setting",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::EmptyDomain => "empty_domain",
            Error::SegmentMismatch { .. } => "segment_mismatch",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Invariant(_) => "invariant",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit status: 2 bad config, 3 data error, 4 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownSetting(_) | Error::InvalidSpec(_) => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
