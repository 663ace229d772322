//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix dimensions do not match what the operation expects.
    #[error("input shape mismatch: {0}")]
    InputShape(String),

    /// A sensor layout references a link that does not exist, or ids are
    /// not dense.
    #[error("sensor layout error: {0}")]
    Layout(String),

    /// Lookup of a sensor id that is not part of the snapshot.
    #[error("unknown sensor id {0}")]
    UnknownSensor(u32),

    /// Geometry that admits no well-defined answer (zero-length gaze ray,
    /// POI coincident with the gaze origin).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A stream consumer saw a timestamp that does not strictly increase.
    #[error("stream order violation: {0}")]
    StreamOrder(String),

    /// Feature scaling could not be fitted (empty or degenerate training
    /// data).
    #[error("scaling fit error: {0}")]
    ScalingFit(String),

    /// Invalid classifier parameter (even k, k larger than the dataset, ...).
    #[error("model parameter error: {0}")]
    ModelParameter(String),

    /// Training failed (divergence, single-class data, ...).
    #[error("training error: {0}")]
    Training(String),

    /// Cross-validation could not build usable folds.
    #[error("fold construction error: {0}")]
    FoldConstruction(String),

    /// Scenario generation failed (unreachable sensor, bad schedule).
    #[error("scenario generation error: {0}")]
    Generation(String),

    /// Corpus assembly failed (single-class corpus, no traces).
    #[error("corpus error: {0}")]
    Corpus(String),

    /// Config file missing, malformed, or self-inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A versioned file with a format version this build does not read.
    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { expected: u32, found: u32 },

    /// Structural trace-file problem, with the offending line.
    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    /// Trace timestamps must strictly increase.
    #[error("non-monotone timestamp at line {line}")]
    NonMonotoneTimestamp { line: usize },

    /// Dataset assembly failed (unlabeled trace, incompatible headers).
    #[error("dataset assembly error: {0}")]
    Assembly(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
