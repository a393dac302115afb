use thiserror::Error;

use crate::region::GazeRegion;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid eye polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("mask covers no pixels")]
    DegenerateMask,

    #[error("intensity range is degenerate (p2 == p98 == {0})")]
    DegenerateIntensity(u8),

    #[error("normalizing box has zero width or height")]
    DegenerateBox,

    #[error("eye corners coincide")]
    DegenerateEye,

    #[error("feature mode requires a detected pupil")]
    MissingPupil,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training set needs at least two classes, found {0}")]
    TooFewClasses(usize),

    #[error("class {0} has no samples")]
    EmptyClass(GazeRegion),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("no background model for subject `{0}`")]
    MissingBackground(String),

    #[error("subject `{0}` has no qualifying frames")]
    NoQualifyingFrames(String),

    #[error("insufficient data: subject `{subject}` has {found} usable frames for {region}, need {required}")]
    InsufficientData {
        subject: String,
        region: GazeRegion,
        found: usize,
        required: usize,
    },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("malformed data: {0}")]
    DataFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
