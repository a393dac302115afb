use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Internal => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<gazekit::Error> for CliError {
    fn from(e: gazekit::Error) -> Self {
        use gazekit::Error as E;
        let kind = match &e {
            E::InvalidConfig { .. } => ErrorKind::Usage,
            E::InvalidLandmarks(_)
            | E::InvalidImage(_)
            | E::InvalidPolygon(_)
            | E::EmptyTrainingSet
            | E::TooFewClasses(_)
            | E::EmptyClass(_)
            | E::DimensionMismatch { .. }
            | E::MissingBackground(_)
            | E::NoQualifyingFrames(_)
            | E::InsufficientData { .. }
            | E::ModeMismatch(_)
            | E::ModelFormat(_)
            | E::DataFormat(_)
            | E::Io(_) => ErrorKind::Data,
            _ => ErrorKind::Internal,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}
