use lfrect::io::IoError;
use lfrect::Error;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GENERATION: u8 = 3;
pub const EXIT_COPLANAR: u8 = 4;
pub const EXIT_NO_OVERLAP: u8 = 5;

/// A failed command: message for stderr and process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(EXIT_INTERNAL, message)
    }

    /// Re-labels internal failures as generation failures.
    pub fn generation(self) -> Self {
        if self.code == EXIT_INTERNAL {
            Self { code: EXIT_GENERATION, ..self }
        } else {
            self
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CoplanarDegeneracy { .. } => EXIT_COPLANAR,
            Error::NoOverlap(_) => EXIT_NO_OVERLAP,
            Error::InvalidConfig(_)
            | Error::InvalidIntrinsics(_)
            | Error::InvalidRotation(_)
            | Error::InvalidCorrespondences(_)
            | Error::InvalidLightField(_)
            | Error::IndexOutOfRange(_)
            | Error::ZeroBaseline
            | Error::CollinearConstruction => EXIT_CONFIG,
            _ => EXIT_INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Core(inner) => inner.into(),
            other => Self::config(other.to_string()),
        }
    }
}
