use thiserror::Error;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) | CliError::Io { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<talbot::Error> for CliError {
    fn from(e: talbot::Error) -> Self {
        use talbot::Error::*;
        match e {
            InvalidGrid(_)
            | InvalidParameter(_)
            | IncommensurateGrid { .. }
            | GridMismatch { .. }
            | TruncationTooSmall { .. }
            | SeedVanishes { .. }
            | NotDefective { .. }
            | WidthTooLarge { .. }
            | NotCoprime { .. }
            | TiltConditionsViolated(_)
            | BandwidthExceeded { .. } => CliError::Validation(e.to_string()),
            UnderResolved { .. }
            | TruncationInadequate { .. }
            | SeedNotSolution { .. }
            | ChainResidual { .. }
            | ComplexSpectrum { .. }
            | BlockMismatch(_)
            | StepNotConverged { .. }
            | NotSecular(_)
            | NormNotConserved { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
