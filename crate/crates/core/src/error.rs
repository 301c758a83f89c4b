use thiserror::Error;

/// Errors raised by filter design, evaluation and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter fell outside its admissible range.
    #[error("{name} = {value} is outside the admissible range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// The weighted moment matrix is too poorly conditioned to orthonormalize.
    #[error("orthonormalization is ill-conditioned (degree {degree}, pole {pole}): {detail}")]
    Conditioning { degree: usize, pole: f64, detail: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A non-finite sample was met while filtering.
    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed frame file: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_pole(name: &'static str, p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: p,
            range: "(0, 1)",
        })
    }
}
