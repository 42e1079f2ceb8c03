use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Sum queries need a declared, positive value bound.
    #[error("sum query requires a positive value bound, got {0:?}")]
    MissingValueBound(Option<f64>),

    #[error("record `{id}` has value {value} outside the declared bound {bound}")]
    ValueOutOfBound { id: String, value: f64, bound: f64 },

    /// All samples identical, so the sample deviation is zero.
    #[error("degenerate sample: standard deviation is zero")]
    DegenerateSample,

    #[error("adaptive quadrature did not converge on [{a}, {b}] within depth {depth}")]
    NonConvergence { a: f64, b: f64, depth: u32 },

    #[error("integrand is not finite at t = {0}")]
    NonFiniteIntegrand(f64),

    /// The attacker knows fewer records than the requested number of samples.
    #[error("background knowledge holds {known} records but {m} samples were requested")]
    InsufficientKnowledge { known: usize, m: usize },

    #[error("invalid attack configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {reason}")]
    DataFormat {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by malformed input data rather than bad settings.
    pub fn is_data_format(&self) -> bool {
        matches!(
            self,
            Error::DataFormat { .. } | Error::ValueOutOfBound { .. } | Error::Io { .. }
        )
    }
}
