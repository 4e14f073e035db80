use thiserror::Error;

/// Errors raised anywhere in the renormalization pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite sample {value} at node x = {node}")]
    Fit { node: f64, value: f64 },

    #[error("invalid interval [{lo}, {hi}]")]
    Domain { lo: f64, hi: f64 },

    #[error("x = {x} lies outside the padded interval [{lo}, {hi}]")]
    Extrapolation { x: f64, lo: f64, hi: f64 },

    #[error("z = {re}{im:+}i lies outside the certified ellipse (parameter {rho}, certified {certified})")]
    AnalyticDomain { re: f64, im: f64, rho: f64, certified: f64 },

    #[error("composition escaped the domain of link {link} at node {node} (input {value})")]
    CompositionDomain { link: usize, node: f64, value: f64 },

    #[error("degree {0} is too small for this operation")]
    Degree(usize),

    #[error("invalid pair: {0}")]
    InvalidPair(String),

    #[error("pair is not normalized (xi(0) = {0})")]
    Normalization(f64),

    #[error("orbit escaped the numeric domain: {0}")]
    OrbitDomain(String),

    #[error("tolerance {tol} not reached within {iterations} iterations (best estimate {estimate})")]
    ToleranceNotReached { tol: f64, iterations: u64, estimate: f64 },

    #[error("invalid tolerance {0}")]
    Tolerance(f64),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("rational target {0}: targets must be eventually periodic continued fractions")]
    RationalTarget(String),

    #[error("combinatorics out of bounds: {0}")]
    Combinatorics(String),

    #[error("representation failure: {0}")]
    Representation(String),

    #[error("pair is not renormalizable: {0}")]
    NotRenormalizable(String),

    #[error("height exceeds the bound {0}")]
    UnboundedType(usize),

    #[error("renormalized pair failed validation: {0}")]
    Validation(String),

    #[error("alphabet violation: {0}")]
    Alphabet(String),

    #[error("continued fraction error: {0}")]
    ContinuedFraction(String),

    #[error("regression fit failed: {0}")]
    Regression(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Fit { .. } => "FitError",
            Error::Domain { .. } => "DomainError",
            Error::Extrapolation { .. } => "ExtrapolationError",
            Error::AnalyticDomain { .. } => "AnalyticDomainError",
            Error::CompositionDomain { .. } => "CompositionDomainError",
            Error::Degree(_) => "DegreeError",
            Error::InvalidPair(_) => "InvalidPairError",
            Error::Normalization(_) => "NormalizationError",
            Error::OrbitDomain(_) => "DomainError",
            Error::ToleranceNotReached { .. } => "ToleranceNotReached",
            Error::Tolerance(_) => "ToleranceError",
            Error::Tuning(_) => "TuningError",
            Error::RationalTarget(_) => "RationalTargetError",
            Error::Combinatorics(_) => "CombinatoricsError",
            Error::Representation(_) => "RepresentationError",
            Error::NotRenormalizable(_) => "NotRenormalizable",
            Error::UnboundedType(_) => "UnboundedTypeError",
            Error::Validation(_) => "ValidationError",
            Error::Alphabet(_) => "AlphabetError",
            Error::ContinuedFraction(_) => "ContinuedFractionError",
            Error::Regression(_) => "FitError",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
            Error::Serde(_) => "SerializationError",
        }
    }
}
