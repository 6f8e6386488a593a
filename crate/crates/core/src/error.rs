use thiserror::Error;

/// Failure modes of the numerical routines. Every variant names the
/// condition that was violated; the CLI maps all of them to exit code 2.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("NearSingularSpectral: |<mu - 2 xi, mu>| = {margin:e} <= eta at mu = {mu:?}")]
    NearSingularSpectral { mu: Vec<i32>, margin: f64 },

    #[error("IrregularSpectral: {0}")]
    IrregularSpectral(String),

    #[error("TailNotConverged: tail bound {bound:e} exceeds tolerance {tol:e} at level {level}")]
    TailNotConverged { bound: f64, tol: f64, level: usize },

    #[error("CFunctionPole: gamma argument {argument} lies within eta of a pole")]
    CFunctionPole { argument: String },

    #[error("CoefficientPole: factor {factor} vanishes")]
    CoefficientPole { factor: String },

    #[error("ParameterPole: {0}")]
    ParameterPole(String),

    #[error("QuadratureNotConverged: last two estimates differ by {difference:e}")]
    QuadratureNotConverged { difference: f64 },

    #[error("ChamberViolation: {0}")]
    ChamberViolation(String),

    #[error("PrecisionExhausted: condition number {condition:e} exceeds the {bits}-bit budget")]
    PrecisionExhausted { condition: f64, bits: u32 },

    #[error("InvalidInput: {0}")]
    InvalidInput(String),

    #[error("{source} (orbit term w = {element})")]
    InOrbitTerm { element: String, source: Box<Error> },
}

impl Error {
    /// Short variant name, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NearSingularSpectral { .. } => "NearSingularSpectral",
            Error::IrregularSpectral(_) => "IrregularSpectral",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::CFunctionPole { .. } => "CFunctionPole",
            Error::CoefficientPole { .. } => "CoefficientPole",
            Error::ParameterPole(_) => "ParameterPole",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::ChamberViolation(_) => "ChamberViolation",
            Error::PrecisionExhausted { .. } => "PrecisionExhausted",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InOrbitTerm { source, .. } => source.name(),
        }
    }

    /// Strips orbit-term wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InOrbitTerm { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
