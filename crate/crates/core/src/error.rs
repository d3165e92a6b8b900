use thiserror::Error;

use crate::optimizer::OptimizerTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("kernel singularity: {0}")]
    Singularity(String),

    #[error("mask error: {0}")]
    Mask(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigen-decomposition failed: {0}")]
    EigenDecomposition(String),

    #[error("cluster error: {0}")]
    Cluster(String),

    #[error("resonance: lambda = {lambda} is within the guard band of eigenvalue {nearest}")]
    Resonance { lambda: f64, nearest: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("undefined limit: {0}")]
    UndefinedLimit(String),

    #[error("requirement violated: {0}")]
    Requirement(String),

    #[error("root bracketing failed: {0}")]
    RootBracket(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("optimizer did not converge: {reason}")]
    NotConverged {
        reason: String,
        trace: Box<OptimizerTrace>,
    },
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Partition(_) => "partition",
            Error::Singularity(_) => "singularity",
            Error::Mask(_) => "mask",
            Error::InvalidInput(_) => "invalid-input",
            Error::EigenDecomposition(_) => "eigen-decomposition",
            Error::Cluster(_) => "cluster",
            Error::Resonance { .. } => "resonance",
            Error::LinearSolve(_) => "linear-solve",
            Error::UndefinedLimit(_) => "undefined-limit",
            Error::Requirement(_) => "requirement",
            Error::RootBracket(_) => "root-bracket",
            Error::Usage(_) => "usage",
            Error::NotConverged { .. } => "not-converged",
        }
    }
}
