use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome (L={lost}, k={detected}) does not exist for a {n_photons}-photon state")]
    UnknownOutcome {
        lost: usize,
        detected: usize,
        n_photons: usize,
    },

    #[error("degenerate Bayes update: the likelihood of the outcome vanishes for every phase")]
    DegenerateUpdate,

    #[error("Fisher information diverges at phi={phi} (outcome L={lost}, k={detected} has P=0 with nonzero slope)")]
    FisherDivergence {
        phi: f64,
        lost: usize,
        detected: usize,
    },

    #[error("branch guard exceeded: {branches} leaves > limit {limit}")]
    BranchGuard { branches: u128, limit: u128 },

    #[error("oracle dimension guard: at most {max} photons supported, got {n_photons}")]
    DimensionGuard { n_photons: usize, max: usize },

    #[error("{plan}: {source}")]
    Plan {
        plan: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Strips plan context and returns the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Plan { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
