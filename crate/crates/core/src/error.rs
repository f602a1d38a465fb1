use thiserror::Error;

pub type Result<T, E = BhError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BhError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no configuration of {particles} particles on {sites} sites with at most {cap} per site")]
    InfeasibleSector { sites: usize, particles: usize, cap: usize },

    #[error("configuration {0:?} is not an element of the basis")]
    ConfigNotInBasis(Vec<u8>),

    #[error("site {site} is out of range for a chain of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("operands live in different particle-number sectors")]
    SectorMismatch,

    #[error("the closed-form walk requires an odd number of sites, got {0}")]
    EvenChain(usize),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Krylov time step underflowed at t = {time} (step {step:.3e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("density matrix has eigenvalue {0:.3e} below the PSD tolerance")]
    NotPositive(f64),

    #[error("projection succeeds with probability {p:.3e}, below threshold {threshold:.1e}")]
    ProjectionUnlikely { p: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("scenario needs a basis of dimension {dim}, above the configured cap of {cap}")]
    InfeasibleDimension { dim: u128, cap: u128 },
}
