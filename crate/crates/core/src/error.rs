use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state diverges: |zeta| = {modulus} must be < 1")]
    DivergentState { modulus: f64 },

    #[error("state is degenerate: zeta = 0 with p = {p} > 0 has zero norm")]
    DegenerateState { p: usize },

    #[error("manifold series did not reach tail tolerance {tail_tol:e} within {limit} terms")]
    TailNotConverged { tail_tol: f64, limit: usize },

    #[error("truncation too small: need total photon cut >= {required}, got {actual}")]
    TruncationTooSmall { required: usize, actual: usize },

    #[error("operator is not Hermitian (max defect {defect:e})")]
    NonHermitianInput { defect: f64 },

    #[error("density matrix invariant violated: {0}")]
    InvalidDensityMatrix(String),

    #[error("eigendecomposition failed to converge (dimension {dim})")]
    EigenFailure { dim: usize },

    #[error("quadrature did not converge on [{lo:e}, {hi:e}] (estimated error {error:e})")]
    QuadratureNonConvergence { lo: f64, hi: f64, error: f64 },

    #[error("visibility undefined for zero mode difference (it is identically 1)")]
    ZeroModeDifference,

    #[error("closed-form visibility requires T > 0")]
    ZeroTemperature,

    #[error("recovery condition has zero effective frequency")]
    ZeroFrequency,

    #[error("joint dimension {dim} exceeds budget {budget}")]
    DimensionBudgetExceeded { dim: usize, budget: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("fiber spacing is not set")]
    MissingSpacing,
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure { .. }
                | Error::QuadratureNonConvergence { .. }
                | Error::TailNotConverged { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
