use thiserror::Error;

/// Errors surfaced by the library proper. Precondition violations on plain
/// numeric arguments (`t > 0`, `x >= 1`, ...) panic instead; these variants
/// cover conditions a caller can meaningfully react to.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-rearrangeable tail: step function has tail value {0} > 0")]
    NonRearrangeableTail(f64),

    #[error("adaptive quadrature did not converge within the refinement cap")]
    QuadratureNonConvergence,

    #[error("infeasible sparse family: {0}")]
    InfeasibleSparse(String),

    #[error("grid function is not aligned to the dyadic mesh: {0}")]
    MisalignedGrid(String),

    #[error("empty support")]
    EmptySupport,

    #[error("slope bound validation failed for phi: {0}")]
    SlopeBoundViolation(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
