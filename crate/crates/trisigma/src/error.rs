use thiserror::Error;

/// Errors produced by the numerical evaluators and certifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested value diverges (e.g. K(k) as k -> 1).
    #[error("divergence: {0}")]
    Divergence(String),

    /// The evaluation point is too close to a singularity for this method;
    /// the caller should switch to an asymptotic or closed-form route.
    #[error("near-singular input: {0}")]
    NearSingular(String),

    /// The input is outside the proven validity range of an expansion.
    #[error("outside validity range: {0}")]
    OutOfValidity(String),

    /// The requested tolerance cannot be met; carries a best-effort value
    /// and the error bound that was actually achieved.
    #[error("precision not achievable: requested {requested:e}, achieved {achieved:e}")]
    Precision {
        requested: f64,
        achieved: f64,
        best_effort: f64,
    },

    /// A direction in which the leading weight factor vanishes.
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    /// Root bracketing failed (no sign change on the search interval).
    #[error("bracket error: {0}")]
    Bracket(String),

    /// A quadrature did not converge within its subdivision budget.
    #[error("quadrature did not converge: estimated error {0:e}")]
    QuadratureNonConvergence(f64),

    /// Internal consistency violated; indicates a bug, not bad input.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Too many grid points had to be skipped for the run to be conclusive.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// I/O failure while writing a report or plot.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
