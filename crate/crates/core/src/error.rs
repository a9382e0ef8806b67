use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Adaptive quadrature hit its depth or interval budget.
    #[error(
        "quadrature did not converge in {context}: estimate {value:e} +/- {error:e}, \
         worst subinterval [{worst_lo:e}, {worst_hi:e}]"
    )]
    Quadrature {
        context: &'static str,
        value: f64,
        error: f64,
        worst_lo: f64,
        worst_hi: f64,
    },

    /// A series or continued fraction failed to reach its target tolerance.
    #[error("{func} did not converge after {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },

    /// The function values at the bracket ends have the same sign.
    #[error("no sign change on [{lo:e}, {hi:e}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// An expectation is infinite for the requested arguments.
    #[error("{quantity} diverges: {detail}")]
    Divergent { quantity: &'static str, detail: String },

    /// The caller violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}
