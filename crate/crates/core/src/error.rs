use thiserror::Error;

/// Library-wide error type.
///
/// Scalar domain violations and structured parameter problems are kept
/// apart so callers can map them onto different exit paths: the first
/// class is a bad point inside an otherwise valid run, the second is a
/// misconfigured run.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A scalar argument is outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structured input (transform spec, fading parameters, combiner
    /// description, quadrature settings) fails validation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A numerator pole from the left family collides with one from the
    /// right family, so no separating contour exists. The suggested fix
    /// is a small perturbation of the offending parameter.
    #[error(
        "coincident pole families: left pole at {left} and right pole at {right} \
         are separated by {gap:e}; perturb a parameter by ~1e-4 to split them"
    )]
    CoincidentPoles { left: f64, right: f64, gap: f64 },

    /// The integrand decays in no direction that a contour can exploit.
    #[error("no convergent contour sector: a*={a_star}, delta={delta}")]
    NoConvergentSector { a_star: f64, delta: f64 },

    /// A series did not meet its tolerance within the term budget.
    #[error("series failed to converge within {terms} terms (last relative step {last_step:e})")]
    NonConvergent { terms: usize, last_step: f64 },

    /// A quadrature or contour evaluation could not meet its error budget.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested quantity is a divergent integral for these inputs.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// A user-supplied joint MGF callable violated its contract.
    #[error("MGF contract violation: {0}")]
    MgfContract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
