use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested energy sits at (or numerically on) the bottom of the
    /// well, where the orbit collapses to the equilibrium point.
    #[error("degenerate orbit: energy {energy} is not above the minimum {e_min}")]
    DegenerateOrbit { energy: f64, e_min: f64 },

    #[error("singular evaluation at x = {x}: {reason}")]
    Singular { x: f64, reason: &'static str },

    #[error("quadrature did not reach tolerance {tolerance:e}: estimate {estimate}, error estimate {error_estimate:e}")]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        tolerance: f64,
    },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("inconsistent initial data: {0}")]
    Inconsistent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction rejected at r = {radius}: {reason}")]
    Construction { radius: f64, reason: String },

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
