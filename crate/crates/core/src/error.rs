use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Probability mass in the top of the truncated basis exceeds the tolerance.
    Truncation {
        dim: usize,
        tail_mass: f64,
        tol: f64,
    },
    /// Norm lost by a truncated unitary exceeds the tolerance.
    Leakage {
        leaked: f64,
        tol: f64,
    },
    /// Operands live in spaces of different dimension.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A state with zero norm was given where a normalizable one is required.
    ZeroState,
    InvalidParams(&'static str),
    /// The outcome grid does not capture enough of the outcome density.
    GridCoverage {
        captured: f64,
    },
    /// A Wigner grid holds too little of the quasi-probability.
    PhaseSpaceCoverage {
        mass: f64,
    },
    /// Successive grid refinements did not agree within tolerance.
    NotConverged {
        change: f64,
        tol: f64,
    },
    /// A matrix failed a Hermiticity, trace or positivity check.
    InvalidDensityMatrix(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Truncation {
                dim,
                tail_mass,
                tol,
            } => write!(
                f,
                "truncation at dim={dim} leaves tail mass {tail_mass:e} (tolerance {tol:e})"
            ),
            Error::Leakage { leaked, tol } => {
                write!(
                    f,
                    "truncated unitary leaked norm {leaked:e} (tolerance {tol:e})"
                )
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ZeroState => write!(f, "state has zero norm"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::GridCoverage { captured } => write!(
                f,
                "outcome grid captures probability {captured:.8} (need at least 1 - 1e-4)"
            ),
            Error::PhaseSpaceCoverage { mass } => write!(
                f,
                "Wigner grid holds integrated mass {mass:.6} (need at least 0.999); widen the window"
            ),
            Error::NotConverged { change, tol } => write!(
                f,
                "grid refinement did not converge: max change {change:e} > {tol:e}"
            ),
            Error::InvalidDensityMatrix(msg) => write!(f, "invalid density matrix: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
