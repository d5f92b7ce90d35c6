use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point is too close to (or antipodal to) a pole for the requested
    /// quantity to be defined.
    PoleCoincidence { distance: f64 },
    /// Exclusion removed every sample point.
    EmptySample,
    /// An argument is outside the domain of the function.
    Domain { what: &'static str, value: f64 },
    /// The conformal factor `W` is not positive.
    NonpositiveW(f64),
    /// The fibre length `f` is not positive.
    NonpositiveF(f64),
    /// Metric determinant below the singularity threshold.
    SingularMetric { determinant: f64 },
    /// A quadrature sphere encloses more than one pole.
    QuadratureOverlap,
    /// The sampled geodesic graph has more than one component.
    DisconnectedGraph { unreachable: usize },
    /// A parameter search ran past its cap.
    NotFound { what: &'static str },
    /// Heisenberg elements with different moduli were combined.
    ModulusMismatch { left: u32, right: u32 },
    /// Exhaustive enumeration requested beyond the supported size.
    TooLarge { k: u32, max: u32 },
    /// The conformal perturbation failed to be positive for every tried
    /// amplitude.
    ProfileTooLarge,
    /// No admissible fibre scale exists.
    Unsatisfiable,
    /// A parameter violates its documented precondition.
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PoleCoincidence { distance } => {
                write!(f, "point coincides with a pole (distance {distance:e})")
            }
            Error::EmptySample => f.write_str("exclusion radius removed every sample point"),
            Error::Domain { what, value } => write!(f, "{what} outside its domain: {value}"),
            Error::NonpositiveW(w) => write!(f, "conformal factor W must be positive, got {w}"),
            Error::NonpositiveF(v) => write!(f, "fibre length must be positive, got {v}"),
            Error::SingularMetric { determinant } => {
                write!(f, "metric is singular (determinant {determinant:e})")
            }
            Error::QuadratureOverlap => f.write_str("quadrature sphere contains a second pole"),
            Error::DisconnectedGraph { unreachable } => {
                write!(f, "geodesic graph is disconnected ({unreachable} unreachable vertices)")
            }
            Error::NotFound { what } => write!(f, "search for {what} exceeded its cap"),
            Error::ModulusMismatch { left, right } => {
                write!(f, "Heisenberg moduli differ: {left} vs {right}")
            }
            Error::TooLarge { k, max } => {
                write!(f, "k = {k} exceeds the exhaustive enumeration limit {max}")
            }
            Error::ProfileTooLarge => {
                f.write_str("conformal perturbation is not positive for any admissible amplitude")
            }
            Error::Unsatisfiable => f.write_str("no admissible fibre scale"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
