use thiserror::Error;

use crate::verify::VerificationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot normalize a vector of norm {0:e}")]
    ZeroVector(f64),

    #[error("expected a point of S^{expected}, got {found} coordinates")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate great circle: direction is parallel to the pole")]
    DegenerateCircle,

    #[error("points {0} and {1} are antipodal (within {2:e} rad)")]
    AntipodalPair(usize, usize, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no admissible delta for arc budget {0}")]
    NoAdmissibleDelta(f64),

    #[error("no pole accepted after {tried} candidates (closest rejection: {reason})")]
    NoPole { tried: usize, reason: String },

    #[error(
        "separating series not found up to degree {max_degree}: \
         point {point} (lon {lon:.6}, tanlat {tanlat:.6}) has margin {margin:.3e}"
    )]
    SeparationFailed {
        max_degree: u32,
        point: usize,
        lon: f64,
        tanlat: f64,
        margin: f64,
    },

    #[error("series does not separate the obstacles: point {point} has side margin {margin:.3e}")]
    NotSeparated { point: usize, margin: f64 },

    #[error("spin precondition violated: last component {value:.3e} at sample {sample:?}")]
    AxisProximity { sample: Vec<f64>, value: f64 },

    #[error("jacobian is rank deficient at {at:?} (normal length {norm:.3e})")]
    RankDeficient { at: Vec<f64>, norm: f64 },

    #[error("frame does not satisfy the semicircle margin: alpha = {0:.6}")]
    AlphaNonPositive(f64),

    #[error("cannot certify at this resolution (epsilon {epsilon:e})")]
    CannotCertify {
        epsilon: f64,
        report: Box<VerificationReport>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
