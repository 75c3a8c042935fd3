use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid frequency grid: {0}")]
    Grid(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error(
        "matrix is singular at omega = {omega:.6e} rad/s (condition estimate {condition:.3e})"
    )]
    Singular { omega: f64, condition: f64 },

    #[error("omega = {omega:.6e} rad/s outside [{lower:.6e}, {upper:.6e}]")]
    OutOfRange { omega: f64, lower: f64, upper: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error(
        "wire {wire}: segment length {segment:.4e} m is not below lambda/10 = {limit:.4e} m; \
         use at least {suggested} segments"
    )]
    SegmentTooCoarse {
        wire: usize,
        segment: f64,
        limit: f64,
        suggested: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid loss model: {0}")]
    Loss(String),

    #[error("cannot match port {port}: {reason}")]
    Synthesis { port: usize, reason: String },

    #[error(
        "state is not matched (|b|/|a| = {residual:.3e}); use the full second-derivative form"
    )]
    Unmatched { residual: f64 },

    #[error("nonphysical excitation: {0}")]
    Nonphysical(String),

    #[error("Q = 0 gives an unbounded bandwidth estimate")]
    UnboundedBandwidth,

    #[error("TARC at omega0 is {tarc:.4} which is not below the limit {limit:.4}; band is empty")]
    EmptyBand { tarc: f64, limit: f64 },

    #[error("{side} band edge is not bracketed inside the sweep")]
    Unbracketed { side: BandSide },

    #[error("only {samples} sweep samples fall inside the band; refine the sweep around omega0")]
    Undersampled { samples: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSide {
    Lower,
    Upper,
}

impl std::fmt::Display for BandSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandSide::Lower => f.write_str("lower"),
            BandSide::Upper => f.write_str("upper"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
