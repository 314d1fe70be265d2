use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature order must be at least {min}, got {order}")]
    InvalidOrder { order: usize, min: usize },

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("coefficient is not positive on its domain: eps({x}) = {value}")]
    NonPositiveCoefficient { x: f64, value: f64 },

    #[error("invalid coefficient profile: {0}")]
    InvalidProfile(String),

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("domain mismatch: quadrature covers [{quad_lo}, {quad_hi}], coefficient lives on [{coeff_lo}, {coeff_hi}]")]
    DomainMismatch {
        quad_lo: f64,
        quad_hi: f64,
        coeff_lo: f64,
        coeff_hi: f64,
    },

    #[error("adaptive refinement exceeded {max_depth} levels on panel [{lo}, {hi}]")]
    RefinementDepth { lo: f64, hi: f64, max_depth: usize },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix is singular to working precision (pivot {pivot:e}, norm {norm:e})")]
    Singular { pivot: f64, norm: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("right-hand side is zero")]
    ZeroRhs,

    #[error("GMRES did not reach tolerance {tol:e} in {iterations} iterations (relative residual {residual:e})")]
    GmresCap {
        tol: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid exponent '{0}' (expected 1, 2 or inf)")]
    InvalidExponent(String),

    #[error("ball B({center}, {radius}) is not contained in [{lo}, {hi}]")]
    BallOutsideDomain {
        center: f64,
        radius: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
