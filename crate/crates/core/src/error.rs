use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh size h = {h} too coarse: {reason}")]
    MeshTooCoarse { h: f64, reason: String },

    #[error("meshing failed near ({x:.6}, {y:.6}): {reason}")]
    Meshing { x: f64, y: f64, reason: String },

    #[error("degenerate element {0}")]
    DegenerateElement(usize),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("non-finite refractive index value at ({x}, {y}, {z})")]
    NonFinite { x: f64, y: f64, z: f64 },

    #[error("mesh has no interior degrees of freedom")]
    EmptyInterior,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerically singular matrix: {0}")]
    SingularMatrix(String),

    #[error("eigen solver did not converge after {restarts} restarts ({converged}/{wanted} converged, worst residual {worst:e})")]
    NoConvergence {
        restarts: usize,
        converged: usize,
        wanted: usize,
        worst: f64,
    },

    #[error("search lower bound unavailable: {0}")]
    BoundUnavailable(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("no root found below {0}")]
    NoRoot(f64),

    #[error("feature error: {0}")]
    Feature(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("zero eigenfunction")]
    ZeroEigenfunction,

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that originate in the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_numerical(),
            Error::SingularMatrix(_)
            | Error::NoConvergence { .. }
            | Error::NoRoot(_)
            | Error::ZeroEigenfunction
            | Error::DegenerateElement(_)
            | Error::Meshing { .. }
            | Error::EmptyInterior
            | Error::Fit(_) => true,
            _ => false,
        }
    }

    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
