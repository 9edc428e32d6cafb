use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("point {point:?} is not in the polyhedron (distance {distance:.3e})")]
    NotInPolyhedron { point: Vec<f64>, distance: f64 },

    #[error("point lies outside the affine hull of simplex {simplex} (residual {residual:.3e})")]
    OutsideAffineHull { simplex: usize, residual: f64 },

    #[error("unknown simplex {0}")]
    UnknownSimplex(usize),

    #[error("not a subcomplex: {0}")]
    NotSubcomplex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate complex: {0}")]
    DegenerateComplex(String),

    #[error("iteration cap exceeded (kappa = {kappa}, ell = {ell}): {reason}")]
    IterationCapExceeded {
        kappa: usize,
        ell: usize,
        reason: String,
    },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("partition of unity underflow at {point:?} (sum {sum:.3e}); the covering leaves this point uncovered")]
    NormalizationUnderflow { point: Vec<f64>, sum: f64 },

    #[error("weight function is not strictly positive at {point:?} (value {value})")]
    NonPositiveWeight { point: Vec<f64>, value: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
