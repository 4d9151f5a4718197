use thiserror::Error;

/// Errors raised by constructions, evaluations and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry rejected: {0}")]
    NonFiniteEntry(String),

    #[error("numerically singular matrix (rcond {rcond:.3e} below {threshold:.3e}) in {context}")]
    NumericallySingular {
        context: String,
        rcond: f64,
        threshold: f64,
    },

    #[error("singular leading coefficient in {context} (rcond {rcond:.3e})")]
    SingularLeadingCoefficient { context: String, rcond: f64 },

    #[error("evaluation at excluded point lambda = {lambda} ({context})")]
    EvaluationAtExcludedPoint {
        lambda: num_complex::Complex64,
        context: String,
    },

    #[error("could not draw a sample point away from excluded points after {0} attempts")]
    ExcludedPointUnavoidable(usize),

    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),

    #[error("side condition violated: residual {residual:.3e} exceeds {tol:.3e} at lambda = {lambda}")]
    SideConditionViolated {
        lambda: num_complex::Complex64,
        residual: f64,
        tol: f64,
    },

    #[error("row polynomial degree {got} too high, must be below {bound}")]
    DegreeTooHigh { got: i64, bound: i64 },

    #[error("diagonal degree violation in column {col}: deg P[{row},{col}] = {off} >= deg P[{col},{col}] = {diag}")]
    DiagonalDegreeViolation {
        col: usize,
        row: usize,
        off: String,
        diag: String,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("step guard exceeded after {steps} reduction steps (bound {bound}): {context}")]
    NonTerminating {
        steps: usize,
        bound: usize,
        context: String,
    },

    #[error("eigenvalue iteration failed to converge within {0} sweeps")]
    NonConvergence(usize),

    #[error("determinant is numerically zero; the matrix polynomial is singular")]
    DegenerateDeterminant,

    #[error("corner block is not polynomial: interpolation residual {residual:.3e} at degree bound {bound}")]
    NotPolynomial { residual: f64, bound: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
}

impl Error {
    /// Peel stage wrappers to the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
