use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("axis must be a unit vector (norm {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("matrix is not a rotation (orthogonality defect {defect:e}, det {det})")]
    NotARotation { defect: f64, det: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token {0:?}")]
    UnexpectedToken(String),
    #[error("invalid numeric literal {0:?}")]
    InvalidNumber(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("identifier {0:?} is not available in this context")]
    IdentifierNotInContext(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{function} undefined at argument {arg}")]
    Function { function: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
    #[error("invariant {invariant} is not differentiable at a zero gradient")]
    NonSmooth { invariant: &'static str },
    #[error("invariant {invariant} is unavailable")]
    Unavailable { invariant: &'static str },
    #[error("multiplier lambda must be positive, got {value}")]
    NonPositiveMultiplier { value: f64 },
    #[error("state is degenerate: {reason}")]
    Degenerate { reason: String },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("coefficient {field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepresentationError {
    #[error("degenerate configuration (scaled Gram determinant {gram:e})")]
    DegenerateConfiguration { gram: f64 },
    #[error("residual {residual:e} exceeds {threshold:e}; value is not in the representation span")]
    ResidualTooLarge { residual: f64, threshold: f64 },
    #[error("frame is not orthonormal (defect {defect:e})")]
    NonOrthonormalFrame { defect: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("search domain is empty: {0}")]
    EmptyDomain(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step {dt} violates the stability limit {limit} ({reason})")]
    Cfl { dt: f64, limit: f64, reason: &'static str },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid scenario file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expression {field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("entropy production needs at least two stored states")]
    InsufficientHistory,
}
