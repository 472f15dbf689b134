use thiserror::Error;

/// What went wrong while reading an expression or form literal.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected token {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("{name} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("exponent must be a constant")]
    NonConstantExponent,
    #[error("differential {0:?} is not allowed in a scalar expression")]
    DifferentialInScalar(String),
    #[error("cannot add forms of degree {0} and {1}")]
    DegreeMismatch(usize, usize),
    #[error("{0}")]
    Form(String),
}

/// Position-annotated parse failure. `offset` is a byte offset into the source.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error("invalid chart: {0}")]
    Chart(String),

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("contact condition needs an odd dimension >= 3, chart has dimension {0}")]
    EvenDimension(usize),

    #[error("degenerate at {point:?}: |coefficient| = {value:e}")]
    Degenerate { point: Vec<f64>, value: f64 },

    #[error("pointwise solve failed ({label}): residual {residual:e}")]
    Solver { label: String, residual: f64 },

    #[error("homogeneity failure: |L_v Omega - Omega| = {0:e}")]
    Homogeneity(f64),

    #[error("transversality failure at {point:?}: pairing {value:e}")]
    Transversality { point: Vec<f64>, value: f64 },

    #[error("vector field is not invariant under the scaling action: deviation {0:e}")]
    NotInvariant(f64),

    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("function is not 1-periodic in the fiber coordinate: |g(x,0) - g(x,1)| = {0:e}")]
    NotPeriodic(f64),

    #[error("non-positive value {value} at {point:?}")]
    NonPositive { point: Vec<f64>, value: f64 },

    #[error("start {index} is not periodic: {detail}")]
    NonPeriodicStart { index: usize, detail: String },

    #[error("point {0:?} lies outside every section domain")]
    OutsideSections(Vec<f64>),

    #[error("sections disagree at {point:?} by {value:e}")]
    SectionOverlap { point: Vec<f64>, value: f64 },

    #[error("fibration has no global section")]
    NoGlobalSection,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
