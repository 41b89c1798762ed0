use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("non-integer exponent at {pos}")]
    NonIntegerExponent { pos: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point {x} lies outside the span [{lo}, {hi}]")]
    OutOfSpan { x: f64, lo: f64, hi: f64 },
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("step budget exhausted at x = {x}")]
    StepBudget { x: f64 },
    #[error("endpoint is not semiregular")]
    NotSemiregular,
    #[error("endpoint is not regular")]
    NotRegular,
    #[error("contraction bound {bound} is not below 1")]
    Contraction { bound: f64 },
    #[error("contraction window shrank below minimum width")]
    WindowTooSmall,
    #[error("degenerate basis: |W(v,u)| = {wronskian:e}")]
    DegenerateBasis { wronskian: f64 },
    #[error("quadrature budget exceeded (estimate {value}, error {error:e})")]
    QuadratureBudget { value: String, error: f64 },
    #[error("endpoint probe indeterminate, partial sums {partial:?}")]
    ProbeIndeterminate { partial: Vec<f64> },
    #[error("endpoint limit undetermined, samples {samples:?}")]
    LimitUndetermined { samples: Vec<(f64, f64, f64)> },
    #[error("tail classification indeterminate: {table:?}")]
    TailIndeterminate { table: Vec<(f64, f64)> },
    #[error("negative weight Im(lambda - V) = {weight} at x = {x}")]
    NegativeWeight { x: f64, weight: f64 },
    #[error("Im V sign indeterminate at x = {x}")]
    SignIndeterminate { x: f64 },
    #[error("contour passes too close to a root")]
    ContourNearRoot,
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("lambda is within tolerance of an eigenvalue (|W| = {wronskian:e})")]
    NearEigenvalue { wronskian: f64 },
    #[error("disk trace lost nesting at d = {d}")]
    NestingLost { d: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
