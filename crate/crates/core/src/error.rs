use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(f64),

    #[error("{what} = {value} is out of range ({expected})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("the measure has an atomic part with mass {0}; a pure density is required")]
    AtomicPart(f64),

    #[error("point is not a critical point of the Fréchet functional: |m| = {measured:e} exceeds {tolerance:e}")]
    NotCritical { measured: f64, tolerance: f64 },

    #[error("the measure has no unique Fréchet mean ({argmins} global argmins)")]
    NotUnique { argmins: usize },

    #[error(
        "uniqueness verdicts disagree: minimizer reports {argmins} argmin(s) (runner-up gap {gap:?}), \
         certificate margin is {margin:e}"
    )]
    VerdictMismatch {
        argmins: usize,
        gap: Option<f64>,
        margin: f64,
    },

    #[error("gap function vanishes at more than one point (second zero near {0})")]
    MultipleZeros(f64),

    #[error("gap function takes the negative value {value:e} at {theta}")]
    NegativeGap { theta: f64, value: f64 },

    #[error("criterion precondition violated: {0}")]
    Criterion(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown density spec `{0}`")]
    UnknownSpec(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("output error: {0}")]
    Output(String),
}

pub(crate) fn check_finite(t: f64) -> Result<f64> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::NonFinite(t))
    }
}
