use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("filter configuration: {0}")]
    FilterConfig(String),

    #[error("cannot normalize zero signal")]
    ZeroSignal,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no gait cycles detected")]
    NoGaitCycles,

    #[error("signal of {len} samples is shorter than twice the minimum extremum separation ({min_separation} samples)")]
    SignalTooShort { len: usize, min_separation: usize },

    #[error("invalid extrema: {0}")]
    InvalidExtrema(String),

    #[error("invalid window spec: {0}")]
    InvalidWindow(String),

    #[error("window of {window} samples is longer than the signal ({len} samples)")]
    WindowTooLong { window: usize, len: usize },

    #[error("feature window needs at least 2 samples, got {0}")]
    WindowTooShort(usize),

    #[error("AUC undefined: labels contain a single class")]
    AucUndefined,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature matrix has not been standard-scaled")]
    Unscaled,

    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),

    #[error("empty search space: {0}")]
    EmptySearchSpace(String),

    #[error("no fold produced a defined AUC")]
    NoEvaluableFolds,

    #[error("cross-validation needs at least 2 subjects, got {0}")]
    TooFewSubjects(usize),

    #[error("cell (window {window_ms} ms, delay {delay_ms} ms, {model}): {source}")]
    Cell {
        window_ms: f64,
        delay_ms: f64,
        model: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the sweep cell it came from; already-wrapped
    /// errors are returned unchanged.
    pub fn in_cell(self, window_ms: f64, delay_ms: f64, kind: crate::classifiers::ModelKind) -> Error {
        match self {
            e @ Error::Cell { .. } => e,
            e => Error::Cell { window_ms, delay_ms, model: kind.short_name(), source: Box::new(e) },
        }
    }
}
