use thiserror::Error;

/// Everything that can go wrong inside the gauge model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("sensor saturated: ADC code {code} reads at or above the supply voltage")]
    Saturation { code: u32 },

    #[error("degenerate fit: all resistances are identical")]
    DegenerateFit,

    #[error("insufficient data: need at least {need} values, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("both groups have zero spread but different means; t is unbounded")]
    InfiniteSeparation,

    #[error("no tabulated critical value for alpha = {alpha}, df = {df}")]
    TableRange { alpha: f64, df: usize },

    #[error("window error: {0}")]
    Window(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}
