use thiserror::Error;

/// Everything that can go wrong between reading district files and printing a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too narrow: {side} edge cell carries mass {mass:.3e} (limit 1e-4)")]
    GridTooNarrow { side: &'static str, mass: f64 },

    #[error("bin {bin} contains no grid point; grid spacing is too coarse for the bin edges")]
    EmptyBinGrid { bin: usize },

    #[error("invalid bin edges: {0}")]
    InvalidEdges(String),

    #[error("empty data set")]
    EmptyData,

    #[error("missing field {0}")]
    MissingField(&'static str),

    #[error("invalid value in field {0}")]
    InvalidField(&'static str),

    #[error("zero denominator ({0} is 0)")]
    ZeroDenominator(&'static str),

    #[error("all {0} records were excluded by cleaning")]
    AllExcluded(usize),

    #[error("degenerate range: all values equal {0}")]
    DegenerateRange(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("distribution does not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("negative divergence: {0}")]
    NegativeDivergence(f64),

    #[error("no start point improved the objective")]
    NoDescent,

    #[error("parameter {name} = {value} outside prior support [{lower}, {upper}]")]
    OutOfSupport {
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("chain {chain} stuck: post-tune acceptance rate {rate:.4} < 0.01")]
    StuckChain { chain: usize, rate: f64 },

    #[error("insufficient draws: {0}")]
    InsufficientDraws(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
