use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("no records")]
    EmptyInput,

    #[error("no records for year {0}")]
    GapInYears(i32),

    #[error("negative export value for {reporter}/{hs_code} in {year}")]
    NegativeValue {
        year: i32,
        reporter: String,
        hs_code: String,
    },

    #[error("no panel cell for {country}/{commodity} in {year}")]
    MissingCell {
        year: i32,
        country: String,
        commodity: String,
    },

    #[error("world trade is zero in {0}")]
    ZeroWorldTrade(i32),

    #[error("window {start}..={end} is outside the series years")]
    WindowOutOfRange { start: i32, end: i32 },

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("series has zero variance")]
    ConstantSeries,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("innovation variance is zero")]
    DegenerateVariance,

    #[error("series is still non-stationary after {0} differences")]
    StillNonStationary(usize),

    #[error("every candidate model failed to fit")]
    AllFitsFailed,

    #[error("ljung-box lag {to_lag} must exceed p+q={params} and be below the residual count {n}")]
    InsufficientLag {
        to_lag: usize,
        params: usize,
        n: usize,
    },

    #[error("forecast horizon must be at least 1")]
    InvalidHorizon,

    #[error("actual value is zero")]
    ZeroActual,

    #[error("empty input")]
    EmptyVector,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{category}: {stage} failed: {source}")]
    Stage {
        category: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the pipeline category and stage it came from.
    pub fn at(self, category: impl Into<String>, stage: &'static str) -> Error {
        Error::Stage {
            category: category.into(),
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// failure while computing.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::MalformedRow { .. }
            | Error::MissingColumn(_)
            | Error::EmptyInput
            | Error::GapInYears(_)
            | Error::NegativeValue { .. }
            | Error::WindowOutOfRange { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidHorizon => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
