use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Display strings start with a stable lowercase tag (`"incomplete matrix"`,
/// `"unknown model"`, ...) that the CLI also reports as the error `kind`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("incomplete matrix: missing cell ({model_id}, {text_id})")]
    IncompleteMatrix { model_id: String, text_id: String },

    #[error("duplicate id: {0}")]
    DuplicateId(String),

    #[error("invalid cell ({model_id}, {text_id}): {reason}")]
    InvalidCell {
        model_id: String,
        text_id: String,
        reason: String,
    },

    #[error("invalid model {model_id}: {reason}")]
    InvalidModel { model_id: String, reason: String },

    #[error("unknown model: {0}")]
    UnknownModel(String),

    #[error("bad header in {path}: {reason}")]
    BadHeader { path: PathBuf, reason: String },

    #[error("empty matrix: {0}")]
    EmptyMatrix(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("duplicate member: {0}")]
    DuplicateMember(String),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid k_max: {k_max} (pool has {pool} models)")]
    InvalidKMax { k_max: usize, pool: usize },

    #[error("pool exceeds brute-force limit: {pool} models > {limit}")]
    PoolTooLarge { pool: usize, limit: usize },

    #[error("insufficient points: {got} < {needed}")]
    InsufficientPoints { got: usize, needed: usize },

    #[error("degenerate abscissae: all budgets equal {0}")]
    DegenerateAbscissae(f64),

    #[error("infeasible start: loss {loss} <= floor {floor}")]
    InfeasibleStart { loss: f64, floor: f64 },

    #[error("invalid budget: {0}")]
    InvalidBudget(f64),

    #[error("invalid fit config: {0}")]
    InvalidFitConfig(String),

    #[error("insufficient pool: {0} models, need at least 2")]
    InsufficientPool(usize),

    #[error("invalid synth config: {0}")]
    InvalidSynthConfig(String),

    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),

    #[error("invalid frontier file {path}: {reason}")]
    InvalidFrontierFile { path: PathBuf, reason: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::IncompleteMatrix { .. } => "incomplete matrix",
            Error::DuplicateId(_) => "duplicate id",
            Error::InvalidCell { .. } => "invalid cell",
            Error::InvalidModel { .. } => "invalid model",
            Error::UnknownModel(_) => "unknown model",
            Error::BadHeader { .. } => "bad header",
            Error::EmptyMatrix(_) => "empty matrix",
            Error::EmptyEnsemble => "empty ensemble",
            Error::DuplicateMember(_) => "duplicate member",
            Error::EmptyPointSet => "empty point set",
            Error::InvalidPoint(_) => "invalid point",
            Error::InvalidKMax { .. } => "invalid k_max",
            Error::PoolTooLarge { .. } => "pool exceeds brute-force limit",
            Error::InsufficientPoints { .. } => "insufficient points",
            Error::DegenerateAbscissae(_) => "degenerate abscissae",
            Error::InfeasibleStart { .. } => "infeasible start",
            Error::InvalidBudget(_) => "invalid budget",
            Error::InvalidFitConfig(_) => "invalid fit config",
            Error::InsufficientPool(_) => "insufficient pool",
            Error::InvalidSynthConfig(_) => "invalid synth config",
            Error::InvalidCurve(_) => "invalid curve parameters",
            Error::InvalidFrontierFile { .. } => "invalid frontier file",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
