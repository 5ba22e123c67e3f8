use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid compressor `{id}`: {reason}")]
    InvalidCompressor { id: String, reason: String },

    #[error("invalid fleet: {0}")]
    InvalidFleet(String),

    #[error("invalid sequencing order: {0}")]
    InvalidOrder(String),

    #[error(
        "load {load} kW is outside the operating window of compressor `{id}` \
         (0 or [{q_min}, {q_max}] kW)"
    )]
    OutOfWindow {
        id: String,
        load: f64,
        q_min: f64,
        q_max: f64,
    },

    #[error("negative demand {0} kW")]
    NegativeDemand(f64),

    #[error("demand {demand} kW exceeds fleet capacity {capacity} kW (shortfall {shortfall} kW)")]
    InfeasibleDemand {
        demand: f64,
        capacity: f64,
        shortfall: f64,
    },

    #[error(
        "stage {stage} cannot be served: cumulative demand {required} kW exceeds \
         the most cooling the fleet can deliver by then ({available} kW)"
    )]
    InfeasibleStage {
        stage: usize,
        required: f64,
        available: f64,
    },

    #[error(
        "stage {stage} needs {needed} kW of carried surplus but the surplus cap is {cap} kW; \
         raise the cap"
    )]
    SurplusCapExceeded { stage: usize, needed: f64, cap: f64 },

    #[error("search space of {size} exceeds the limit of {limit}")]
    SearchTooLarge { size: f64, limit: f64 },

    #[error("{count} compressors is too many for permutation enumeration (limit {limit})")]
    TooManyCompressors { count: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid load profile: {0}")]
    InvalidProfile(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by demand the fleet cannot serve.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleDemand { .. }
                | Error::InfeasibleStage { .. }
                | Error::SurplusCapExceeded { .. }
        )
    }

    /// True for errors raised while reading or decoding input data.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Parse { .. }
                | Error::InvalidCompressor { .. }
                | Error::InvalidFleet(_)
                | Error::InvalidProfile(_)
        )
    }
}
