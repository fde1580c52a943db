use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {d} out of range (supported: {min}..={max})")]
    DegreeOutOfRange { d: u32, min: u32, max: u32 },

    #[error("profile {profile} sums to {actual}, expected degree {expected}")]
    ProfileDegreeMismatch {
        profile: String,
        expected: u32,
        actual: u32,
    },

    #[error("cannot parse partition {input:?}: {reason}")]
    PartitionParse { input: String, reason: String },

    #[error("oracle budget exceeded: needs about {needed} compositions, budget is {budget}")]
    OracleBudgetExceeded { needed: u128, budget: u128 },

    #[error("a genus-0 spin curve has even parity only")]
    UnrealizableSpinStructure,

    #[error("profile {0} is not an odd partition")]
    NotOddProfile(String),

    #[error("no base case available for {0}")]
    BaseCaseUnavailable(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("A(t) is numerically singular on the evaluation window (min singular value {min_sv:e} at t = {t})")]
    SingularAtEvaluation { t: f64, min_sv: f64 },

    #[error("kernel hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("real kernel dimension {0} is odd")]
    OddRealKernel(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache error: {0}")]
    Cache(String),
}

impl Error {
    /// Stable machine-readable code, surfaced by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegreeOutOfRange { .. } => "DegreeOutOfRange",
            Error::ProfileDegreeMismatch { .. } => "ProfileDegreeMismatch",
            Error::PartitionParse { .. } => "PartitionParse",
            Error::OracleBudgetExceeded { .. } => "OracleBudgetExceeded",
            Error::UnrealizableSpinStructure => "UnrealizableSpinStructure",
            Error::NotOddProfile(_) => "NotOddProfile",
            Error::BaseCaseUnavailable(_) => "BaseCaseUnavailable",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::SingularAtEvaluation { .. } => "SingularAtEvaluation",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::OddRealKernel(_) => "OddRealKernel",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Cache(_) => "Cache",
        }
    }

    /// Process exit code: 3 for scope/budget limits, 1 for numerical
    /// hypothesis failures and cache trouble, 2 for everything the caller
    /// could fix by changing the arguments.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BaseCaseUnavailable(_) | Error::OracleBudgetExceeded { .. } => 3,
            Error::SingularAtEvaluation { .. }
            | Error::HypothesisFailed(_)
            | Error::OddRealKernel(_)
            | Error::Cache(_) => 1,
            _ => 2,
        }
    }
}
