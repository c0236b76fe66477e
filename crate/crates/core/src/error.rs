use crate::model::JobId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Domain errors. The variant name is what the CLI reports, so keep them
/// stable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("instance must have at least one machine")]
    NoMachines,
    #[error("instance must have at least one job")]
    NoJobs,
    #[error("job {0}: weight must be positive")]
    NonPositiveWeight(JobId),
    #[error("job {0}: sizes must be nonnegative")]
    NegativeSize(JobId),
    #[error("job {0}: two-point distribution needs lo < hi")]
    TwoPointOrderViolation(JobId),
    #[error("job {0}: p_hi must lie strictly between 0 and 1 (use a deterministic size otherwise)")]
    ProbabilityOutOfRange(JobId),
    #[error("duplicate job id {0}")]
    DuplicateJobId(JobId),
    #[error("unknown job id {0}")]
    UnknownJobId(JobId),
    #[error("{two_point} two-point jobs exceed the enumeration cap of {cap}")]
    EnumerationCapExceeded { two_point: usize, cap: usize },

    #[error("SPT requested but job {0} has a stochastic size")]
    SptOnStochastic(JobId),
    #[error("WSEPT requested but job {0} has zero expected size")]
    ZeroExpectationWsept(JobId),
    #[error("custom order is not a permutation of the instance's job ids")]
    InvalidCustomOrder,

    #[error("condition fixes job {0}, which is deterministic")]
    ConditionOnDeterministicJob(JobId),
    #[error("paired instances disagree on their two-point job sets")]
    MismatchedPair,
    #[error("Monte-Carlo evaluation needs at least one sample")]
    NoSamples,

    #[error("{jobs} jobs exceed the dynamic-programming cap of {cap}")]
    DpCapExceeded { jobs: usize, cap: usize },
    #[error("bounds do not bracket the optimum: {0}")]
    BoundsDoNotBracket(String),
    #[error("granularity must be positive")]
    NonPositiveGranularity,

    #[error("knapsack instance needs at least 2 items")]
    TooFewItems,
    #[error("knapsack bound must be at least 2")]
    BoundTooSmall,
    #[error("knapsack item {index} has size {size}, outside 1..={bound}")]
    ItemSizeOutOfRange { index: usize, size: u64, bound: u64 },
    #[error("{0} items exceed the brute-force limit of 30")]
    TooManyItems(usize),
    #[error("total size must exceed B+1 for this construction")]
    TotalSizeTooSmall,
    #[error("total size exceeds 3B/2; restrict the instance first")]
    NotRestricted,
    #[error("q must lie strictly between 0 and 1")]
    InvalidQ,
    #[error("recovered count {0} is not an integer in range")]
    NonIntegerCount(String),
    #[error("optimal cost {optimal} differs from SEPT cost {sept} on instance {instance}")]
    OptimalDiffersFromSept { instance: usize, optimal: String, sept: String },
}

impl Error {
    /// Variant name, as surfaced by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NoMachines => "NoMachines",
            Error::NoJobs => "NoJobs",
            Error::NonPositiveWeight(_) => "NonPositiveWeight",
            Error::NegativeSize(_) => "NegativeSize",
            Error::TwoPointOrderViolation(_) => "TwoPointOrderViolation",
            Error::ProbabilityOutOfRange(_) => "ProbabilityOutOfRange",
            Error::DuplicateJobId(_) => "DuplicateJobId",
            Error::UnknownJobId(_) => "UnknownJobId",
            Error::EnumerationCapExceeded { .. } => "EnumerationCapExceeded",
            Error::SptOnStochastic(_) => "SptOnStochastic",
            Error::ZeroExpectationWsept(_) => "ZeroExpectationWsept",
            Error::InvalidCustomOrder => "InvalidCustomOrder",
            Error::ConditionOnDeterministicJob(_) => "ConditionOnDeterministicJob",
            Error::MismatchedPair => "MismatchedPair",
            Error::NoSamples => "NoSamples",
            Error::DpCapExceeded { .. } => "DpCapExceeded",
            Error::BoundsDoNotBracket(_) => "BoundsDoNotBracket",
            Error::NonPositiveGranularity => "NonPositiveGranularity",
            Error::TooFewItems => "TooFewItems",
            Error::BoundTooSmall => "BoundTooSmall",
            Error::ItemSizeOutOfRange { .. } => "ItemSizeOutOfRange",
            Error::TooManyItems(_) => "TooManyItems",
            Error::TotalSizeTooSmall => "TotalSizeTooSmall",
            Error::NotRestricted => "NotRestricted",
            Error::InvalidQ => "InvalidQ",
            Error::NonIntegerCount(_) => "NonIntegerCount",
            Error::OptimalDiffersFromSept { .. } => "OptimalDiffersFromSept",
        }
    }
}
