use thiserror::Error;

use crate::scenario::Scenario;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("party count {0} is below the minimum of 2")]
    TooFewParties(usize),
    #[error("party count {n} exceeds the supported maximum of {max}")]
    TooManyParties { n: usize, max: usize },
    #[error("events belong to different scenarios ({0} vs {1})")]
    ScenarioMismatch(Scenario, Scenario),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("cannot parse event token `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("duplicate event {0}")]
    DuplicateEvent(String),
    #[error("graph has {size} vertices, exceeding the limit of {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is not vertex transitive")]
    NotVertexTransitive,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("family failed verification: {0}")]
    FamilyInvalid(String),
    #[error("solver stopped after {iterations} iterations with the optimum bracketed in [{lower}, {upper}]")]
    NotConverged {
        lower: f64,
        upper: f64,
        iterations: usize,
    },
}
