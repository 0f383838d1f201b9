use std::path::PathBuf;

use thiserror::Error;

use crate::model::{ContainerId, NodeId, OptionId, ProviderId};
use crate::validate::Violation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("resource amount {0} is negative or not finite")]
    BadAmount(f64),
    #[error("scenario declares no resource types")]
    NoResourceTypes,
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate provider id {0}")]
    DuplicateProvider(ProviderId),
    #[error("provider {provider}: duplicate option id {option}")]
    DuplicateOption {
        provider: ProviderId,
        option: OptionId,
    },
    #[error("provider {provider} option {option}: duplicate container id {container}")]
    DuplicateContainer {
        provider: ProviderId,
        option: OptionId,
        container: ContainerId,
    },
    #[error("node {node}: capacities has {found} entries, expected {expected}")]
    NodeLength {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    #[error("node {0}: every capacity must be strictly positive")]
    NonPositiveCapacity(NodeId),
    #[error("provider {provider} option {option} container {container}: demands has {found} entries, expected {expected}")]
    ContainerLength {
        provider: ProviderId,
        option: OptionId,
        container: ContainerId,
        expected: usize,
        found: usize,
    },
    #[error("provider {provider} option {option}: utility {utility} outside [0, 1]")]
    UtilityRange {
        provider: ProviderId,
        option: OptionId,
        utility: f64,
    },
    #[error("provider {provider} option {option}: an option needs at least one container")]
    EmptyOption {
        provider: ProviderId,
        option: OptionId,
    },
    #[error("unknown provider {0}")]
    UnknownProvider(ProviderId),
    #[error("provider {provider} has no option {option}")]
    UnknownOption {
        provider: ProviderId,
        option: OptionId,
    },
    #[error("allocation is invalid ({} violation(s))", .0.len())]
    InvalidAllocation(Vec<Violation>),
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameter {field}: {reason}")]
    Param { field: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "instance too large to enumerate: {leaves:.3e} leaves exceeds the guard of {guard:.3e}"
    )]
    InstanceTooLarge { leaves: f64, guard: f64 },
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot aggregate an empty sample")]
    EmptySample,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: schema error at line {line}, column {column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unsupported version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("{path}: line {line}: field {field}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        field: String,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
