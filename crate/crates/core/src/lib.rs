//! Option selection and container placement for multi-tenant edge clusters.
//!
//! Each service provider declares alternative configuration options, each a
//! set of containers with multi-dimensional resource demands and a utility
//! for the operator. The operator accepts at most one option per provider and
//! places every container of the accepted options on a node without exceeding
//! any node's capacity, maximizing total utility.
//!
//! - [`model`]: scenarios, allocations, objective and resource accounting
//! - [`validate`]: constraint checking
//! - [`exact`]: branch-and-bound solver and a brute-force oracle
//! - [`heuristics`]: random baseline and greedy density heuristic
//! - [`gen`]: seeded synthetic workloads
//! - [`harness`]: parameter sweeps with aggregated statistics
//! - [`io`]: JSON and CSV file formats

pub mod error;
pub mod exact;
pub mod fixtures;
pub mod gen;
pub mod harness;
pub mod heuristics;
mod instance;
pub mod io;
pub mod model;
pub mod report;
pub mod stats;
pub mod validate;

#[cfg(test)]
mod testutil;

pub use error::{GenError, HarnessError, IoError, ModelError, SolveError, StatsError};
pub use exact::{brute_force, solve_exact, SolveLimits};
pub use gen::{generate, mean_demand, option_utility, GenParams};
pub use harness::{run_sweep, SolverKind, SweepConfig, SweepKind, SweepResult, SweepRow};
pub use heuristics::{solve_greedy, solve_naive};
pub use model::{
    option_demand, resource_usage, total_utility, Allocation, ConfigOption, ContainerId,
    ContainerKey, ContainerSpec, NodeId, NodeSpec, OptionId, ProviderId, ResourceType,
    ResourceVector, Scenario, ServiceProvider,
};
pub use report::SolveReport;
pub use stats::aggregate;
pub use validate::{validate, Violation};
