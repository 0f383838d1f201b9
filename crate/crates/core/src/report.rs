use serde::{Deserialize, Serialize};

use crate::model::{resource_usage, total_utility, Allocation, ResourceVector, Scenario};

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver_name: String,
    pub objective: f64,
    /// Objective as a percentage of the number of providers, the largest
    /// objective attainable when every utility is at most 1.
    pub utility_pct: f64,
    pub usage_fraction: ResourceVector,
    pub runtime_ms: f64,
    pub proven_optimal: bool,
}

impl SolveReport {
    /// Builds a report whose objective and usage are recomputed from `alloc`.
    ///
    /// Panics if `alloc` is not a valid allocation for `scenario`; solvers only
    /// call this with allocations they constructed.
    pub fn for_allocation(
        solver_name: &str,
        scenario: &Scenario,
        alloc: &Allocation,
        runtime_ms: f64,
        proven_optimal: bool,
    ) -> Self {
        let objective = total_utility(scenario, alloc).expect("solver produced dangling ids");
        let usage_fraction =
            resource_usage(scenario, alloc).expect("solver produced an infeasible allocation");
        let n = scenario.providers().len();
        let utility_pct = if n == 0 {
            0.0
        } else {
            objective / n as f64 * 100.0
        };
        Self {
            solver_name: solver_name.to_string(),
            objective,
            utility_pct,
            usage_fraction,
            runtime_ms,
            proven_optimal,
        }
    }
}
