//! Exhaustive enumeration of every option selection and every container to
//! node assignment. Shares nothing with the branch-and-bound path beyond the
//! scenario types, so it can serve as an oracle for it.

use std::time::Instant;

use crate::error::SolveError;
use crate::model::{Allocation, ContainerKey, Scenario, FEASIBILITY_TOL};
use crate::report::SolveReport;

pub const BRUTE_FORCE: &str = "brute-force";

/// Leaves enumerated before [`brute_force`] refuses an instance.
pub const DEFAULT_LEAF_GUARD: f64 = 1e7;

/// Number of leaves the enumeration visits:
/// `prod_i (1 + sum_j M^(Z_ij))`.
pub fn enumeration_size(scenario: &Scenario) -> f64 {
    let m = scenario.nodes().len() as f64;
    scenario
        .providers()
        .iter()
        .map(|p| {
            1.0 + p
                .options
                .iter()
                .map(|o| m.powi(o.containers.len() as i32))
                .sum::<f64>()
        })
        .product()
}

pub fn brute_force(scenario: &Scenario) -> Result<(Allocation, SolveReport), SolveError> {
    brute_force_with_guard(scenario, DEFAULT_LEAF_GUARD)
}

pub fn brute_force_with_guard(
    scenario: &Scenario,
    guard: f64,
) -> Result<(Allocation, SolveReport), SolveError> {
    let leaves = enumeration_size(scenario);
    if leaves > guard {
        return Err(SolveError::InstanceTooLarge { leaves, guard });
    }
    let start = Instant::now();
    let mut e = Enumerator {
        scenario,
        current: Vec::new(),
        best: None,
    };
    e.providers(0);
    let alloc = e.best.map(|(_, a)| a).unwrap_or_default();
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = SolveReport::for_allocation(BRUTE_FORCE, scenario, &alloc, elapsed, true);
    Ok((alloc, report))
}

struct Enumerator<'a> {
    scenario: &'a Scenario,
    /// (provider index, option index, node index per container)
    current: Vec<(usize, usize, Vec<usize>)>,
    best: Option<(f64, Allocation)>,
}

impl Enumerator<'_> {
    fn providers(&mut self, i: usize) {
        if i == self.scenario.providers().len() {
            self.leaf();
            return;
        }
        self.providers(i + 1);
        for j in 0..self.scenario.providers()[i].options.len() {
            let z = self.scenario.providers()[i].options[j].containers.len();
            self.current.push((i, j, Vec::with_capacity(z)));
            self.containers(i, z);
            self.current.pop();
        }
    }

    fn containers(&mut self, i: usize, remaining: usize) {
        if remaining == 0 {
            self.providers(i + 1);
            return;
        }
        for m in 0..self.scenario.nodes().len() {
            self.current.last_mut().unwrap().2.push(m);
            self.containers(i, remaining - 1);
            self.current.last_mut().unwrap().2.pop();
        }
    }

    fn leaf(&mut self) {
        let s = self.scenario;
        let mut load = vec![vec![0.0; s.n_resources()]; s.nodes().len()];
        let mut value = 0.0;
        for (i, j, nodes) in &self.current {
            let o = &s.providers()[*i].options[*j];
            value += o.utility;
            for (c, &m) in o.containers.iter().zip(nodes) {
                for (acc, d) in load[m].iter_mut().zip(c.demands.iter()) {
                    *acc += d;
                }
            }
        }
        let feasible = load.iter().zip(s.nodes()).all(|(row, node)| {
            row.iter()
                .zip(node.capacities.iter())
                .all(|(used, cap)| *used <= cap + FEASIBILITY_TOL)
        });
        if !feasible || self.best.as_ref().is_some_and(|(b, _)| value <= *b) {
            return;
        }
        let mut alloc = Allocation::new();
        for (i, j, nodes) in &self.current {
            let p = &s.providers()[*i];
            let o = &p.options[*j];
            alloc.choose(p.id, o.id);
            for (c, &m) in o.containers.iter().zip(nodes) {
                alloc.place(ContainerKey::new(p.id, o.id, c.id), s.nodes()[m].id);
            }
        }
        self.best = Some((value, alloc));
    }
}
