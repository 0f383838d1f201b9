//! Dense, index-based view of a [`Scenario`] shared by the solvers.

use crate::model::{Allocation, ContainerKey, Scenario, FEASIBILITY_TOL};

pub(crate) struct IndexedOption {
    pub utility: f64,
    /// Row-major `containers × resources`.
    pub demands: Vec<f64>,
    pub aggregate: Vec<f64>,
    pub n_containers: usize,
}

impl IndexedOption {
    pub fn container(&self, z: usize, l: usize) -> &[f64] {
        &self.demands[z * l..(z + 1) * l]
    }
}

pub(crate) struct Instance<'a> {
    pub scenario: &'a Scenario,
    pub n_res: usize,
    pub n_nodes: usize,
    /// Row-major `nodes × resources`.
    pub capacity: Vec<f64>,
    pub total_capacity: Vec<f64>,
    pub options: Vec<Vec<IndexedOption>>,
}

impl<'a> Instance<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let n_res = scenario.n_resources();
        let capacity = scenario
            .nodes()
            .iter()
            .flat_map(|n| n.capacities.iter())
            .collect();
        let options = scenario
            .providers()
            .iter()
            .map(|p| {
                p.options
                    .iter()
                    .map(|o| IndexedOption {
                        utility: o.utility,
                        demands: o.containers.iter().flat_map(|c| c.demands.iter()).collect(),
                        aggregate: o.demand().as_slice().to_vec(),
                        n_containers: o.containers.len(),
                    })
                    .collect()
            })
            .collect();
        Self {
            scenario,
            n_res,
            n_nodes: scenario.nodes().len(),
            capacity,
            total_capacity: scenario.total_capacity().as_slice().to_vec(),
            options,
        }
    }

    pub fn n_providers(&self) -> usize {
        self.options.len()
    }

    pub fn node_capacity(&self, m: usize) -> &[f64] {
        &self.capacity[m * self.n_res..(m + 1) * self.n_res]
    }

    /// Converts an index-level solution into an id-level [`Allocation`].
    /// `nodes[i]` lists the node of each container of provider `i`'s option.
    pub fn to_allocation(&self, choice: &[Option<usize>], nodes: &[Vec<usize>]) -> Allocation {
        let mut alloc = Allocation::new();
        for (i, (c, placed)) in choice.iter().zip(nodes).enumerate() {
            let Some(j) = *c else { continue };
            let p = &self.scenario.providers()[i];
            let o = &p.options[j];
            alloc.choose(p.id, o.id);
            for (container, &m) in o.containers.iter().zip(placed) {
                alloc.place(
                    ContainerKey::new(p.id, o.id, container.id),
                    self.scenario.nodes()[m].id,
                );
            }
        }
        alloc
    }
}

/// Residual capacity of every node, row-major `nodes × resources`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Residual {
    pub n_res: usize,
    pub free: Vec<f64>,
}

impl Residual {
    pub fn full(inst: &Instance<'_>) -> Self {
        Self {
            n_res: inst.n_res,
            free: inst.capacity.clone(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.free.len() / self.n_res
    }

    pub fn node(&self, m: usize) -> &[f64] {
        &self.free[m * self.n_res..(m + 1) * self.n_res]
    }

    pub fn fits(&self, m: usize, demand: &[f64]) -> bool {
        self.node(m)
            .iter()
            .zip(demand)
            .all(|(free, d)| *d <= free + FEASIBILITY_TOL)
    }

    pub fn take(&mut self, m: usize, demand: &[f64]) {
        let l = self.n_res;
        for (free, d) in self.free[m * l..(m + 1) * l].iter_mut().zip(demand) {
            *free -= d;
        }
    }
}
