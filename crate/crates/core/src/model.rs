//! Problem instances, allocations and the accounting defined over them.
//!
//! A [`Scenario`] is immutable once built: every constructor path goes through
//! [`Scenario::new`], which enforces the shape invariants the solvers rely on
//! (matching vector lengths, unique ids, positive capacities, utilities in
//! `[0, 1]`, non-empty options).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Absolute slack allowed when comparing a node load against its capacity.
pub const FEASIBILITY_TOL: f64 = 1e-9;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Edge node identifier.
    NodeId
);
id_type!(
    /// Service provider (tenant) identifier.
    ProviderId
);
id_type!(
    /// Configuration option identifier, unique within its provider.
    OptionId
);
id_type!(
    /// Container identifier, unique within its option.
    ContainerId
);

/// Per-resource-type quantities. Every amount is finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ResourceVector(Vec<f64>);

impl ResourceVector {
    pub fn new(amounts: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(bad) = amounts.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(ModelError::BadAmount(*bad));
        }
        Ok(Self(amounts))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    pub(crate) fn add_assign(&mut self, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += b;
        }
    }
}

impl TryFrom<Vec<f64>> for ResourceVector {
    type Error = ModelError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ResourceVector> for Vec<f64> {
    fn from(v: ResourceVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ResourceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceType {
    pub name: String,
    pub unit: String,
}

impl ResourceType {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    /// CPU (core-time) and RAM (GB), the two types used by the synthetic workloads.
    pub fn cpu_ram() -> Vec<ResourceType> {
        vec![Self::new("CPU", "cores"), Self::new("RAM", "GB")]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub capacities: ResourceVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerSpec {
    pub id: ContainerId,
    pub demands: ResourceVector,
}

/// One way a provider can run its service: a set of containers that must all
/// be placed together, worth `utility` to the operator when accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigOption {
    pub id: OptionId,
    pub utility: f64,
    pub containers: Vec<ContainerSpec>,
}

impl ConfigOption {
    /// Componentwise sum of the container demands.
    pub fn demand(&self) -> ResourceVector {
        option_demand(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceProvider {
    pub id: ProviderId,
    pub options: Vec<ConfigOption>,
}

impl ServiceProvider {
    pub fn option(&self, id: OptionId) -> Option<&ConfigOption> {
        self.options.iter().find(|o| o.id == id)
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    resource_types: Vec<ResourceType>,
    nodes: Vec<NodeSpec>,
    providers: Vec<ServiceProvider>,
    #[serde(skip)]
    node_index: HashMap<NodeId, usize>,
    #[serde(skip)]
    provider_index: HashMap<ProviderId, usize>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.resource_types == other.resource_types
            && self.nodes == other.nodes
            && self.providers == other.providers
    }
}

impl Scenario {
    pub fn new(
        resource_types: Vec<ResourceType>,
        nodes: Vec<NodeSpec>,
        providers: Vec<ServiceProvider>,
    ) -> Result<Self, ModelError> {
        let l = resource_types.len();
        if l == 0 {
            return Err(ModelError::NoResourceTypes);
        }

        let mut node_index = HashMap::with_capacity(nodes.len());
        for (idx, node) in nodes.iter().enumerate() {
            if node_index.insert(node.id, idx).is_some() {
                return Err(ModelError::DuplicateNode(node.id));
            }
            if node.capacities.len() != l {
                return Err(ModelError::NodeLength {
                    node: node.id,
                    expected: l,
                    found: node.capacities.len(),
                });
            }
            if node.capacities.iter().any(|c| c <= 0.0) {
                return Err(ModelError::NonPositiveCapacity(node.id));
            }
        }

        let mut provider_index = HashMap::with_capacity(providers.len());
        for (idx, provider) in providers.iter().enumerate() {
            if provider_index.insert(provider.id, idx).is_some() {
                return Err(ModelError::DuplicateProvider(provider.id));
            }
            let mut seen_options = HashSet::new();
            for option in &provider.options {
                if !seen_options.insert(option.id) {
                    return Err(ModelError::DuplicateOption {
                        provider: provider.id,
                        option: option.id,
                    });
                }
                if !(0.0..=1.0).contains(&option.utility) {
                    return Err(ModelError::UtilityRange {
                        provider: provider.id,
                        option: option.id,
                        utility: option.utility,
                    });
                }
                if option.containers.is_empty() {
                    return Err(ModelError::EmptyOption {
                        provider: provider.id,
                        option: option.id,
                    });
                }
                let mut seen_containers = HashSet::new();
                for c in &option.containers {
                    if !seen_containers.insert(c.id) {
                        return Err(ModelError::DuplicateContainer {
                            provider: provider.id,
                            option: option.id,
                            container: c.id,
                        });
                    }
                    if c.demands.len() != l {
                        return Err(ModelError::ContainerLength {
                            provider: provider.id,
                            option: option.id,
                            container: c.id,
                            expected: l,
                            found: c.demands.len(),
                        });
                    }
                }
            }
        }

        Ok(Self {
            resource_types,
            nodes,
            providers,
            node_index,
            provider_index,
        })
    }

    pub fn resource_types(&self) -> &[ResourceType] {
        &self.resource_types
    }

    pub fn n_resources(&self) -> usize {
        self.resource_types.len()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn providers(&self) -> &[ServiceProvider] {
        &self.providers
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn provider(&self, id: ProviderId) -> Option<&ServiceProvider> {
        self.provider_index.get(&id).map(|&i| &self.providers[i])
    }

    pub(crate) fn node_position(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    /// Total capacity per resource type, summed over all nodes.
    pub fn total_capacity(&self) -> ResourceVector {
        let mut total = ResourceVector::zeros(self.n_resources());
        for node in &self.nodes {
            total.add_assign(node.capacities.as_slice());
        }
        total
    }

    /// Number of containers across every option of every provider.
    pub fn container_count(&self) -> usize {
        self.providers
            .iter()
            .flat_map(|p| &p.options)
            .map(|o| o.containers.len())
            .sum()
    }

    /// Returns a copy whose node capacities are replaced by `f(node)`.
    pub fn with_capacities(
        &self,
        mut f: impl FnMut(&NodeSpec) -> ResourceVector,
    ) -> Result<Self, ModelError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec {
                id: n.id,
                capacities: f(n),
            })
            .collect();
        Self::new(self.resource_types.clone(), nodes, self.providers.clone())
    }
}

/// Identifies one container of one option of one provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContainerKey {
    pub provider: ProviderId,
    pub option: OptionId,
    pub container: ContainerId,
}

impl ContainerKey {
    pub fn new(provider: ProviderId, option: OptionId, container: ContainerId) -> Self {
        Self {
            provider,
            option,
            container,
        }
    }
}

/// Decision variables: the accepted option of each provider (absent means the
/// provider was rejected) and the node hosting each container of the accepted
/// options.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allocation {
    choices: BTreeMap<ProviderId, OptionId>,
    placements: BTreeMap<ContainerKey, NodeId>,
}

impl Allocation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an allocation from raw choice and placement lists, rejecting
    /// the shapes a map cannot represent: two options for one provider, or
    /// one container placed on two nodes.
    pub fn from_parts(
        choices: impl IntoIterator<Item = (ProviderId, OptionId)>,
        placements: impl IntoIterator<Item = (ContainerKey, NodeId)>,
    ) -> Result<Self, Vec<crate::validate::Violation>> {
        use crate::validate::Violation;

        let mut alloc = Allocation::new();
        let mut violations = Vec::new();
        let mut extra_choices: BTreeMap<ProviderId, Vec<OptionId>> = BTreeMap::new();
        for (p, o) in choices {
            match alloc.choices.get(&p) {
                Some(&first) if first != o => extra_choices
                    .entry(p)
                    .or_insert_with(|| vec![first])
                    .push(o),
                Some(_) => {}
                None => {
                    alloc.choices.insert(p, o);
                }
            }
        }
        for (provider, options) in extra_choices {
            violations.push(Violation::MultipleOptions { provider, options });
        }

        let mut extra_nodes: BTreeMap<ContainerKey, Vec<NodeId>> = BTreeMap::new();
        for (key, node) in placements {
            match alloc.placements.get(&key) {
                Some(&first) if first != node => extra_nodes
                    .entry(key)
                    .or_insert_with(|| vec![first])
                    .push(node),
                Some(_) => {}
                None => {
                    alloc.placements.insert(key, node);
                }
            }
        }
        for (key, nodes) in extra_nodes {
            violations.push(Violation::MultiplyPlaced { key, nodes });
        }

        if violations.is_empty() {
            Ok(alloc)
        } else {
            Err(violations)
        }
    }

    /// Accepts `option` for `provider`, replacing any earlier choice and
    /// dropping that choice's placements.
    pub fn choose(&mut self, provider: ProviderId, option: OptionId) {
        if let Some(old) = self.choices.insert(provider, option) {
            if old != option {
                self.placements
                    .retain(|k, _| !(k.provider == provider && k.option == old));
            }
        }
    }

    pub fn reject(&mut self, provider: ProviderId) {
        self.choices.remove(&provider);
        self.placements.retain(|k, _| k.provider != provider);
    }

    pub fn place(&mut self, key: ContainerKey, node: NodeId) {
        self.placements.insert(key, node);
    }

    pub fn choice(&self, provider: ProviderId) -> Option<OptionId> {
        self.choices.get(&provider).copied()
    }

    pub fn choices(&self) -> &BTreeMap<ProviderId, OptionId> {
        &self.choices
    }

    pub fn placements(&self) -> &BTreeMap<ContainerKey, NodeId> {
        &self.placements
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty() && self.placements.is_empty()
    }
}

/// Componentwise sum of an option's container demands.
pub fn option_demand(option: &ConfigOption) -> ResourceVector {
    let len = option.containers.first().map_or(0, |c| c.demands.len());
    let mut total = ResourceVector::zeros(len);
    for c in &option.containers {
        total.add_assign(c.demands.as_slice());
    }
    total
}

fn chosen_option(
    scenario: &Scenario,
    provider: ProviderId,
    option: OptionId,
) -> Result<&ConfigOption, ModelError> {
    let p = scenario
        .provider(provider)
        .ok_or(ModelError::UnknownProvider(provider))?;
    p.option(option)
        .ok_or(ModelError::UnknownOption { provider, option })
}

/// Sum of the utilities of the accepted options. Placements are ignored.
pub fn total_utility(scenario: &Scenario, alloc: &Allocation) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for (&p, &o) in alloc.choices() {
        total += chosen_option(scenario, p, o)?.utility;
    }
    Ok(total)
}

/// Deployed demand divided by total cluster capacity, per resource type.
pub fn resource_usage(
    scenario: &Scenario,
    alloc: &Allocation,
) -> Result<ResourceVector, ModelError> {
    if let Err(violations) = crate::validate::validate(scenario, alloc) {
        return Err(ModelError::InvalidAllocation(violations));
    }
    let mut used = ResourceVector::zeros(scenario.n_resources());
    for (&p, &o) in alloc.choices() {
        used.add_assign(chosen_option(scenario, p, o)?.demand().as_slice());
    }
    let total = scenario.total_capacity();
    Ok(ResourceVector(
        used.iter()
            .zip(total.iter())
            .map(|(u, c)| (u / c).clamp(0.0, 1.0))
            .collect(),
    ))
}
