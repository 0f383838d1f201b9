//! Feasibility checks for an [`Allocation`] against its [`Scenario`].
//!
//! Three constraint families are checked:
//! - Eq. 2: every container of an accepted option sits on exactly one node, and
//!   containers of options that were not accepted are not placed at all.
//! - Eq. 3: on each node the placed demand never exceeds the capacity of any
//!   resource type (up to [`FEASIBILITY_TOL`]).
//! - Eq. 4: at most one accepted option per provider.

use std::collections::BTreeMap;
use std::fmt;

use crate::model::{
    Allocation, ContainerKey, NodeId, OptionId, ProviderId, Scenario, FEASIBILITY_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownProvider {
        provider: ProviderId,
    },
    UnknownOption {
        provider: ProviderId,
        option: OptionId,
    },
    UnknownContainer {
        key: ContainerKey,
    },
    UnknownNode {
        key: ContainerKey,
        node: NodeId,
    },
    /// Eq. 2: an accepted container has no node.
    Unplaced {
        key: ContainerKey,
    },
    /// Eq. 2: a container was assigned to more than one node.
    MultiplyPlaced {
        key: ContainerKey,
        nodes: Vec<NodeId>,
    },
    /// Eq. 2: a container of an option that was not accepted is placed.
    PlacedNotChosen {
        key: ContainerKey,
        node: NodeId,
    },
    /// Eq. 3
    Overload {
        node: NodeId,
        resource: String,
        load: f64,
        capacity: f64,
    },
    /// Eq. 4
    MultipleOptions {
        provider: ProviderId,
        options: Vec<OptionId>,
    },
}

impl Violation {
    /// The constraint family this violation breaks, or `None` for dangling ids.
    pub fn equation(&self) -> Option<u8> {
        match self {
            Violation::Unplaced { .. }
            | Violation::MultiplyPlaced { .. }
            | Violation::PlacedNotChosen { .. } => Some(2),
            Violation::Overload { .. } => Some(3),
            Violation::MultipleOptions { .. } => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownProvider { provider } => {
                write!(f, "reference error: unknown provider {provider}")
            }
            Violation::UnknownOption { provider, option } => {
                write!(f, "reference error: provider {provider} has no option {option}")
            }
            Violation::UnknownContainer { key } => write!(
                f,
                "reference error: provider {} option {} has no container {}",
                key.provider, key.option, key.container
            ),
            Violation::UnknownNode { key, node } => write!(
                f,
                "reference error: provider {} option {} container {} placed on unknown node {node}",
                key.provider, key.option, key.container
            ),
            Violation::Unplaced { key } => write!(
                f,
                "Eq. 2 violated: provider {} option {} container {} is not placed",
                key.provider, key.option, key.container
            ),
            Violation::MultiplyPlaced { key, nodes } => write!(
                f,
                "Eq. 2 violated: provider {} option {} container {} placed on {} nodes ({})",
                key.provider,
                key.option,
                key.container,
                nodes.len(),
                join(nodes)
            ),
            Violation::PlacedNotChosen { key, node } => write!(
                f,
                "Eq. 2 violated: provider {} option {} container {} placed on node {node} but the option is not chosen",
                key.provider, key.option, key.container
            ),
            Violation::Overload {
                node,
                resource,
                load,
                capacity,
            } => write!(
                f,
                "Eq. 3 violated: node {node}, resource {resource}: load {load} > capacity {capacity}"
            ),
            Violation::MultipleOptions { provider, options } => write!(
                f,
                "Eq. 4 violated: provider {provider} has {} chosen options ({})",
                options.len(),
                join(options)
            ),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Checks `alloc` against `scenario`; returns every violation found.
pub fn validate(scenario: &Scenario, alloc: &Allocation) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let l = scenario.n_resources();
    let mut loads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();

    // Eq. 4 holds by construction of the choice map; one entry per provider.
    for (&provider, &option) in alloc.choices() {
        let Some(p) = scenario.provider(provider) else {
            violations.push(Violation::UnknownProvider { provider });
            continue;
        };
        let Some(o) = p.option(option) else {
            violations.push(Violation::UnknownOption { provider, option });
            continue;
        };
        for c in &o.containers {
            let key = ContainerKey::new(provider, option, c.id);
            match alloc.placements().get(&key) {
                None => violations.push(Violation::Unplaced { key }),
                Some(&node) => match scenario.node_position(node) {
                    None => violations.push(Violation::UnknownNode { key, node }),
                    Some(m) => {
                        let load = loads.entry(m).or_insert_with(|| vec![0.0; l]);
                        for (acc, d) in load.iter_mut().zip(c.demands.iter()) {
                            *acc += d;
                        }
                    }
                },
            }
        }
    }

    for (&key, &node) in alloc.placements() {
        let chosen = alloc.choice(key.provider) == Some(key.option);
        if chosen {
            let known = scenario
                .provider(key.provider)
                .and_then(|p| p.option(key.option))
                .map(|o| o.containers.iter().any(|c| c.id == key.container));
            if known == Some(false) {
                violations.push(Violation::UnknownContainer { key });
            }
        } else {
            violations.push(Violation::PlacedNotChosen { key, node });
        }
    }

    for (m, load) in loads {
        let node = &scenario.nodes()[m];
        for (r, (&used, cap)) in load.iter().zip(node.capacities.iter()).enumerate() {
            if used > cap + FEASIBILITY_TOL {
                violations.push(Violation::Overload {
                    node: node.id,
                    resource: scenario.resource_types()[r].name.clone(),
                    load: used,
                    capacity: cap,
                });
            }
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContainerId, ResourceVector};
    use crate::testutil::{random_tiny, t1};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn key(p: u32, o: u32, c: u32) -> ContainerKey {
        ContainerKey::new(ProviderId(p), OptionId(o), ContainerId(c))
    }

    #[test]
    fn overload_on_shared_node() {
        let s = t1();
        let mut a = Allocation::new();
        a.choose(ProviderId(1), OptionId(1));
        a.place(key(1, 1, 1), NodeId(1));
        a.choose(ProviderId(2), OptionId(1));
        a.place(key(2, 1, 1), NodeId(1));
        let v = validate(&s, &a).unwrap_err();
        assert_eq!(
            v,
            vec![Violation::Overload {
                node: NodeId(1),
                resource: "CPU".into(),
                load: 11.0,
                capacity: 10.0
            }]
        );
        assert_eq!(
            v[0].to_string(),
            "Eq. 3 violated: node 1, resource CPU: load 11 > capacity 10"
        );
    }

    #[test]
    fn unplaced_chosen_container() {
        let s = t1();
        let mut a = Allocation::new();
        a.choose(ProviderId(1), OptionId(2));
        let v = validate(&s, &a).unwrap_err();
        assert_eq!(v, vec![Violation::Unplaced { key: key(1, 2, 1) }]);
        assert_eq!(v[0].equation(), Some(2));
    }

    #[test]
    fn feasible_pair_on_one_node() {
        let s = t1();
        let mut a = Allocation::new();
        a.choose(ProviderId(1), OptionId(2));
        a.place(key(1, 2, 1), NodeId(1));
        a.choose(ProviderId(2), OptionId(1));
        a.place(key(2, 1, 1), NodeId(1));
        assert_eq!(validate(&s, &a), Ok(()));
    }

    #[test]
    fn dangling_references() {
        let s = t1();
        let mut a = Allocation::new();
        a.choose(ProviderId(7), OptionId(1));
        a.place(key(7, 1, 1), NodeId(1));
        let v = validate(&s, &a).unwrap_err();
        assert!(v.contains(&Violation::UnknownProvider {
            provider: ProviderId(7)
        }));

        let mut a = Allocation::new();
        a.choose(ProviderId(2), OptionId(1));
        a.place(key(2, 1, 1), NodeId(5));
        a.place(key(2, 1, 9), NodeId(1));
        let v = validate(&s, &a).unwrap_err();
        assert!(v.contains(&Violation::UnknownNode {
            key: key(2, 1, 1),
            node: NodeId(5)
        }));
        assert!(v.contains(&Violation::UnknownContainer { key: key(2, 1, 9) }));
    }

    #[test]
    fn placement_without_choice() {
        let s = t1();
        let mut a = Allocation::new();
        a.place(key(2, 1, 1), NodeId(1));
        let v = validate(&s, &a).unwrap_err();
        assert_eq!(v[0].equation(), Some(2));
    }

    #[test]
    fn tolerance_absorbs_rounding() {
        // SP1-A + SP2-A need CPU 11; a capacity just short of that by less
        // than the tolerance is accepted, one short by more is not.
        let mut a = Allocation::new();
        a.choose(ProviderId(1), OptionId(1));
        a.place(key(1, 1, 1), NodeId(1));
        a.choose(ProviderId(2), OptionId(1));
        a.place(key(2, 1, 1), NodeId(1));
        let near = t1()
            .with_capacities(|_| ResourceVector::new(vec![11.0 - 1e-12, 10.0]).unwrap())
            .unwrap();
        assert_eq!(validate(&near, &a), Ok(()));
        let short = t1()
            .with_capacities(|_| ResourceVector::new(vec![11.0 - 1e-6, 10.0]).unwrap())
            .unwrap();
        assert!(validate(&short, &a).is_err());
    }

    /// Direct evaluation of the constraint families on dense 0/1 indicator
    /// arrays, written independently of `validate`.
    fn naive_feasible(s: &Scenario, a: &Allocation) -> bool {
        let n = s.providers().len();
        let m = s.nodes().len();
        let mut ok = true;
        for (&p, &o) in a.choices() {
            if s.provider(p).and_then(|pp| pp.option(o)).is_none() {
                return false;
            }
        }
        for (k, node) in a.placements() {
            if s.node(*node).is_none() {
                return false;
            }
            if s.provider(k.provider)
                .and_then(|pp| pp.option(k.option))
                .is_none_or(|oo| !oo.containers.iter().any(|c| c.id == k.container))
            {
                return false;
            }
        }
        let mut load = vec![vec![0.0; s.n_resources()]; m];
        for i in 0..n {
            let p = &s.providers()[i];
            let mut chosen = 0;
            for o in &p.options {
                let x = u8::from(a.choice(p.id) == Some(o.id));
                chosen += x;
                for c in &o.containers {
                    let mut y_sum = 0u8;
                    for (mm, node) in s.nodes().iter().enumerate() {
                        let k = ContainerKey::new(p.id, o.id, c.id);
                        let y = u8::from(a.placements().get(&k) == Some(&node.id));
                        y_sum += y;
                        if y == 1 {
                            for (acc, d) in load[mm].iter_mut().zip(c.demands.iter()) {
                                *acc += d;
                            }
                        }
                    }
                    ok &= y_sum == x;
                }
            }
            ok &= chosen <= 1;
        }
        for (mm, node) in s.nodes().iter().enumerate() {
            for (used, cap) in load[mm].iter().zip(node.capacities.iter()) {
                ok &= *used <= cap + FEASIBILITY_TOL;
            }
        }
        ok
    }

    fn random_allocation(s: &Scenario, rng: &mut ChaCha8Rng) -> Allocation {
        let mut a = Allocation::new();
        for p in s.providers() {
            if p.options.is_empty() || rng.gen_bool(0.3) {
                continue;
            }
            let o = &p.options[rng.gen_range(0..p.options.len())];
            a.choose(p.id, o.id);
            for c in &o.containers {
                if rng.gen_bool(0.9) {
                    let node = s.nodes()[rng.gen_range(0..s.nodes().len())].id;
                    a.place(ContainerKey::new(p.id, o.id, c.id), node);
                }
            }
        }
        if rng.gen_bool(0.1) {
            if let Some(p) = s.providers().first() {
                if let Some(o) = p.options.last() {
                    a.place(
                        ContainerKey::new(p.id, o.id, ContainerId(1)),
                        s.nodes()[0].id,
                    );
                }
            }
        }
        a
    }

    proptest! {
        #[test]
        fn agrees_with_naive_validator(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_tiny(&mut rng);
            let a = random_allocation(&s, &mut rng);
            prop_assert_eq!(validate(&s, &a).is_ok(), naive_feasible(&s, &a));
        }
    }
}
