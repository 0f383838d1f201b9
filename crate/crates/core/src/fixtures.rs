//! Small hand-built instances.

use crate::model::{
    ConfigOption, ContainerId, ContainerSpec, NodeId, NodeSpec, OptionId, ProviderId, ResourceType,
    ResourceVector, Scenario, ServiceProvider,
};

fn option(id: u32, utility: f64, containers: &[[f64; 2]]) -> ConfigOption {
    ConfigOption {
        id: OptionId(id),
        utility,
        containers: containers
            .iter()
            .enumerate()
            .map(|(z, d)| ContainerSpec {
                id: ContainerId(z as u32 + 1),
                demands: ResourceVector::new(d.to_vec()).expect("non-negative demand"),
            })
            .collect(),
    }
}

/// One node with capacity (CPU 10, RAM 10). Provider 1 offers option 1
/// (one container (6, 4), utility 0.8) and option 2 (one container (3, 2),
/// utility 0.5); provider 2 offers option 1 (one container (5, 5), utility
/// 0.7). The optimum takes provider 1 option 2 and provider 2 option 1 for a
/// total utility of 1.2.
pub fn t1() -> Scenario {
    t1_with_capacity(10.0, 10.0)
}

pub fn t1_with_capacity(cpu: f64, ram: f64) -> Scenario {
    Scenario::new(
        ResourceType::cpu_ram(),
        vec![NodeSpec {
            id: NodeId(1),
            capacities: ResourceVector::new(vec![cpu, ram]).expect("positive capacity"),
        }],
        vec![
            ServiceProvider {
                id: ProviderId(1),
                options: vec![option(1, 0.8, &[[6.0, 4.0]]), option(2, 0.5, &[[3.0, 2.0]])],
            },
            ServiceProvider {
                id: ProviderId(2),
                options: vec![option(1, 0.7, &[[5.0, 5.0]])],
            },
        ],
    )
    .expect("fixture is well formed")
}
