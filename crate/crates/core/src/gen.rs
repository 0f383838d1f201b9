//! Seeded synthetic workloads.
//!
//! Container demands are calibrated by a load factor `K`: the mean demand per
//! container `w̄_l` satisfies `w̄_l · Z · N = K · c_l,tot`, so that if every
//! provider ran one option the cluster would be asked for `K` times its
//! capacity. Option utility is a random concave function of the option's share
//! of the cluster:
//!
//! ```text
//! u = α · (w_CPU / c_CPU,tot)^(1/β_CPU) + (1 − α) · (w_RAM / c_RAM,tot)^(1/β_RAM)
//! ```
//!
//! Every random draw comes from a ChaCha8 stream keyed by the entity it
//! belongs to, derived from the base seed with [`derive_seed`]:
//! option `(i, j)` draws `α, β_CPU, β_RAM` from stream `[OPTION, i, j]` and
//! container `(i, j, z)` draws its demands from stream `[CONTAINER, i, j, z]`.
//! Growing `N`, `J` or `Z` therefore only appends entities and never perturbs
//! the ones already generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::model::{
    ConfigOption, ContainerId, ContainerSpec, NodeId, NodeSpec, OptionId, ProviderId, ResourceType,
    ResourceVector, Scenario, ServiceProvider,
};

/// Generator recorded in output metadata.
pub const PRNG_NAME: &str = "ChaCha8Rng/splitmix64-derived-streams";

const OPTION_STREAM: u64 = 1;
const CONTAINER_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_providers: usize,
    pub n_nodes: usize,
    pub options_per_provider: usize,
    pub containers_per_option: usize,
    pub load_factor: f64,
    /// Capacity of every node: CPU cores, RAM GB.
    pub node_capacity: ResourceVector,
    pub alpha_range: Interval,
    pub beta_range: Interval,
    /// Demands are uniform on `w̄ · [1 − spread, 1 + spread]`.
    pub demand_spread: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_providers: 50,
            n_nodes: 8,
            options_per_provider: 5,
            containers_per_option: 8,
            load_factor: 1.8,
            node_capacity: ResourceVector::new(vec![16.0, 32.0]).expect("static capacity"),
            alpha_range: Interval::new(0.0, 1.0),
            beta_range: Interval::new(1.0, 5.0),
            demand_spread: 0.5,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let err = |field, reason: &str| {
            Err(GenError::Param {
                field,
                reason: reason.to_string(),
            })
        };
        if self.n_providers == 0 {
            return err("n_providers", "must be at least 1");
        }
        if self.n_nodes == 0 {
            return err("n_nodes", "must be at least 1");
        }
        if self.options_per_provider == 0 {
            return err("options_per_provider", "must be at least 1");
        }
        if self.containers_per_option == 0 {
            return err("containers_per_option", "must be at least 1");
        }
        if !(self.load_factor.is_finite() && self.load_factor > 0.0) {
            return err("load_factor", "must be positive and finite");
        }
        if self.node_capacity.len() != 2 {
            return err("node_capacity", "needs exactly two entries (CPU, RAM)");
        }
        if self.node_capacity.iter().any(|c| c <= 0.0) {
            return err("node_capacity", "every entry must be positive");
        }
        let a = self.alpha_range;
        if !(0.0 <= a.lo && a.lo <= a.hi && a.hi <= 1.0) {
            return err("alpha_range", "must satisfy 0 <= lo <= hi <= 1");
        }
        let b = self.beta_range;
        if !(1.0 <= b.lo && b.lo <= b.hi && b.hi.is_finite()) {
            return err("beta_range", "must satisfy 1 <= lo <= hi < inf");
        }
        if !(0.0..1.0).contains(&self.demand_spread) {
            return err("demand_spread", "must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn total_capacity(&self) -> ResourceVector {
        ResourceVector::new(
            self.node_capacity
                .iter()
                .map(|c| c * self.n_nodes as f64)
                .collect(),
        )
        .expect("capacities are validated")
    }
}

/// Mean container demand per resource type, `K · c_l,tot / (Z · N)`.
pub fn mean_demand(params: &GenParams) -> ResourceVector {
    let containers = (params.containers_per_option * params.n_providers) as f64;
    ResourceVector::new(
        params
            .total_capacity()
            .iter()
            .map(|c| params.load_factor * c / containers)
            .collect(),
    )
    .expect("capacities are validated")
}

/// Concave utility of an option's share of the cluster. Each share is
/// clamped to `[0, 1]` so the result always lies in `[0, 1]`.
pub fn option_utility(
    option_demand: &ResourceVector,
    totals: &ResourceVector,
    alpha: f64,
    beta_cpu: f64,
    beta_ram: f64,
) -> f64 {
    let share = |l: usize| (option_demand[l] / totals[l]).clamp(0.0, 1.0);
    let u = alpha * share(0).powf(1.0 / beta_cpu) + (1.0 - alpha) * share(1).powf(1.0 / beta_ram);
    u.clamp(0.0, 1.0)
}

/// Mixes `path` into `base` with the splitmix64 finalizer.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |h, &x| {
        splitmix64(h.rotate_left(23) ^ splitmix64(x))
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate(params: &GenParams) -> Result<Scenario, GenError> {
    params.validate()?;
    let mean = mean_demand(params);
    let totals = params.total_capacity();
    let spread = Interval::new(1.0 - params.demand_spread, 1.0 + params.demand_spread);

    let nodes = (0..params.n_nodes)
        .map(|m| NodeSpec {
            id: NodeId(m as u32 + 1),
            capacities: params.node_capacity.clone(),
        })
        .collect();

    let providers = (0..params.n_providers)
        .into_par_iter()
        .map(|i| {
            let options = (0..params.options_per_provider)
                .map(|j| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        params.seed,
                        &[OPTION_STREAM, i as u64, j as u64],
                    ));
                    let alpha = params.alpha_range.sample(&mut rng);
                    let beta_cpu = params.beta_range.sample(&mut rng);
                    let beta_ram = params.beta_range.sample(&mut rng);

                    let containers: Vec<ContainerSpec> = (0..params.containers_per_option)
                        .map(|z| {
                            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                                params.seed,
                                &[CONTAINER_STREAM, i as u64, j as u64, z as u64],
                            ));
                            let demands =
                                mean.iter().map(|w| w * spread.sample(&mut rng)).collect();
                            ContainerSpec {
                                id: ContainerId(z as u32 + 1),
                                demands: ResourceVector::new(demands).expect("positive demands"),
                            }
                        })
                        .collect();

                    let mut option = ConfigOption {
                        id: OptionId(j as u32 + 1),
                        utility: 0.0,
                        containers,
                    };
                    option.utility =
                        option_utility(&option.demand(), &totals, alpha, beta_cpu, beta_ram);
                    option
                })
                .collect();
            ServiceProvider {
                id: ProviderId(i as u32 + 1),
                options,
            }
        })
        .collect();

    Ok(Scenario::new(ResourceType::cpu_ram(), nodes, providers)
        .expect("generated scenario is well formed"))
}

/// Provenance block embedded in generated scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub params: GenParams,
    pub prng: String,
}

impl GeneratorMeta {
    pub fn new(params: &GenParams) -> Self {
        Self {
            params: params.clone(),
            prng: PRNG_NAME.to_string(),
        }
    }
}
