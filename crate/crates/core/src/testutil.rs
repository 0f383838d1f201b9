use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{generate, GenParams};
use crate::model::{ResourceVector, Scenario};

pub(crate) use crate::fixtures::t1;

/// A random instance small enough for brute force: N <= 4, J <= 3, Z <= 2,
/// M <= 2, with generator-shaped demands and occasionally uneven nodes and
/// option counts.
pub(crate) fn random_tiny(rng: &mut ChaCha8Rng) -> Scenario {
    let params = GenParams {
        n_providers: rng.gen_range(1..=4),
        n_nodes: rng.gen_range(1..=2),
        options_per_provider: rng.gen_range(1..=3),
        containers_per_option: rng.gen_range(1..=2),
        load_factor: rng.gen_range(0.5..3.0),
        seed: rng.gen(),
        ..GenParams::default()
    };
    let s = generate(&params).unwrap();
    if rng.gen_bool(0.3) {
        let shrink: f64 = rng.gen_range(0.3..1.0);
        s.with_capacities(|n| {
            if n.id.0 == 1 {
                ResourceVector::new(n.capacities.iter().map(|c| c * shrink).collect()).unwrap()
            } else {
                n.capacities.clone()
            }
        })
        .unwrap()
    } else {
        s
    }
}
