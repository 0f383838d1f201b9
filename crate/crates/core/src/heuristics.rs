//! Fast non-exact solvers: the uninformed random baseline and a greedy
//! utility-density heuristic with best-fit container placement.

use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, Residual};
use crate::model::{Allocation, Scenario};
use crate::report::SolveReport;

pub const NAIVE: &str = "naive";
pub const GREEDY: &str = "greedy";

/// Random option selection and random placement.
///
/// Providers are visited in a seeded random order. Each draws one of its
/// options uniformly, then each container goes to a uniformly drawn node among
/// those that can still hold it. If some container has nowhere to go, the
/// provider's partial placement is undone and it gets no option. There are no
/// retries.
pub fn solve_naive(scenario: &Scenario, seed: u64) -> (Allocation, SolveReport) {
    let start = Instant::now();
    let inst = Instance::new(scenario);
    let n = inst.n_providers();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut residual = Residual::full(&inst);
    let mut choice = vec![None; n];
    let mut nodes = vec![Vec::new(); n];
    let mut candidates = Vec::with_capacity(inst.n_nodes);

    for i in order {
        let options = &inst.options[i];
        if options.is_empty() {
            continue;
        }
        let j = rng.gen_range(0..options.len());
        let opt = &options[j];
        let snapshot = residual.clone();
        let mut placed = Vec::with_capacity(opt.n_containers);
        for z in 0..opt.n_containers {
            let demand = opt.container(z, inst.n_res);
            candidates.clear();
            candidates.extend((0..inst.n_nodes).filter(|&m| residual.fits(m, demand)));
            let Some(&m) = candidates.choose(&mut rng) else {
                break;
            };
            residual.take(m, demand);
            placed.push(m);
        }
        if placed.len() == opt.n_containers {
            choice[i] = Some(j);
            nodes[i] = placed;
        } else {
            residual = snapshot;
        }
    }

    let alloc = inst.to_allocation(&choice, &nodes);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = SolveReport::for_allocation(NAIVE, scenario, &alloc, elapsed, false);
    (alloc, report)
}

/// Greedy by utility density with best-fit placement. See [`density`].
pub fn solve_greedy(scenario: &Scenario) -> (Allocation, SolveReport) {
    let start = Instant::now();
    let inst = Instance::new(scenario);
    let sol = greedy(&inst);
    let alloc = inst.to_allocation(&sol.choice, &sol.nodes);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = SolveReport::for_allocation(GREEDY, scenario, &alloc, elapsed, false);
    (alloc, report)
}

/// Utility per unit of normalized resource: `utility / mean_l(demand_l / total_l)`.
/// A free option with positive utility has infinite density; a free option
/// with zero utility has density zero.
pub fn density(utility: f64, demand: &[f64], total_capacity: &[f64]) -> f64 {
    let share = demand
        .iter()
        .zip(total_capacity)
        .map(|(d, c)| d / c)
        .sum::<f64>()
        / demand.len().max(1) as f64;
    if share > 0.0 {
        utility / share
    } else if utility > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub(crate) struct IndexSolution {
    pub choice: Vec<Option<usize>>,
    pub nodes: Vec<Vec<usize>>,
    pub value: f64,
}

pub(crate) fn greedy(inst: &Instance<'_>) -> IndexSolution {
    let n = inst.n_providers();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, options) in inst.options.iter().enumerate() {
        for (j, o) in options.iter().enumerate() {
            candidates.push((density(o.utility, &o.aggregate, &inst.total_capacity), i, j));
        }
    }
    // Descending density; ties by provider position then option position,
    // which follow the scenario's declared order.
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut residual = Residual::full(inst);
    let mut sol = IndexSolution {
        choice: vec![None; n],
        nodes: vec![Vec::new(); n],
        value: 0.0,
    };
    for (_, i, j) in candidates {
        if sol.choice[i].is_some() {
            continue;
        }
        let opt = &inst.options[i][j];
        if let Some(placed) = best_fit(inst, &mut residual, i, j) {
            sol.choice[i] = Some(j);
            sol.nodes[i] = placed;
            sol.value += opt.utility;
        }
    }
    sol
}

/// Places every container of option `j` of provider `i`, largest first, each on
/// the feasible node left with the least normalized slack in its tightest
/// dimension. Leaves `residual` untouched and returns `None` if any container
/// does not fit.
fn best_fit(
    inst: &Instance<'_>,
    residual: &mut Residual,
    i: usize,
    j: usize,
) -> Option<Vec<usize>> {
    let opt = &inst.options[i][j];
    let l = inst.n_res;
    let mut order: Vec<usize> = (0..opt.n_containers).collect();
    let size = |z: usize| {
        opt.container(z, l)
            .iter()
            .zip(&inst.total_capacity)
            .map(|(d, c)| d / c)
            .fold(0.0, f64::max)
    };
    order.sort_by(|&a, &b| size(b).partial_cmp(&size(a)).unwrap_or(Ordering::Equal));

    let snapshot = residual.clone();
    let mut placed = vec![0; opt.n_containers];
    for z in order {
        let demand = opt.container(z, l);
        let mut best: Option<(f64, usize)> = None;
        for m in 0..inst.n_nodes {
            if !residual.fits(m, demand) {
                continue;
            }
            let slack = residual
                .node(m)
                .iter()
                .zip(demand)
                .zip(inst.node_capacity(m))
                .map(|((free, d), cap)| (free - d) / cap)
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(s, _)| slack < s) {
                best = Some((slack, m));
            }
        }
        let Some((_, m)) = best else {
            *residual = snapshot;
            return None;
        };
        residual.take(m, demand);
        placed[z] = m;
    }
    Some(placed)
}
