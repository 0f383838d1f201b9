//! Exact maximization of total utility by branch-and-bound, plus an
//! exhaustive enumerator used as an independent oracle on tiny instances.
//!
//! The search branches on providers in descending order of their best option
//! utility. At each provider it tries every candidate option (best utility
//! first) and finally "no option". A branch is cut when the utility collected
//! so far plus an upper bound on what the remaining providers can add (see
//! [`bound`]) does not beat the incumbent.
//!
//! Placement is kept as a packing of the containers accepted so far. A new
//! option's containers are first fitted around the existing packing; when that
//! fails, every accepted container is repacked from scratch by an exact
//! search, so a selection is rejected only if no packing of it exists.
//! Nodes with identical residual capacity are interchangeable, and only the
//! lowest-indexed one is branched on.

mod bound;
mod brute;
mod packing;

use std::cmp::Ordering;
use std::num::NonZeroU64;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::heuristics::greedy;
use crate::instance::{Instance, Residual};
use crate::model::{Allocation, Scenario, FEASIBILITY_TOL};
use crate::report::SolveReport;

pub use brute::{brute_force, brute_force_with_guard, enumeration_size, DEFAULT_LEAF_GUARD};

use bound::SuffixBound;
use packing::{pack, PackResult};

pub const EXACT: &str = "exact";

/// Improvements smaller than this are treated as ties.
const IMPROVE_EPS: f64 = 1e-12;
/// Attempts spent fitting a new option around the current packing before
/// falling back to a full repack.
const INCREMENTAL_STEPS: u64 = 512;
/// Search steps allowed for one full repack. A repack that runs out is
/// treated as infeasible and the result is no longer proven optimal.
const REPACK_STEPS: u64 = 100_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveLimits {
    /// Wall-clock limit; `None` means unlimited.
    pub time_limit_ms: Option<NonZeroU64>,
    /// Cap on branch-and-bound nodes; `None` means unlimited.
    pub node_budget: Option<u64>,
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    /// `0` is treated as unlimited.
    pub fn time_limit_ms(ms: u64) -> Self {
        Self {
            time_limit_ms: NonZeroU64::new(ms),
            node_budget: None,
        }
    }

    pub fn with_node_budget(mut self, nodes: u64) -> Self {
        self.node_budget = Some(nodes);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub repacks: u64,
    /// Objective of every incumbent in the order found, starting with the
    /// greedy warm start.
    pub incumbents: Vec<f64>,
}

pub struct ExactOutcome {
    pub allocation: Allocation,
    pub report: SolveReport,
    pub stats: SearchStats,
}

pub fn solve_exact(scenario: &Scenario, limits: SolveLimits) -> (Allocation, SolveReport) {
    let out = solve_exact_with_stats(scenario, limits);
    (out.allocation, out.report)
}

pub fn solve_exact_with_stats(scenario: &Scenario, limits: SolveLimits) -> ExactOutcome {
    let start = Instant::now();
    let inst = Instance::new(scenario);
    let mut search = Search::new(&inst, limits, start);
    search.run();

    let n = inst.n_providers();
    let mut choice = vec![None; n];
    let mut nodes = vec![Vec::new(); n];
    for (k, &i) in search.order.iter().enumerate() {
        if let Some(c) = search.best.choice[k] {
            choice[i] = Some(search.candidates[k][c]);
            nodes[i] = search.best.placed[k].clone();
        }
    }
    let allocation = inst.to_allocation(&choice, &nodes);
    let proven = !search.budget.expired && !search.inconclusive;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = SolveReport::for_allocation(EXACT, scenario, &allocation, elapsed, proven);
    ExactOutcome {
        allocation,
        report,
        stats: search.stats,
    }
}

/// Shared time / node accounting for the search and its packing subproblems.
pub(crate) struct Budget {
    deadline: Option<Instant>,
    ticks: u64,
    expired: bool,
}

impl Budget {
    pub fn new(deadline: Option<Instant>) -> Self {
        Self {
            deadline,
            ticks: 0,
            expired: false,
        }
    }

    #[cfg(test)]
    pub fn unlimited() -> Self {
        Self::new(None)
    }

    /// Returns true once the deadline has passed.
    pub fn tick(&mut self) -> bool {
        if self.expired {
            return true;
        }
        self.ticks += 1;
        if self.ticks.is_multiple_of(256) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.expired = true;
                }
            }
        }
        self.expired
    }
}

#[derive(Clone)]
struct Incumbent {
    value: f64,
    /// Per search position: index into that position's candidate list.
    choice: Vec<Option<usize>>,
    /// Per search position: node of each container, in declared order.
    placed: Vec<Vec<usize>>,
}

struct Search<'a> {
    inst: &'a Instance<'a>,
    limits: SolveLimits,
    /// Provider index at each search position.
    order: Vec<usize>,
    /// Candidate option indices per position, best utility first.
    candidates: Vec<Vec<usize>>,
    /// Container placement order per (provider, option): largest first.
    container_order: Vec<Vec<Vec<usize>>>,
    /// Largest node capacity per resource; normalizes fit scores.
    scale: Vec<f64>,
    bound: SuffixBound,
    budget: Budget,
    /// Set once a repack hit its step cap.
    inconclusive: bool,
    stats: SearchStats,

    value: f64,
    residual_total: Vec<f64>,
    residual: Residual,
    choice: Vec<Option<usize>>,
    placed: Vec<Vec<usize>>,
    best: Incumbent,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance<'a>, limits: SolveLimits, start: Instant) -> Self {
        let l = inst.n_res;
        let empty = Residual::full(inst);
        let max_node_cap: Vec<f64> = (0..l)
            .map(|r| {
                (0..inst.n_nodes)
                    .map(|m| inst.node_capacity(m)[r])
                    .fold(0.0, f64::max)
            })
            .collect();

        // Options that can never be part of a feasible improving allocation are
        // dropped: zero utility, aggregate beyond the cluster, or a container
        // that fits no empty node.
        let viable = |i: usize, j: usize| {
            let o = &inst.options[i][j];
            o.utility > 0.0
                && o.aggregate
                    .iter()
                    .zip(&inst.total_capacity)
                    .all(|(d, c)| *d <= c + FEASIBILITY_TOL * inst.n_nodes as f64)
                && (0..o.n_containers)
                    .all(|z| (0..inst.n_nodes).any(|m| empty.fits(m, o.container(z, l))))
        };

        let mut per_provider: Vec<(usize, Vec<usize>)> = (0..inst.n_providers())
            .map(|i| {
                let mut js: Vec<usize> = (0..inst.options[i].len())
                    .filter(|&j| viable(i, j))
                    .collect();
                js.sort_by(|&a, &b| {
                    inst.options[i][b]
                        .utility
                        .partial_cmp(&inst.options[i][a].utility)
                        .unwrap_or(Ordering::Equal)
                });
                (i, js)
            })
            .filter(|(_, js)| !js.is_empty())
            .collect();
        let best_utility = |js: &[usize], i: usize| inst.options[i][js[0]].utility;
        per_provider.sort_by(|(ia, ja), (ib, jb)| {
            best_utility(jb, *ib)
                .partial_cmp(&best_utility(ja, *ia))
                .unwrap_or(Ordering::Equal)
                .then(ia.cmp(ib))
        });
        let (order, candidates): (Vec<usize>, Vec<Vec<usize>>) = per_provider.into_iter().unzip();

        let container_order = inst
            .options
            .iter()
            .map(|opts| {
                opts.iter()
                    .map(|o| {
                        let size = |z: usize| {
                            o.container(z, l)
                                .iter()
                                .zip(&max_node_cap)
                                .map(|(d, c)| d / c)
                                .fold(0.0, f64::max)
                        };
                        let mut zs: Vec<usize> = (0..o.n_containers).collect();
                        zs.sort_by(|&a, &b| {
                            size(b).partial_cmp(&size(a)).unwrap_or(Ordering::Equal)
                        });
                        zs
                    })
                    .collect()
            })
            .collect();

        let bound_input: Vec<Vec<(&[f64], f64)>> = order
            .iter()
            .zip(&candidates)
            .map(|(&i, js)| {
                js.iter()
                    .map(|&j| {
                        let o = &inst.options[i][j];
                        (o.aggregate.as_slice(), o.utility)
                    })
                    .collect()
            })
            .collect();
        let bound = SuffixBound::new(
            &bound_input,
            &inst.total_capacity,
            FEASIBILITY_TOL * inst.n_nodes as f64,
        );

        let n = order.len();
        Self {
            inst,
            limits,
            bound,
            budget: Budget::new(
                limits
                    .time_limit_ms
                    .map(|ms| start + std::time::Duration::from_millis(ms.get())),
            ),
            inconclusive: false,
            stats: SearchStats::default(),
            value: 0.0,
            residual_total: inst.total_capacity.clone(),
            residual: empty,
            choice: vec![None; n],
            placed: vec![Vec::new(); n],
            best: Incumbent {
                value: 0.0,
                choice: vec![None; n],
                placed: vec![Vec::new(); n],
            },
            order,
            candidates,
            container_order,
            scale: max_node_cap,
        }
    }

    fn run(&mut self) {
        self.warm_start();
        self.dfs(0);
    }

    /// Seeds the incumbent with the greedy solution.
    fn warm_start(&mut self) {
        let g = greedy(self.inst);
        let mut inc = Incumbent {
            value: 0.0,
            choice: vec![None; self.order.len()],
            placed: vec![Vec::new(); self.order.len()],
        };
        for (k, &i) in self.order.iter().enumerate() {
            if let Some(j) = g.choice[i] {
                if let Some(c) = self.candidates[k].iter().position(|&x| x == j) {
                    inc.choice[k] = Some(c);
                    inc.placed[k] = g.nodes[i].clone();
                    inc.value += self.inst.options[i][j].utility;
                }
            }
        }
        self.stats.incumbents.push(inc.value);
        self.best = inc;
    }

    fn stop(&mut self) -> bool {
        if let Some(cap) = self.limits.node_budget {
            if self.stats.nodes >= cap {
                self.budget.expired = true;
            }
        }
        self.budget.tick()
    }

    fn dfs(&mut self, k: usize) {
        if self.stop() {
            return;
        }
        self.stats.nodes += 1;
        if k == self.order.len() {
            return;
        }
        let i = self.order[k];
        let tol_total = FEASIBILITY_TOL * self.inst.n_nodes as f64;

        for c in 0..self.candidates[k].len() {
            let j = self.candidates[k][c];
            let opt = &self.inst.options[i][j];
            let next_total: Vec<f64> = self
                .residual_total
                .iter()
                .zip(&opt.aggregate)
                .map(|(r, d)| r - d)
                .collect();
            if next_total.iter().any(|r| *r < -tol_total) {
                continue;
            }
            let ub = self.value + opt.utility + self.bound.bound(k + 1, &next_total);
            if ub <= self.best.value + IMPROVE_EPS {
                continue;
            }

            let saved = match self.place_option(k, i, j) {
                Some(saved) => saved,
                None => {
                    if self.budget.expired {
                        return;
                    }
                    continue;
                }
            };
            let saved_total = std::mem::replace(&mut self.residual_total, next_total);
            self.choice[k] = Some(c);
            self.value += opt.utility;
            if self.value > self.best.value + IMPROVE_EPS {
                self.record_incumbent();
            }

            self.dfs(k + 1);

            self.value -= opt.utility;
            self.choice[k] = None;
            self.residual_total = saved_total;
            self.residual = saved.residual;
            match saved.placed {
                Some(placed) => self.placed = placed,
                None => self.placed[k].clear(),
            }
            if self.budget.expired {
                return;
            }
        }

        if self.value + self.bound.bound(k + 1, &self.residual_total)
            > self.best.value + IMPROVE_EPS
        {
            self.dfs(k + 1);
        }
    }

    fn record_incumbent(&mut self) {
        self.best.value = self.value;
        self.best.choice.clone_from(&self.choice);
        self.best.placed.clone_from(&self.placed);
        self.stats.incumbents.push(self.value);
    }

    /// Places option `j` of provider `i` (search position `k`), returning how
    /// to undo it, or `None` if no packing of the extended selection exists
    /// (or the budget ran out while looking for one).
    fn place_option(&mut self, k: usize, i: usize, j: usize) -> Option<Undo> {
        let l = self.inst.n_res;
        let opt = &self.inst.options[i][j];
        let order = &self.container_order[i][j];

        // Fit around the current packing.
        let items: Vec<&[f64]> = order.iter().map(|&z| opt.container(z, l)).collect();
        let before = self.residual.clone();
        let found = pack(
            &items,
            &mut self.residual,
            &self.scale,
            &mut self.budget,
            Some(INCREMENTAL_STEPS),
        );
        if self.budget.expired {
            return None;
        }
        if let PackResult::Packed(nodes) = found {
            let mut placed = vec![0; opt.n_containers];
            for (&z, m) in order.iter().zip(nodes) {
                placed[z] = m;
            }
            self.placed[k] = placed;
            return Some(Undo {
                residual: before,
                placed: None,
            });
        }

        // Repack everything accepted so far together with the new option.
        self.stats.repacks += 1;
        let mut owners: Vec<(usize, usize)> = Vec::new();
        let mut rows: Vec<&[f64]> = Vec::new();
        for (kk, &ii) in self.order.iter().enumerate() {
            let jj = if kk == k {
                Some(j)
            } else {
                self.choice[kk].map(|c| self.candidates[kk][c])
            };
            if let Some(jj) = jj {
                let o = &self.inst.options[ii][jj];
                for z in 0..o.n_containers {
                    owners.push((kk, z));
                    rows.push(o.container(z, l));
                }
            }
        }
        let mut fresh = Residual::full(self.inst);
        match pack(
            &rows,
            &mut fresh,
            &self.scale,
            &mut self.budget,
            Some(REPACK_STEPS),
        ) {
            PackResult::Packed(nodes) => {
                let mut placed: Vec<Vec<usize>> = self.placed.clone();
                placed[k] = vec![0; opt.n_containers];
                for (t, m) in nodes.into_iter().enumerate() {
                    let (kk, z) = owners[t];
                    placed[kk][z] = m;
                }
                let old_residual = std::mem::replace(&mut self.residual, fresh);
                let old_placed = std::mem::replace(&mut self.placed, placed);
                Some(Undo {
                    residual: old_residual,
                    placed: Some(old_placed),
                })
            }
            PackResult::Infeasible => None,
            PackResult::Aborted => {
                self.inconclusive = true;
                None
            }
        }
    }
}

/// State to restore when backtracking over a placed option. `placed` is only
/// set when the option forced a full repack.
struct Undo {
    residual: Residual,
    placed: Option<Vec<Vec<usize>>>,
}
