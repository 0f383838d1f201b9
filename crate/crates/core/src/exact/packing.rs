//! Exact feasibility search for placing a set of containers onto nodes
//! (multi-dimensional bin packing with heterogeneous bins).
//!
//! Cheap best-fit passes under several item orders and fit rules run first;
//! most feasible sets are packed there. The complete search that follows
//! fills one node at a time.

use std::cmp::Ordering;

use crate::instance::Residual;
use crate::model::FEASIBILITY_TOL;

use super::Budget;

#[derive(Debug, PartialEq)]
pub(crate) enum PackResult {
    Packed(Vec<usize>),
    Infeasible,
    /// The time budget or the step cap ran out first.
    Aborted,
}

/// Searches for an assignment of `items` (demand rows of length
/// `residual.n_res`) to nodes, starting from `residual`. `scale` holds a
/// per-resource normalizer for fit scores. On success `residual` holds the
/// loaded state and the returned vector gives the node of each item;
/// otherwise `residual` is left unchanged. `max_steps` caps the complete
/// search; exceeding it reports [`PackResult::Aborted`].
pub(crate) fn pack(
    items: &[&[f64]],
    residual: &mut Residual,
    scale: &[f64],
    budget: &mut Budget,
    max_steps: Option<u64>,
) -> PackResult {
    if items.is_empty() {
        return PackResult::Packed(Vec::new());
    }
    if let Some(nodes) = heuristic(items, residual, scale) {
        return PackResult::Packed(nodes);
    }
    let snapshot = residual.clone();
    let mut search = BinSearch::new(items, scale, budget, max_steps);
    match search.run(residual) {
        Some(nodes) => PackResult::Packed(nodes),
        None => {
            *residual = snapshot;
            if search.aborted {
                PackResult::Aborted
            } else {
                PackResult::Infeasible
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Rule {
    /// Node left with the least normalized slack.
    Tightest,
    /// Node whose free vector is most aligned with the item.
    Aligned,
}

fn normalized<'a>(row: &'a [f64], scale: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    row.iter().zip(scale).map(|(d, c)| d / c)
}

/// Normalized slack left on a node after placing `demand`; smaller is tighter.
fn slack_after(free: &[f64], demand: &[f64], scale: &[f64]) -> f64 {
    free.iter()
        .zip(demand)
        .zip(scale)
        .map(|((f, d), c)| (f - d) / c)
        .fold(f64::INFINITY, f64::min)
}

fn sorted_desc(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

fn heuristic(items: &[&[f64]], residual: &mut Residual, scale: &[f64]) -> Option<Vec<usize>> {
    let l = residual.n_res;
    let mut keys: Vec<Vec<f64>> = vec![
        items
            .iter()
            .map(|r| normalized(r, scale).fold(0.0, f64::max))
            .collect(),
        items.iter().map(|r| normalized(r, scale).sum()).collect(),
    ];
    keys.extend((0..l).map(|d| items.iter().map(|r| r[d] / scale[d]).collect()));
    for key in &keys {
        let order = sorted_desc(key);
        for rule in [Rule::Tightest, Rule::Aligned] {
            if let Some(nodes) = fit_in_order(items, &order, residual, scale, rule) {
                return Some(nodes);
            }
        }
    }
    None
}

fn fit_in_order(
    items: &[&[f64]],
    order: &[usize],
    residual: &mut Residual,
    scale: &[f64],
    rule: Rule,
) -> Option<Vec<usize>> {
    let mut trial = residual.clone();
    let mut nodes = vec![0; items.len()];
    for &t in order {
        let demand = items[t];
        let mut best: Option<(f64, usize)> = None;
        for m in 0..trial.n_nodes() {
            if !trial.fits(m, demand) {
                continue;
            }
            let score = match rule {
                Rule::Tightest => slack_after(trial.node(m), demand, scale),
                Rule::Aligned => -normalized(demand, scale)
                    .zip(normalized(trial.node(m), scale))
                    .map(|(a, b)| a * b)
                    .sum::<f64>(),
            };
            if best.is_none_or(|(b, _)| score < b) {
                best = Some((score, m));
            }
        }
        let (_, m) = best?;
        trial.take(m, demand);
        nodes[t] = m;
    }
    *residual = trial;
    Some(nodes)
}

/// Fills nodes one at a time. Every node's final waste in each resource is
/// at most the total slack (free space minus demand) left over, so only
/// subsets whose load lands in that window are enumerated.
struct BinSearch<'a, 'b> {
    /// Items by decreasing normalized size.
    items: Vec<&'a [f64]>,
    /// Position in `items` of each original item.
    position: Vec<usize>,
    node: Vec<usize>,
    used: Vec<bool>,
    budget: &'b mut Budget,
    steps: u64,
    max_steps: Option<u64>,
    aborted: bool,
}

impl<'a, 'b> BinSearch<'a, 'b> {
    fn new(
        items: &[&'a [f64]],
        scale: &[f64],
        budget: &'b mut Budget,
        max_steps: Option<u64>,
    ) -> Self {
        let key: Vec<f64> = items
            .iter()
            .map(|r| normalized(r, scale).fold(0.0, f64::max))
            .collect();
        let order = sorted_desc(&key);
        let mut position = vec![0; items.len()];
        for (p, &t) in order.iter().enumerate() {
            position[t] = p;
        }
        Self {
            items: order.iter().map(|&t| items[t]).collect(),
            position,
            node: vec![usize::MAX; items.len()],
            used: vec![false; items.len()],
            budget,
            steps: 0,
            max_steps,
            aborted: false,
        }
    }

    /// Node of each original item, or `None` when no packing exists or the
    /// search was cut short (see `aborted`).
    fn run(&mut self, residual: &mut Residual) -> Option<Vec<usize>> {
        let l = residual.n_res;
        let n = residual.n_nodes();
        let mut slack: Vec<f64> = (0..l)
            .map(|r| {
                (0..n).map(|m| residual.node(m)[r]).sum::<f64>()
                    - self.items.iter().map(|row| row[r]).sum::<f64>()
                    + FEASIBILITY_TOL * n as f64
            })
            .collect();
        if slack.iter().any(|s| *s < 0.0) {
            return None;
        }
        if !self.fill(0, residual, &mut slack) {
            return None;
        }
        Some(self.position.iter().map(|&p| self.node[p]).collect())
    }

    fn tick(&mut self) -> bool {
        self.steps += 1;
        if self.budget.tick() || self.max_steps.is_some_and(|cap| self.steps > cap) {
            self.aborted = true;
        }
        self.aborted
    }

    fn fill(&mut self, m: usize, residual: &mut Residual, slack: &mut [f64]) -> bool {
        let n = residual.n_nodes();
        let rest: Vec<usize> = (0..self.items.len()).filter(|&p| !self.used[p]).collect();
        if rest.is_empty() {
            return true;
        }
        if m == n || self.tick() {
            return false;
        }
        // Every remaining item needs a node from `m` on.
        if rest
            .iter()
            .any(|&p| !(m..n).any(|k| residual.fits(k, self.items[p])))
        {
            return false;
        }
        let candidates: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|&p| residual.fits(m, self.items[p]))
            .collect();
        // With all remaining nodes alike, the largest remaining item can be
        // assumed to go to this one.
        let row = residual.node(m).to_vec();
        let alike = (m + 1..n).all(|k| residual.node(k) == row.as_slice());
        let anchor = if alike { rest.first().copied() } else { None };
        if anchor.is_some_and(|a| candidates.first() != Some(&a)) {
            return false;
        }
        let l = residual.n_res;
        let mut suffix = vec![vec![0.0; l]; candidates.len() + 1];
        for c in (0..candidates.len()).rev() {
            let item = self.items[candidates[c]];
            suffix[c] = suffix[c + 1].iter().zip(item).map(|(s, d)| s + d).collect();
        }
        let mut load = vec![0.0; l];
        let mut chosen = Vec::new();
        self.subsets(
            m,
            &candidates,
            &suffix,
            0,
            anchor.is_some(),
            &row,
            &mut load,
            &mut chosen,
            residual,
            slack,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &mut self,
        m: usize,
        candidates: &[usize],
        suffix: &[Vec<f64>],
        c: usize,
        anchored: bool,
        free: &[f64],
        load: &mut Vec<f64>,
        chosen: &mut Vec<usize>,
        residual: &mut Residual,
        slack: &mut [f64],
    ) -> bool {
        let l = free.len();
        // The window cannot be reached even taking every remaining candidate.
        if (0..l).any(|r| free[r] - load[r] - suffix[c][r] > slack[r]) {
            return false;
        }
        if c == candidates.len() {
            let waste: Vec<f64> = (0..l).map(|r| (free[r] - load[r]).max(0.0)).collect();
            for &p in chosen.iter() {
                self.used[p] = true;
                self.node[p] = m;
            }
            for r in 0..l {
                slack[r] -= waste[r];
            }
            let saved = residual.node(m).to_vec();
            residual.take(m, load);
            let ok = self.fill(m + 1, residual, slack);
            if !ok {
                residual.free[m * l..(m + 1) * l].copy_from_slice(&saved);
                for r in 0..l {
                    slack[r] += waste[r];
                }
                for &p in chosen.iter() {
                    self.used[p] = false;
                }
            }
            return ok;
        }
        if self.tick() {
            return false;
        }
        let p = candidates[c];
        let row = self.items[p];
        if (0..l).all(|r| load[r] + row[r] <= free[r] + FEASIBILITY_TOL) {
            for r in 0..l {
                load[r] += row[r];
            }
            chosen.push(p);
            let ok = self.subsets(
                m,
                candidates,
                suffix,
                c + 1,
                false,
                free,
                load,
                chosen,
                residual,
                slack,
            );
            chosen.pop();
            for r in 0..l {
                load[r] -= row[r];
            }
            if ok || self.aborted {
                return ok;
            }
        }
        if anchored {
            return false;
        }
        self.subsets(
            m,
            candidates,
            suffix,
            c + 1,
            false,
            free,
            load,
            chosen,
            residual,
            slack,
        )
    }
}
