//! Upper bounds on the utility still attainable from a suffix of providers.
//!
//! Each bound relaxes the per-node capacities into one aggregate budget along
//! a fixed non-negative direction of resource space (one direction per
//! resource type plus their normalized sum) and solves the linear relaxation
//! of the resulting multiple-choice knapsack exactly: the upper concave hull
//! of every provider's (weight, utility) points, filled greedily by slope.

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug)]
struct Segment {
    slope: f64,
    weight: f64,
    gain: f64,
}

pub(crate) struct SuffixBound {
    /// `directions[d][l]`: weight of resource `l` in direction `d`.
    directions: Vec<Vec<f64>>,
    /// `segments[d][k]`: hull segments of providers `k..`, by descending slope.
    segments: Vec<Vec<Vec<Segment>>>,
    /// `max_sum[k]`: sum of the best utility of providers `k..`.
    max_sum: Vec<f64>,
    slack: Vec<f64>,
}

impl SuffixBound {
    /// `providers[k]` lists `(aggregate demand, utility)` of the candidate
    /// options of the provider at search position `k`.
    pub fn new(providers: &[Vec<(&[f64], f64)>], total_capacity: &[f64], tolerance: f64) -> Self {
        let l = total_capacity.len();
        let mut directions: Vec<Vec<f64>> = (0..l)
            .map(|r| {
                (0..l)
                    .map(|q| if q == r { 1.0 / total_capacity[r] } else { 0.0 })
                    .collect()
            })
            .collect();
        if l > 1 {
            directions.push(total_capacity.iter().map(|c| 1.0 / c).collect());
        }
        let slack = directions
            .iter()
            .map(|w| w.iter().sum::<f64>() * tolerance)
            .collect();

        let n = providers.len();
        let segments = directions
            .iter()
            .map(|w| {
                let per_provider: Vec<Vec<Segment>> = providers
                    .iter()
                    .map(|opts| hull_segments(opts.iter().map(|(d, u)| (dot(w, d), *u))))
                    .collect();
                let mut suffixes = vec![Vec::new(); n + 1];
                let mut acc: Vec<Segment> = Vec::new();
                for k in (0..n).rev() {
                    acc.extend_from_slice(&per_provider[k]);
                    acc.sort_by(|a, b| b.slope.partial_cmp(&a.slope).unwrap_or(Ordering::Equal));
                    suffixes[k] = acc.clone();
                }
                suffixes
            })
            .collect();

        let mut max_sum = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let best = providers[k].iter().map(|(_, u)| *u).fold(0.0, f64::max);
            max_sum[k] = max_sum[k + 1] + best;
        }

        Self {
            directions,
            segments,
            max_sum,
            slack,
        }
    }

    /// Upper bound on the utility of providers `k..` given the aggregate
    /// residual capacity per resource type.
    pub fn bound(&self, k: usize, residual_total: &[f64]) -> f64 {
        let mut best = self.max_sum[k];
        for (d, w) in self.directions.iter().enumerate() {
            let budget = (dot(w, residual_total) + self.slack[d]).max(0.0);
            best = best.min(fill(&self.segments[d][k], budget));
        }
        best
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fill(segments: &[Segment], mut budget: f64) -> f64 {
    let mut value = 0.0;
    for s in segments {
        if s.weight <= budget {
            budget -= s.weight;
            value += s.gain;
        } else {
            value += s.gain * budget / s.weight;
            break;
        }
    }
    value
}

/// Segments of the upper concave hull through the origin and the given
/// `(weight, utility)` points, skipping dominated points.
fn hull_segments(points: impl Iterator<Item = (f64, f64)>) -> Vec<Segment> {
    let mut pts: Vec<(f64, f64)> = points.filter(|(_, u)| *u > 0.0).collect();
    pts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
    });

    let mut hull: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for p in pts {
        if p.1 <= hull.last().map_or(0.0, |h| h.1) {
            continue;
        }
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    hull.windows(2)
        .map(|w| {
            let weight = w[1].0 - w[0].0;
            let gain = w[1].1 - w[0].1;
            let slope = if weight > 0.0 {
                gain / weight
            } else {
                f64::INFINITY
            };
            Segment {
                slope,
                weight,
                gain,
            }
        })
        .collect()
}
