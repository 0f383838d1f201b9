//! Parameter sweeps over generated scenarios: options per provider (utility
//! versus `J` at a fixed cluster) and cluster size (utility versus `M` with
//! the load factor held fixed), each aggregated over seeded runs.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;
use crate::exact::{solve_exact, SolveLimits};
use crate::gen::{derive_seed, generate, GenParams};
use crate::heuristics::{solve_greedy, solve_naive};
use crate::stats::aggregate;

/// Node count of the desk-scale options sweep.
pub const DESK_FIG3_NODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Vary options per provider `J`.
    Options,
    /// Vary node count `M`, recalibrating demands to the same load factor.
    Nodes,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Options => "options",
            SweepKind::Nodes => "nodes",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "options" => Ok(SweepKind::Options),
            "nodes" => Ok(SweepKind::Nodes),
            other => Err(format!("unknown sweep kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Greedy,
    Naive,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Exact, SolverKind::Greedy, SolverKind::Naive];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Exact => crate::exact::EXACT,
            SolverKind::Greedy => crate::heuristics::GREEDY,
            SolverKind::Naive => crate::heuristics::NAIVE,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown solver `{s}` (expected exact, greedy or naive)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Reduced scale: 12 providers, 4 containers per option.
    Desk,
    /// 50 providers, 8 containers per option. No runtime guarantee.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sweep_kind: SweepKind,
    pub sweep_values: Vec<usize>,
    pub base_params: GenParams,
    pub solvers: Vec<SolverKind>,
    pub runs_per_point: usize,
    pub base_seed: u64,
    pub limits: SolveLimits,
}

impl SweepConfig {
    /// The preset sweep behind one of the two reproduction figures.
    pub fn figure(figure: Figure, profile: Profile) -> Self {
        let base = match profile {
            Profile::Desk => GenParams {
                n_providers: 12,
                containers_per_option: 4,
                ..GenParams::default()
            },
            Profile::Paper => GenParams::default(),
        };
        let (sweep_kind, sweep_values, base_params) = match (figure, profile) {
            (Figure::Fig3, Profile::Desk) => (
                SweepKind::Options,
                (1..=8).collect(),
                GenParams {
                    n_nodes: DESK_FIG3_NODES,
                    ..base
                },
            ),
            (Figure::Fig3, Profile::Paper) => (
                SweepKind::Options,
                (1..=8).collect(),
                GenParams { n_nodes: 8, ..base },
            ),
            (Figure::Fig4, Profile::Desk) => (
                SweepKind::Nodes,
                vec![2, 4, 8],
                GenParams {
                    options_per_provider: 5,
                    ..base
                },
            ),
            (Figure::Fig4, Profile::Paper) => (
                SweepKind::Nodes,
                vec![2, 4, 8, 16, 32],
                GenParams {
                    options_per_provider: 5,
                    ..base
                },
            ),
        };
        Self {
            sweep_kind,
            sweep_values,
            base_params,
            solvers: SolverKind::ALL.to_vec(),
            runs_per_point: 20,
            base_seed: 1,
            limits: SolveLimits::time_limit_ms(60_000),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sweep_values.is_empty() {
            return Err(HarnessError::Config("sweep_values is empty".into()));
        }
        if self.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config(
                "sweep_values must be strictly increasing".into(),
            ));
        }
        if self.runs_per_point == 0 {
            return Err(HarnessError::Config(
                "runs_per_point must be at least 1".into(),
            ));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::Config("no solvers selected".into()));
        }
        for &v in &self.sweep_values {
            self.point_params(v, 0).validate()?;
        }
        Ok(())
    }

    /// Scenario seed of run `run` at sweep value `value`.
    ///
    /// Options sweeps ignore `value`: the scenario at `J` is then the scenario
    /// at `J - 1` with one more option per provider.
    pub fn run_seed(&self, value: usize, run: usize) -> u64 {
        match self.sweep_kind {
            SweepKind::Options => derive_seed(self.base_seed, &[run as u64]),
            SweepKind::Nodes => derive_seed(self.base_seed, &[value as u64, run as u64]),
        }
    }

    pub fn point_params(&self, value: usize, run: usize) -> GenParams {
        let mut p = self.base_params.clone();
        match self.sweep_kind {
            SweepKind::Options => p.options_per_provider = value,
            SweepKind::Nodes => p.n_nodes = value,
        }
        p.seed = self.run_seed(value, run);
        p
    }

    /// Hex SHA-256 of the configuration's JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// One solve within a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sweep_kind: SweepKind,
    pub sweep_value: usize,
    pub run: usize,
    pub seed: u64,
    pub params: GenParams,
    pub solver: SolverKind,
    pub objective: f64,
    pub utility_pct: f64,
    pub usage: Vec<f64>,
    pub runtime_ms: f64,
    pub proven_optimal: bool,
}

/// Aggregate of every run of one solver at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_kind: SweepKind,
    pub sweep_value: usize,
    pub solver: SolverKind,
    pub mean_utility_pct: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub mean_usage_fraction: Vec<f64>,
    pub mean_runtime_ms: f64,
    pub n_runs: usize,
    pub n_proven_optimal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Every solve, ordered by (value, run, solver).
    pub runs: Vec<RunRecord>,
}

impl SweepResult {
    pub fn row(&self, value: usize, solver: SolverKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == value && r.solver == solver)
    }

    /// Per-run objectives of `solver` at `value`, in run order.
    pub fn samples(&self, value: usize, solver: SolverKind) -> Vec<&RunRecord> {
        self.runs
            .iter()
            .filter(|r| r.sweep_value == value && r.solver == solver)
            .collect()
    }
}

/// Runs the sweep on the current rayon pool. The result does not depend on
/// the pool size, apart from measured runtimes.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .sweep_values
        .iter()
        .flat_map(|&v| (0..config.runs_per_point).map(move |r| (v, r)))
        .collect();

    let per_job: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(v, r)| solve_point(config, v, r))
        .collect::<Result<_, _>>()?;
    let runs: Vec<RunRecord> = per_job.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for &v in &config.sweep_values {
        for &solver in &config.solvers {
            let records: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.sweep_value == v && r.solver == solver)
                .collect();
            let utility: Vec<f64> = records.iter().map(|r| r.utility_pct).collect();
            let summary = aggregate(&utility)?;
            let n = records.len() as f64;
            let n_res = records.first().map_or(0, |r| r.usage.len());
            let mean_usage_fraction = (0..n_res)
                .map(|l| records.iter().map(|r| r.usage[l]).sum::<f64>() / n)
                .collect();
            rows.push(SweepRow {
                sweep_kind: config.sweep_kind,
                sweep_value: v,
                solver,
                mean_utility_pct: summary.mean,
                ci95_low: summary.ci95_low,
                ci95_high: summary.ci95_high,
                mean_usage_fraction,
                mean_runtime_ms: records.iter().map(|r| r.runtime_ms).sum::<f64>() / n,
                n_runs: records.len(),
                n_proven_optimal: records.iter().filter(|r| r.proven_optimal).count(),
            });
        }
    }
    Ok(SweepResult { rows, runs })
}

fn solve_point(
    config: &SweepConfig,
    value: usize,
    run: usize,
) -> Result<Vec<RunRecord>, HarnessError> {
    let params = config.point_params(value, run);
    let scenario = generate(&params)?;
    let records = config
        .solvers
        .iter()
        .map(|&solver| {
            let start = Instant::now();
            let (_, report) = match solver {
                SolverKind::Exact => solve_exact(&scenario, config.limits),
                SolverKind::Greedy => solve_greedy(&scenario),
                SolverKind::Naive => solve_naive(&scenario, params.seed),
            };
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            RunRecord {
                sweep_kind: config.sweep_kind,
                sweep_value: value,
                run,
                seed: params.seed,
                params: params.clone(),
                solver,
                objective: report.objective,
                utility_pct: report.utility_pct,
                usage: report.usage_fraction.as_slice().to_vec(),
                runtime_ms,
                proven_optimal: report.proven_optimal,
            }
        })
        .collect();
    Ok(records)
}
