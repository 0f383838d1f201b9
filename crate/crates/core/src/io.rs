//! File formats: scenario and allocation JSON, solve reports, sweep CSV and
//! the per-run JSON-lines log.
//!
//! Numbers are written with the shortest representation that round-trips to
//! the same `f64`, so write-then-read is lossless.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::gen::{GeneratorMeta, PRNG_NAME};
use crate::harness::{RunRecord, SweepConfig, SweepKind, SweepResult, SweepRow};
use crate::model::{
    Allocation, ContainerId, ContainerKey, NodeId, NodeSpec, OptionId, ProviderId, ResourceType,
    Scenario, ServiceProvider,
};
use crate::report::SolveReport;
use crate::validate::Violation;

pub const SCENARIO_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 11] = [
    "sweep_kind",
    "sweep_value",
    "solver",
    "mean_utility_pct",
    "ci95_low",
    "ci95_high",
    "mean_cpu_usage",
    "mean_ram_usage",
    "mean_runtime_ms",
    "n_runs",
    "n_proven_optimal",
];

/// Provenance attached to every file the tool writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileMeta {
    pub tool: String,
    pub version: String,
    pub prng: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl FileMeta {
    pub fn new(config_hash: Option<String>) -> Self {
        Self {
            tool: "edgemore".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            prng: PRNG_NAME.into(),
            config_hash,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: u32,
    resource_types: Vec<ResourceType>,
    nodes: Vec<NodeSpec>,
    providers: Vec<ServiceProvider>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChoiceDoc {
    provider: ProviderId,
    option: OptionId,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlacementDoc {
    provider: ProviderId,
    option: OptionId,
    container: ContainerId,
    node: NodeId,
}

#[derive(Debug, Serialize, Deserialize)]
struct AllocationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<FileMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    choices: Vec<ChoiceDoc>,
    placements: Vec<PlacementDoc>,
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    meta: FileMeta,
    #[serde(flatten)]
    report: SolveReport,
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_err(path: &Path, e: serde_json::Error) -> IoError {
    IoError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory serialization");
    out.push(b'\n');
    out
}

pub fn scenario_to_json(scenario: &Scenario, generator: Option<&GeneratorMeta>) -> Vec<u8> {
    to_json(&ScenarioDoc {
        version: SCENARIO_VERSION,
        resource_types: scenario.resource_types().to_vec(),
        nodes: scenario.nodes().to_vec(),
        providers: scenario.providers().to_vec(),
        generator: generator.cloned(),
    })
}

/// Parses a scenario document; `path` is only used in error messages.
pub fn scenario_from_json(
    text: &str,
    path: &Path,
) -> Result<(Scenario, Option<GeneratorMeta>), IoError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| json_err(path, e))?;
    if doc.version != SCENARIO_VERSION {
        return Err(IoError::Version {
            path: path.to_path_buf(),
            found: doc.version,
            expected: SCENARIO_VERSION,
        });
    }
    let scenario =
        Scenario::new(doc.resource_types, doc.nodes, doc.providers).map_err(|source| {
            IoError::Model {
                path: path.to_path_buf(),
                source,
            }
        })?;
    Ok((scenario, doc.generator))
}

pub fn write_scenario(
    path: &Path,
    scenario: &Scenario,
    generator: Option<&GeneratorMeta>,
) -> Result<(), IoError> {
    write(path, &scenario_to_json(scenario, generator))
}

pub fn read_scenario(path: &Path) -> Result<Scenario, IoError> {
    read_scenario_with_meta(path).map(|(s, _)| s)
}

pub fn read_scenario_with_meta(path: &Path) -> Result<(Scenario, Option<GeneratorMeta>), IoError> {
    scenario_from_json(&read(path)?, path)
}

/// Writes the allocation together with the deterministic part of its report
/// (solver name and objective); the full report goes through [`write_report`].
pub fn write_allocation(
    path: &Path,
    alloc: &Allocation,
    report: Option<&SolveReport>,
) -> Result<(), IoError> {
    let doc = AllocationDoc {
        meta: Some(FileMeta::new(None)),
        solver: report.map(|r| r.solver_name.clone()),
        objective: report.map(|r| r.objective),
        choices: alloc
            .choices()
            .iter()
            .map(|(&provider, &option)| ChoiceDoc { provider, option })
            .collect(),
        placements: alloc
            .placements()
            .iter()
            .map(|(k, &node)| PlacementDoc {
                provider: k.provider,
                option: k.option,
                container: k.container,
                node,
            })
            .collect(),
    };
    write(path, &to_json(&doc))
}

/// Outcome of reading an allocation file: either a well-formed allocation or
/// the structural violations (duplicate choices or placements) that a map
/// cannot hold.
pub type ParsedAllocation = Result<Allocation, Vec<Violation>>;

pub fn read_allocation(path: &Path) -> Result<ParsedAllocation, IoError> {
    let text = read(path)?;
    let doc: AllocationDoc = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    Ok(Allocation::from_parts(
        doc.choices.into_iter().map(|c| (c.provider, c.option)),
        doc.placements
            .into_iter()
            .map(|p| (ContainerKey::new(p.provider, p.option, p.container), p.node)),
    ))
}

pub fn write_report(path: &Path, report: &SolveReport) -> Result<(), IoError> {
    write(
        path,
        &to_json(&ReportDoc {
            meta: FileMeta::new(None),
            report: report.clone(),
        }),
    )
}

pub fn read_report(path: &Path) -> Result<SolveReport, IoError> {
    let text = read(path)?;
    let doc: ReportDoc = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    Ok(doc.report)
}

/// Path of the metadata sidecar written next to a results CSV.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize, Deserialize)]
struct ResultsMeta {
    meta: FileMeta,
    config: SweepConfig,
}

/// Serializes the aggregated rows as CSV with the fixed [`CSV_HEADER`].
pub fn results_to_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory csv");
    let usage = |r: &SweepRow, l: usize| r.mean_usage_fraction.get(l).copied().unwrap_or(0.0);
    for r in rows {
        w.write_record([
            r.sweep_kind.to_string(),
            r.sweep_value.to_string(),
            r.solver.to_string(),
            r.mean_utility_pct.to_string(),
            r.ci95_low.to_string(),
            r.ci95_high.to_string(),
            usage(r, 0).to_string(),
            usage(r, 1).to_string(),
            r.mean_runtime_ms.to_string(),
            r.n_runs.to_string(),
            r.n_proven_optimal.to_string(),
        ])
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Writes the CSV and, next to it, a `.meta.json` sidecar with the tool
/// version, PRNG and configuration hash.
pub fn write_results(
    path: &Path,
    result: &SweepResult,
    config: &SweepConfig,
) -> Result<(), IoError> {
    write(path, &results_to_csv(&result.rows))?;
    let meta = ResultsMeta {
        meta: FileMeta::new(Some(config.hash())),
        config: config.clone(),
    };
    write(&meta_path(path), &to_json(&meta))
}

pub fn read_results(path: &Path) -> Result<Vec<SweepRow>, IoError> {
    let text = read(path)?;
    results_from_csv(&text, path)
}

pub fn results_from_csv(text: &str, path: &Path) -> Result<Vec<SweepRow>, IoError> {
    let csv_err = |line: u64, field: &str, message: String| IoError::Csv {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| csv_err(1, "header", e.to_string()))?
        .clone();
    for name in CSV_HEADER {
        if !header.iter().any(|h| h == name) {
            return Err(csv_err(1, name, "missing column".into()));
        }
    }
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .expect("checked above")
    };

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, "record", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |name: &str| record.get(col(name)).unwrap_or("");
        fn parse<T: std::str::FromStr>(
            raw: &str,
            name: &str,
            line: u64,
            err: &dyn Fn(u64, &str, String) -> IoError,
        ) -> Result<T, IoError> {
            raw.parse()
                .map_err(|_| err(line, name, format!("cannot parse `{raw}`")))
        }
        let kind: SweepKind = get("sweep_kind")
            .parse()
            .map_err(|e: String| csv_err(line, "sweep_kind", e))?;
        let solver = get("solver")
            .parse()
            .map_err(|e: String| csv_err(line, "solver", e))?;
        rows.push(SweepRow {
            sweep_kind: kind,
            sweep_value: parse(get("sweep_value"), "sweep_value", line, &csv_err)?,
            solver,
            mean_utility_pct: parse(get("mean_utility_pct"), "mean_utility_pct", line, &csv_err)?,
            ci95_low: parse(get("ci95_low"), "ci95_low", line, &csv_err)?,
            ci95_high: parse(get("ci95_high"), "ci95_high", line, &csv_err)?,
            mean_usage_fraction: vec![
                parse(get("mean_cpu_usage"), "mean_cpu_usage", line, &csv_err)?,
                parse(get("mean_ram_usage"), "mean_ram_usage", line, &csv_err)?,
            ],
            mean_runtime_ms: parse(get("mean_runtime_ms"), "mean_runtime_ms", line, &csv_err)?,
            n_runs: parse(get("n_runs"), "n_runs", line, &csv_err)?,
            n_proven_optimal: parse(get("n_proven_optimal"), "n_proven_optimal", line, &csv_err)?,
        });
    }
    Ok(rows)
}

/// JSON lines: a metadata object, then one object per solve.
pub fn write_run_log(path: &Path, runs: &[RunRecord], config: &SweepConfig) -> Result<(), IoError> {
    let mut out = Vec::new();
    let meta = serde_json::json!({ "meta": FileMeta::new(Some(config.hash())) });
    serde_json::to_writer(&mut out, &meta).expect("in-memory serialization");
    out.push(b'\n');
    for r in runs {
        serde_json::to_writer(&mut out, r).expect("in-memory serialization");
        out.write_all(b"\n").expect("in-memory write");
    }
    write(path, &out)
}
