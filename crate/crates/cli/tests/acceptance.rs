//! Acceptance suite. Every criterion is evaluated and reported on one line as
//! PASS or FAIL; the process exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p edgemore-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use edgemore::harness::{Figure, Profile};
use edgemore::{
    brute_force, generate, io, option_utility, solve_exact, solve_greedy, solve_naive, validate,
    GenParams, ResourceVector, Scenario, SolveLimits, SolverKind, SweepConfig, SweepResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

const ORACLE_TOL: f64 = 1e-9;
const ORACLE_INSTANCES: usize = 250;
const SOUNDNESS_INSTANCES: usize = 500;
/// Validity does not depend on how long the exact solver ran.
const SOUNDNESS_EXACT_LIMIT_MS: u64 = 200;
const FIG3_MIN_RATIO: f64 = 1.15;
const FIG4_MAX_DEVIATION: f64 = 0.20;
const CALIBRATION_DEMANDS: usize = 100_000;
const CALIBRATION_TOL: f64 = 0.01;
// 1.8 · 8 · 16 / (8 · 50) and 1.8 · 8 · 32 / (8 · 50).
const EXPECTED_MEAN_CPU: f64 = 0.576;
const EXPECTED_MEAN_RAM: f64 = 1.152;
const BOOTSTRAP_RESAMPLES: usize = 10_000;

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut worst: f64 = 0.0;
    for case in 0..ORACLE_INSTANCES {
        let params = GenParams {
            n_providers: rng.gen_range(1..=4),
            n_nodes: rng.gen_range(1..=2),
            options_per_provider: rng.gen_range(1..=3),
            containers_per_option: rng.gen_range(1..=2),
            node_capacity: ResourceVector::new(vec![4.0, 8.0]).unwrap(),
            seed: rng.gen(),
            ..GenParams::default()
        };
        let s = generate(&params).map_err(|e| format!("case {case}: {e}"))?;
        let (_, exact) = solve_exact(&s, SolveLimits::unlimited());
        let (_, oracle) = brute_force(&s).map_err(|e| format!("case {case}: {e}"))?;
        let gap = (exact.objective - oracle.objective).abs();
        if gap > ORACLE_TOL {
            return Err(format!(
                "case {case}: exact {} vs brute force {}",
                exact.objective, oracle.objective
            ));
        }
        if !exact.proven_optimal {
            return Err(format!("case {case}: exact did not prove optimality"));
        }
        worst = worst.max(gap);
    }
    Ok(format!("{ORACLE_INSTANCES} instances, max gap {worst:.1e}"))
}

fn desk_instances() -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x50_0D);
    (0..SOUNDNESS_INSTANCES)
        .map(|_| {
            let params = GenParams {
                n_providers: 12,
                containers_per_option: 4,
                options_per_provider: rng.gen_range(1..=8),
                n_nodes: [2, 3, 4, 8][rng.gen_range(0..4)],
                seed: rng.gen(),
                ..GenParams::default()
            };
            generate(&params).expect("desk parameters are valid")
        })
        .collect()
}

fn constraint_soundness(instances: &[Scenario]) -> Verdict {
    let mut checked = 0;
    for (case, s) in instances.iter().enumerate() {
        let solutions = [
            solve_exact(s, SolveLimits::time_limit_ms(SOUNDNESS_EXACT_LIMIT_MS)),
            solve_greedy(s),
            solve_naive(s, case as u64),
        ];
        for (alloc, report) in &solutions {
            if let Err(v) = validate(s, alloc) {
                return Err(format!("case {case} {}: {}", report.solver_name, v[0]));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} allocations, 0 violations"))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn objectives(result: &SweepResult, value: usize, solver: SolverKind) -> Vec<f64> {
    result
        .samples(value, solver)
        .iter()
        .map(|r| r.utility_pct)
        .collect()
}

/// Paired percentile bootstrap of `mean(b) / mean(a)`.
fn ratio_interval(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB007);
    let n = a.len();
    let mut ratios: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let (mut sa, mut sb) = (0.0, 0.0);
            for _ in 0..n {
                let k = rng.gen_range(0..n);
                sa += a[k];
                sb += b[k];
            }
            sb / sa
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    (
        edgemore::stats::percentile_sorted(&ratios, 2.5),
        edgemore::stats::percentile_sorted(&ratios, 97.5),
    )
}

fn fig3_trend(fig3: &SweepResult, config: &SweepConfig) -> Verdict {
    let values = &config.sweep_values;
    for run in 0..config.runs_per_point {
        for pair in values.windows(2) {
            let lo = objectives(fig3, pair[0], SolverKind::Exact)[run];
            let hi = objectives(fig3, pair[1], SolverKind::Exact)[run];
            if hi < lo {
                return Err(format!(
                    "run {run}: J={} gives {lo:.4}% but J={} gives {hi:.4}%",
                    pair[0], pair[1]
                ));
            }
        }
    }
    let first = objectives(fig3, values[0], SolverKind::Exact);
    let last = objectives(fig3, *values.last().unwrap(), SolverKind::Exact);
    let ratio = mean(&last) / mean(&first);
    let (lo, hi) = ratio_interval(&first, &last);
    let detail = format!(
        "M={}, per-run monotone, ratio {ratio:.3} [{lo:.3}, {hi:.3}]",
        config.base_params.n_nodes
    );
    if ratio >= FIG3_MIN_RATIO && lo > 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fig4_trend(fig4: &SweepResult, config: &SweepConfig) -> Verdict {
    let means: Vec<f64> = config
        .sweep_values
        .iter()
        .map(|&m| fig4.row(m, SolverKind::Exact).unwrap().mean_utility_pct)
        .collect();
    let grand = mean(&means);
    let deviation = means
        .iter()
        .map(|m| (m - grand).abs() / grand)
        .fold(0.0, f64::max);
    let detail = format!(
        "means {:?}, max relative deviation {:.1}%",
        means.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>(),
        deviation * 100.0
    );
    if deviation <= FIG4_MAX_DEVIATION {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn baseline_gap(sweeps: &[(&SweepResult, &SweepConfig)]) -> Verdict {
    let (mut usage, mut per_utility) = (Vec::new(), Vec::new());
    for (result, config) in sweeps {
        for &v in &config.sweep_values {
            let exact = result.row(v, SolverKind::Exact).unwrap();
            let naive = result.row(v, SolverKind::Naive).unwrap();
            if naive.mean_utility_pct >= exact.mean_utility_pct {
                return Err(format!(
                    "{}={v}: naive {:.2}% >= exact {:.2}%",
                    config.sweep_kind.as_str(),
                    naive.mean_utility_pct,
                    exact.mean_utility_pct
                ));
            }
            // Usage is averaged over resource types, as read from the CSV columns.
            let ratio = mean(&naive.mean_usage_fraction) / mean(&exact.mean_usage_fraction);
            usage.push(ratio);
            per_utility.push(ratio * exact.mean_utility_pct / naive.mean_utility_pct);
        }
    }
    let range = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(0.0, f64::max);
        format!("{lo:.2}..{hi:.2}")
    };
    Ok(format!(
        "{} points, naive/exact usage {}, per unit of utility {}",
        usage.len(),
        range(&usage),
        range(&per_utility)
    ))
}

fn generator_calibration() -> Verdict {
    let (mut sum, mut count) = ([0.0; 2], 0);
    let mut seed = 0;
    while count < CALIBRATION_DEMANDS {
        let s = generate(&GenParams {
            seed,
            ..GenParams::default()
        })
        .unwrap();
        for c in s
            .providers()
            .iter()
            .flat_map(|p| &p.options)
            .flat_map(|o| &o.containers)
        {
            sum[0] += c.demands[0];
            sum[1] += c.demands[1];
            count += 1;
        }
        seed += 1;
    }
    let cpu = sum[0] / count as f64;
    let ram = sum[1] / count as f64;
    let detail = format!("{count} demands, mean CPU {cpu:.4} RAM {ram:.4}");
    let close = |x: f64, target: f64| ((x - target) / target).abs() <= CALIBRATION_TOL;
    if close(cpu, EXPECTED_MEAN_CPU) && close(ram, EXPECTED_MEAN_RAM) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn utility_properties(instances: &[Scenario]) -> Verdict {
    let mut seen = 0;
    for s in instances {
        for o in s.providers().iter().flat_map(|p| &p.options) {
            if !(0.0..=1.0).contains(&o.utility) {
                return Err(format!("generated utility {} outside [0, 1]", o.utility));
            }
            seen += 1;
        }
    }
    let totals = ResourceVector::new(vec![128.0, 256.0]).unwrap();
    let mut worst_second: f64 = f64::NEG_INFINITY;
    for &(alpha, beta_cpu, beta_ram) in &[(0.0, 1.0, 5.0), (0.3, 2.0, 1.5), (1.0, 4.5, 1.0)] {
        for coord in 0..2 {
            let fixed = 0.25 * totals[1 - coord];
            let u: Vec<f64> = (0..100)
                .map(|k| {
                    let mut d = vec![0.0; 2];
                    d[coord] = totals[coord] * k as f64 / 99.0;
                    d[1 - coord] = fixed;
                    let d = ResourceVector::new(d).unwrap();
                    option_utility(&d, &totals, alpha, beta_cpu, beta_ram)
                })
                .collect();
            if u.windows(2).any(|w| w[1] < w[0]) {
                return Err(format!("not monotone (alpha {alpha}, coordinate {coord})"));
            }
            for w in u.windows(3) {
                worst_second = worst_second.max(w[2] - 2.0 * w[1] + w[0]);
            }
        }
    }
    let detail =
        format!("{seen} generated utilities in [0, 1], max second difference {worst_second:.1e}");
    if worst_second <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_edgemore"))
        .args(args)
        .env_remove("EDGEMORE_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr).trim()
        ))
    }
}

fn csv_without_runtime(path: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let rt = io::CSV_HEADER
        .iter()
        .position(|h| *h == "mean_runtime_ms")
        .unwrap();
    Ok(text
        .lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != rt)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let same = |a: &str, b: &str| -> Result<(), String> {
        let (x, y) = (std::fs::read(a), std::fs::read(b));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => Ok(()),
            _ => Err(format!("{a} and {b} differ")),
        }
    };

    for tag in ["a", "b"] {
        cli(&[
            "generate",
            "--providers",
            "12",
            "--nodes",
            "3",
            "--options",
            "4",
            "--containers",
            "4",
            "--seed",
            "77",
            "--out",
            &file(&format!("s_{tag}.json")),
        ])?;
    }
    same(&file("s_a.json"), &file("s_b.json"))?;

    let scenario = file("s_a.json");
    for solver in ["exact", "greedy", "naive"] {
        for tag in ["a", "b"] {
            cli(&[
                "solve",
                "--scenario",
                &scenario,
                "--solver",
                solver,
                "--seed",
                "5",
                "--time-limit-ms",
                "0",
                "--out-allocation",
                &file(&format!("{solver}_{tag}.json")),
            ])?;
        }
        same(
            &file(&format!("{solver}_a.json")),
            &file(&format!("{solver}_b.json")),
        )?;
    }

    for (tag, jobs) in [("a", "1"), ("b", "2")] {
        cli(&[
            "--quiet",
            "--jobs",
            jobs,
            "sweep",
            "--figure",
            "fig3",
            "--runs",
            "3",
            "--base-seed",
            "9",
            "--time-limit-ms",
            "0",
            "--out",
            &file(&format!("f3_{tag}.csv")),
        ])?;
    }
    let (a, b) = (
        csv_without_runtime(Path::new(&file("f3_a.csv")))?,
        csv_without_runtime(Path::new(&file("f3_b.csv")))?,
    );
    if a != b {
        return Err("sweep CSVs differ outside the runtime column".into());
    }
    Ok("scenario, 3 allocations and sweep CSV byte-identical across executions".into())
}

fn main() {
    let start = Instant::now();
    let instances = desk_instances();

    let fig3_config = SweepConfig {
        solvers: vec![SolverKind::Exact, SolverKind::Naive],
        ..SweepConfig::figure(Figure::Fig3, Profile::Desk)
    };
    let fig4_config = SweepConfig {
        solvers: vec![SolverKind::Exact, SolverKind::Naive],
        ..SweepConfig::figure(Figure::Fig4, Profile::Desk)
    };
    let fig3 = edgemore::run_sweep(&fig3_config).expect("fig3 sweep");
    let fig4 = edgemore::run_sweep(&fig4_config).expect("fig4 sweep");

    let verdicts: Vec<(&str, Verdict)> = vec![
        ("oracle equivalence", oracle_equivalence()),
        ("constraint soundness", constraint_soundness(&instances)),
        ("fig3 trend", fig3_trend(&fig3, &fig3_config)),
        ("fig4 trend", fig4_trend(&fig4, &fig4_config)),
        (
            "baseline gap",
            baseline_gap(&[(&fig3, &fig3_config), (&fig4, &fig4_config)]),
        ),
        ("generator calibration", generator_calibration()),
        ("utility properties", utility_properties(&instances)),
        ("determinism", determinism()),
    ];

    let mut failed = Vec::new();
    for (name, verdict) in &verdicts {
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(*name);
            }
        }
    }
    println!(
        "acceptance finished in {:.1} s",
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
