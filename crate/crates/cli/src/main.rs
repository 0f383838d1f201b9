//! `edgemore`: generate scenarios, solve them, validate allocations and run
//! the reproduction sweeps.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgemore::gen::GeneratorMeta;
use edgemore::harness::{Figure, Profile};
use edgemore::{
    generate, io, mean_demand, run_sweep, solve_exact, solve_greedy, solve_naive, validate,
    GenParams, IoError, ResourceVector, SolveLimits, SolveReport, SolverKind, SweepConfig,
};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "edgemore",
    version,
    about = "Option selection and container placement on edge clusters"
)]
struct Cli {
    /// Suppress summaries on standard output. Files are still written.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for sweeps (default: available processors).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario.
    Generate(GenerateArgs),
    /// Solve a scenario with one solver.
    Solve(SolveArgs),
    /// Run a reproduction sweep and write the aggregated CSV.
    Sweep(SweepArgs),
    /// Check an allocation against a scenario.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 50)]
    providers: usize,
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    /// Options per provider.
    #[arg(long, default_value_t = 5)]
    options: usize,
    /// Containers per option.
    #[arg(long, default_value_t = 8)]
    containers: usize,
    #[arg(long, default_value_t = 1.8)]
    load_factor: f64,
    /// CPU capacity of every node (cores).
    #[arg(long, default_value_t = 16.0)]
    cpu: f64,
    /// RAM capacity of every node (GB).
    #[arg(long, default_value_t = 32.0)]
    ram: f64,
    #[arg(long, env = "EDGEMORE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Greedy,
    Naive,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    /// Seed of the naive solver.
    #[arg(long, env = "EDGEMORE_SEED", default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit of the exact solver; 0 disables it.
    #[arg(long, default_value_t = 60_000)]
    time_limit_ms: u64,
    #[arg(long)]
    out_allocation: Option<PathBuf>,
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig3,
    Fig4,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    figure: FigureArg,
    #[arg(long, value_enum, default_value = "desk")]
    profile: ProfileArg,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, env = "EDGEMORE_SEED", default_value_t = 1)]
    base_seed: u64,
    /// Comma-separated subset of exact, greedy, naive.
    #[arg(long, value_delimiter = ',', default_value = "exact,greedy,naive")]
    solvers: Vec<String>,
    /// Per-instance wall-clock limit of the exact solver; 0 disables it.
    #[arg(long, default_value_t = 60_000)]
    time_limit_ms: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional per-solve JSON lines log.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        // Only fails if a global pool already exists, which never happens here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let out = Output { quiet: cli.quiet };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a, &out),
        Command::Solve(a) => cmd_solve(a, &out),
        Command::Sweep(a) => cmd_sweep(a, &out),
        Command::Validate(a) => cmd_validate(a, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Output {
    quiet: bool,
}

impl Output {
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

fn cmd_generate(a: GenerateArgs, out: &Output) -> Outcome {
    let node_capacity = ResourceVector::new(vec![a.cpu, a.ram]).map_err(Failure::usage)?;
    let params = GenParams {
        n_providers: a.providers,
        n_nodes: a.nodes,
        options_per_provider: a.options,
        containers_per_option: a.containers,
        load_factor: a.load_factor,
        node_capacity,
        seed: a.seed,
        ..GenParams::default()
    };
    let scenario = generate(&params).map_err(Failure::usage)?;
    io::write_scenario(&a.out, &scenario, Some(&GeneratorMeta::new(&params)))?;
    let w = mean_demand(&params);
    out.say(&format!(
        "{} providers, {} options, {} containers, {} nodes; mean demand CPU {:.4} RAM {:.4} -> {}",
        scenario.providers().len(),
        scenario
            .providers()
            .iter()
            .map(|p| p.options.len())
            .sum::<usize>(),
        scenario.container_count(),
        scenario.nodes().len(),
        w[0],
        w[1],
        a.out.display()
    ));
    Ok(0)
}

fn cmd_solve(a: SolveArgs, out: &Output) -> Outcome {
    let scenario = io::read_scenario(&a.scenario)?;
    let (alloc, report) = match a.solver {
        SolverArg::Exact => solve_exact(&scenario, SolveLimits::time_limit_ms(a.time_limit_ms)),
        SolverArg::Greedy => solve_greedy(&scenario),
        SolverArg::Naive => solve_naive(&scenario, a.seed),
    };
    if let Some(path) = &a.out_allocation {
        io::write_allocation(path, &alloc, Some(&report))?;
    }
    if let Some(path) = &a.out_report {
        io::write_report(path, &report)?;
    }
    out.say(&describe(&report, &scenario));
    Ok(0)
}

fn describe(r: &SolveReport, scenario: &edgemore::Scenario) -> String {
    let mut s = format!(
        "solver {}: objective {:.6}, utility {:.2}%, usage",
        r.solver_name, r.objective, r.utility_pct
    );
    for (t, u) in scenario
        .resource_types()
        .iter()
        .zip(r.usage_fraction.as_slice())
    {
        let _ = write!(s, " {} {:.1}%", t.name, u * 100.0);
    }
    let _ = write!(
        s,
        ", runtime {:.3} ms, {}",
        r.runtime_ms,
        if r.proven_optimal {
            "proven optimal"
        } else {
            "not proven optimal"
        }
    );
    s
}

fn cmd_sweep(a: SweepArgs, out: &Output) -> Outcome {
    let figure = match a.figure {
        FigureArg::Fig3 => Figure::Fig3,
        FigureArg::Fig4 => Figure::Fig4,
    };
    let profile = match a.profile {
        ProfileArg::Desk => Profile::Desk,
        ProfileArg::Paper => Profile::Paper,
    };
    let mut solvers = Vec::new();
    for name in &a.solvers {
        let kind: SolverKind = name.trim().parse().map_err(Failure::usage)?;
        if !solvers.contains(&kind) {
            solvers.push(kind);
        }
    }
    let mut config = SweepConfig::figure(figure, profile);
    config.runs_per_point = a.runs;
    config.base_seed = a.base_seed;
    config.solvers = solvers;
    config.limits = SolveLimits::time_limit_ms(a.time_limit_ms);
    config.validate().map_err(Failure::usage)?;

    let result = run_sweep(&config).map_err(Failure::usage)?;
    io::write_results(&a.out, &result, &config)?;
    if let Some(log) = &a.log {
        io::write_run_log(log, &result.runs, &config)?;
    }
    for row in &result.rows {
        out.say(&format!(
            "{}={:>2} {:<6} utility {:6.2}% [{:6.2}, {:6.2}] runtime {:9.2} ms proven {}/{}",
            row.sweep_kind,
            row.sweep_value,
            row.solver,
            row.mean_utility_pct,
            row.ci95_low,
            row.ci95_high,
            row.mean_runtime_ms,
            row.n_proven_optimal,
            row.n_runs
        ));
    }
    out.say(&format!("wrote {}", a.out.display()));
    Ok(0)
}

fn cmd_validate(a: ValidateArgs, out: &Output) -> Outcome {
    let scenario = io::read_scenario(&a.scenario)?;
    let violations = match io::read_allocation(&a.allocation)? {
        Ok(alloc) => validate(&scenario, &alloc).err().unwrap_or_default(),
        Err(structural) => structural,
    };
    if violations.is_empty() {
        out.say("OK");
        return Ok(0);
    }
    report_violations(&a.allocation, &violations);
    Ok(EXIT_INVALID)
}

/// Violations are the command's result, so they print even under `--quiet`.
fn report_violations(path: &Path, violations: &[edgemore::Violation]) {
    for v in violations {
        println!("{v}");
    }
    eprintln!(
        "{}: {} violation{}",
        path.display(),
        violations.len(),
        if violations.len() == 1 { "" } else { "s" }
    );
}
