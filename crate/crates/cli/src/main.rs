mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::FileConfig;
use foms_core::harness::{
    fit_rate, generate_problem, run_solver, theory_slope, thread_cap, verify, BoundTag, Instance,
    InstanceSpec, ProblemTag, SolverTag,
};
use foms_core::trace::SolverTrace;

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "foms",
    version,
    about = "Benchmark harness for first-order convex solvers"
)]
struct Cli {
    /// Plain `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one generated instance.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        solver: Option<SolverTag>,
        #[arg(long)]
        steps: Option<usize>,
        /// CSV trace destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several solvers on the same instance.
    Compare {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Comma-separated solver tags.
        #[arg(long, value_delimiter = ',')]
        solvers: Vec<SolverTag>,
        #[arg(long)]
        steps: Option<usize>,
        /// Directory receiving one CSV trace per solver.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit a log-log rate to a stored trace.
    Rates {
        trace: PathBuf,
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long, default_value_t = u64::MAX)]
        to: u64,
    },
    /// Check one guaranteed bound, or `all`.
    Verify {
        #[arg(long)]
        bound: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    problem: Option<ProblemTag>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<foms_core::Error> for Failure {
    fn from(e: foms_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Solve {
            instance,
            solver,
            steps,
            out,
        } => {
            let inst = build_instance(&file, instance)?;
            let solver = file
                .pick("solver", solver)?
                .ok_or_else(|| "solve needs --solver".to_string())?;
            let steps = file.pick("steps", steps)?.unwrap_or(1000);
            let trace = run_solver(&inst, solver, steps)?;
            if let Some(path) = file.pick("out", out)? {
                write_trace(&trace, &path)?;
            }
            print_json(&summary(&inst, solver, &trace))
        }
        Command::Compare {
            instance,
            solvers,
            steps,
            out_dir,
        } => {
            let inst = build_instance(&file, instance)?;
            let solvers = if solvers.is_empty() {
                let listed: Option<String> = file.pick("solvers", None)?;
                listed
                    .ok_or_else(|| "compare needs --solvers".to_string())?
                    .split(',')
                    .map(|s| s.trim().parse::<SolverTag>())
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                solvers
            };
            let steps = file.pick("steps", steps)?.unwrap_or(1000);
            let traces = run_parallel(&inst, &solvers, steps);
            let mut rows = Vec::new();
            for (solver, trace) in solvers.iter().zip(traces) {
                match trace {
                    Ok(trace) => {
                        if let Some(dir) = file.pick::<PathBuf>("out-dir", out_dir.clone())? {
                            write_trace(&trace, &dir.join(format!("{solver}.csv")))?;
                        }
                        rows.push(summary(&inst, *solver, &trace));
                    }
                    Err(e) => rows.push(json!({ "solver": solver.tag(), "error": e.to_string() })),
                }
            }
            print_json(&json!({
                "spec": inst.spec,
                "reference_value": inst.psi_min(),
                "runs": rows,
            }))
        }
        Command::Rates { trace, from, to } => {
            let file_in =
                File::open(&trace).map_err(|e| format!("cannot open {}: {e}", trace.display()))?;
            let parsed = SolverTrace::read_csv(BufReader::new(file_in))?;
            let report = fit_rate(&parsed, (from, to))?;
            print_json(&json!({
                "spec": spec_from_meta(&parsed),
                "solver": parsed.solver,
                "bound": Value::Null,
                "violations": Value::Null,
                "slope": report.slope,
                "theory_slope": theory_slope(&parsed.solver),
                "window": [report.window.0, report.window.1],
            }))
        }
        Command::Verify { bound, seed } => {
            let bound = file
                .pick::<String>("bound", bound)?
                .ok_or_else(|| "verify needs --bound".to_string())?;
            let seed = file.pick("seed", seed)?.unwrap_or(7);
            let tags = if bound == "all" {
                BoundTag::ALL.to_vec()
            } else {
                vec![bound.parse::<BoundTag>()?]
            };
            let mut failed = Vec::new();
            for tag in tags {
                let report = verify(tag, seed)?;
                if !report.passed() {
                    failed.push(tag.tag());
                }
                print_json(&serde_json::to_value(&report).map_err(|e| e.to_string())?)?;
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Violation(format!(
                    "bound violated: {}",
                    failed.join(", ")
                )))
            }
        }
    }
}

fn build_instance(file: &FileConfig, args: InstanceArgs) -> Result<Instance, Failure> {
    let problem = file
        .pick("problem", args.problem)?
        .ok_or_else(|| "missing --problem".to_string())?;
    let n = file.pick("n", args.n)?.unwrap_or(50);
    let m = file.pick("m", args.m)?.unwrap_or(n / 2).max(1);
    let seed = file.pick("seed", args.seed)?.unwrap_or(0);
    let mut spec = InstanceSpec::new(problem, n, m, seed);
    if let Some(lambda) = file.pick("lambda", args.lambda)? {
        spec = spec.with_lambda(lambda);
    }
    if let Some(mu) = file.pick("mu", args.mu)? {
        spec = spec.with_mu(mu);
    }
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    Ok(generate_problem(&spec)?)
}

fn run_parallel(
    inst: &Instance,
    solvers: &[SolverTag],
    steps: usize,
) -> Vec<foms_core::Result<SolverTrace>> {
    let cap = thread_cap().max(1);
    let mut out = Vec::with_capacity(solvers.len());
    for chunk in solvers.chunks(cap) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&solver| s.spawn(move || run_solver(inst, solver, steps)))
                .collect();
            for h in handles {
                out.push(h.join().unwrap_or_else(|_| {
                    Err(foms_core::Error::InternalFault(
                        "solver thread panicked".into(),
                    ))
                }));
            }
        });
    }
    out
}

fn summary(inst: &Instance, solver: SolverTag, trace: &SolverTrace) -> Value {
    let last = trace.last();
    json!({
        "spec": inst.spec,
        "solver": solver.tag(),
        "rows": trace.rows.len(),
        "final_objective": last.map(|r| r.objective),
        "final_gap": last.map(|r| r.objective - inst.psi_min()),
        "reference_value": inst.psi_min(),
        "grad_calls": last.map(|r| r.grad_calls),
        "prox_calls": last.map(|r| r.prox_calls),
        "lo_calls": last.map(|r| r.lo_calls),
        "warnings": trace.warnings,
    })
}

fn spec_from_meta(trace: &SolverTrace) -> Value {
    let pairs = trace
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    Value::Object(pairs)
}

fn write_trace(trace: &SolverTrace, path: &Path) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    let file = File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    trace.write_csv(BufWriter::new(file))?;
    Ok(())
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, v).map_err(|e| e.to_string())?;
    writeln!(stdout).map_err(|e| e.to_string())?;
    Ok(())
}
