//! `etgsched` command-line interface.
//!
//! Exit codes: 0 ok, 1 schedule has violations (`validate`), 2 input error,
//! 3 build error, 4 infeasible, 5 solver failure or timeout.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use etgsched::batch::{self, BenchOptions, Manifest, RunConfig};
use etgsched::etg::{build_etg_with, CpAggregate, EtgOptions, ExtendedTaskGraph, DEFAULT_DEADLINE_FACTOR};
use etgsched::milp::{build_model, write_lp};
use etgsched::model::json::{load_system_config, load_task_graph, system_to_json, task_graph_to_json};
use etgsched::model::{SystemConfig, TaskGraph};
use etgsched::solver::{OracleLimits, SolverProfile};
use etgsched::validate::{validate, Schedule};
use etgsched::workloads::fixtures::{self, ConfigId};
use etgsched::workloads::generator::{synthetic_instance, GeneratorParams};
use etgsched::Error;

#[derive(Parser)]
#[command(name = "etgsched", version, about = "Workflow scheduling on edge-hub-cloud systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Instance {
    /// Task graph JSON.
    #[arg(long)]
    tg: PathBuf,
    /// System configuration JSON.
    #[arg(long)]
    system: PathBuf,
    /// Deadline as a multiple of the critical path (when the task graph has none).
    #[arg(long, default_value_t = DEFAULT_DEADLINE_FACTOR)]
    deadline_factor: f64,
    /// How candidate latencies collapse when measuring the critical path.
    #[arg(long, default_value = "mean")]
    cp_aggregate: CpAggregate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Milp,
    Heft,
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Milp => "milp",
            Method::Heft => "heft",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    /// Four-task transformation example.
    Transformation,
    /// Sixteen-task inspection workflow (needs --config).
    RealWorld,
}

#[derive(Subcommand)]
enum Command {
    /// Build the extended task graph and write it as JSON.
    #[command(alias = "etg-dump")]
    Transform {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the MILP model in LP format.
    Lp {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        out: PathBuf,
    },
    /// Schedule an instance, validate the schedule and write it.
    Solve {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_enum, default_value = "milp")]
        method: Method,
        /// MILP solver time limit in seconds.
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        /// Solver profile: built-in name or profile JSON (default: $ETGSCHED_SOLVER, else highs).
        #[arg(long)]
        solver: Option<String>,
        /// Oracle search-space cap.
        #[arg(long, default_value_t = 1e7)]
        max_states: f64,
        /// Schedule output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run record output.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Check a schedule against every constraint; exits 1 on violations.
    Validate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        schedule: PathBuf,
        /// Violation report output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic task graph with profiles for a configuration.
    Generate {
        #[arg(long)]
        tasks: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "C6")]
        config: ConfigId,
        /// Only draw specialized capabilities the configuration features.
        #[arg(long)]
        feasible_caps: bool,
        #[arg(long, default_value_t = 1.7)]
        avg_degree: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the configuration's system JSON.
        #[arg(long)]
        system_out: Option<PathBuf>,
    },
    /// Export a bundled fixture as task graph and system JSON.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        #[arg(long, default_value = "C1")]
        config: ConfigId,
        #[arg(long)]
        tg_out: PathBuf,
        #[arg(long)]
        system_out: PathBuf,
    },
    /// Run MILP and HEFT over a manifest and write a comparison CSV.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0: one per CPU).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Zero the wall-time columns for byte-identical reruns.
        #[arg(long)]
        stable_output: bool,
        /// Overrides the manifest's time limit.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        solver: Option<String>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_)
            | Error::Validation { .. }
            | Error::Cycle { .. }
            | Error::UnknownConfig(_)
            | Error::DegreeUnreachable { .. }
            | Error::Domain(_)
            | Error::Io(_)
            | Error::Csv(_) => 2,
            Error::NoCandidate { .. } | Error::MissingChannel { .. } | Error::MissingProfile { .. } => 3,
            Error::InfeasibleInstance => 4,
            Error::UnscheduledParent { .. }
            | Error::Decode(_)
            | Error::SolverLaunch(_)
            | Error::SolutionParse(_)
            | Error::StateLimitExceeded { .. }
            | Error::Mismatch { .. } => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn load(instance: &Instance) -> Result<(TaskGraph, SystemConfig, ExtendedTaskGraph, EtgOptions), Failure> {
    let tg = load_task_graph(&read(&instance.tg)?)?;
    let sys = load_system_config(&read(&instance.system)?)?;
    let opts = EtgOptions { deadline_factor: instance.deadline_factor, cp_aggregate: instance.cp_aggregate };
    let etg = build_etg_with(&tg, &sys, &opts)?;
    Ok((tg, sys, etg, opts))
}

fn profile(spec: Option<&str>) -> Result<SolverProfile, Failure> {
    Ok(match spec {
        Some(s) => SolverProfile::resolve(s)?,
        None => SolverProfile::from_env()?,
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Transform { instance, out } => {
            let (_, _, etg, _) = load(&instance)?;
            if let Some(out) = out {
                write(&out, &etg.to_json())?;
            }
            println!("nodes={} arcs={} deadline_s={}", etg.nodes().len(), etg.arcs().len(), etg.deadline_s());
            Ok(0)
        }
        Command::Lp { instance, out } => {
            let (_, sys, etg, _) = load(&instance)?;
            let model = build_model(&etg, &sys);
            write(&out, &write_lp(&model))?;
            println!("variables={} constraints={}", model.variables().len(), model.constraints().len());
            Ok(0)
        }
        Command::Solve { instance, method, time_limit, solver, max_states, out, record } => {
            let (tg, sys, etg, opts) = load(&instance)?;
            let cfg = RunConfig {
                profile: profile(solver.as_deref())?,
                time_limit_s: time_limit,
                oracle_limits: OracleLimits { max_states },
            };
            let id = instance.tg.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let (mut rec, schedule) = batch::run_method(&id, method.name(), &etg, &sys, &cfg)?;
            rec.config_hash = batch::config_hash(&tg, &sys, &etg, &opts);
            let rec_json = serde_json::to_string_pretty(&rec).expect("record serializes");
            match record.as_deref() {
                Some(p) => write(p, &rec_json)?,
                None => eprintln!("{rec_json}"),
            }
            match (rec.status.as_str(), schedule) {
                (_, Some(s)) => {
                    emit(out.as_deref(), &s.to_json())?;
                    Ok(0)
                }
                ("infeasible", None) => Err(fail(4, format!("{}: instance is infeasible", method.name()))),
                ("invalid", None) => Err(fail(5, "the schedule failed validation and was not written")),
                (status, None) => Err(fail(5, format!("solver stopped with status {status} and no schedule"))),
            }
        }
        Command::Validate { instance, schedule, out } => {
            let (_, sys, etg, _) = load(&instance)?;
            let schedule = Schedule::from_json(&read(&schedule)?)?;
            let report = validate(&schedule, &etg, &sys, etgsched::milp::epsilon(&etg));
            emit(out.as_deref(), &report.to_json())?;
            if report.is_feasible() {
                Ok(0)
            } else {
                eprintln!("{} violation(s)", report.violations.len());
                Ok(1)
            }
        }
        Command::Generate { tasks, seed, config, feasible_caps, avg_degree, out, system_out } => {
            let sys = fixtures::config(config);
            let mut params = GeneratorParams::new(tasks, seed);
            params.avg_degree = avg_degree;
            if feasible_caps {
                params = params.feasible_caps(&sys);
            }
            let tg = synthetic_instance(&params, &sys)?;
            write(&out, &task_graph_to_json(&tg))?;
            if let Some(p) = system_out {
                write(&p, &system_to_json(&sys))?;
            }
            Ok(0)
        }
        Command::Fixture { name, config, tg_out, system_out } => {
            let (tg, sys) = match name {
                FixtureName::Transformation => fixtures::transformation_example(),
                FixtureName::RealWorld => fixtures::real_world_fixture(config),
            };
            write(&tg_out, &task_graph_to_json(&tg))?;
            write(&system_out, &system_to_json(&sys))?;
            Ok(0)
        }
        Command::Bench { manifest, out, jobs, stable_output, time_limit, solver } => {
            let m = Manifest::from_json(&read(&manifest)?)?;
            let base = manifest.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            let opts = BenchOptions { profile: profile(solver.as_deref())?, jobs, stable_output, time_limit_s: time_limit };
            let rows = batch::run_batch(&m, &base, &opts);
            let file = std::fs::File::create(&out).map_err(|e| fail(2, format!("cannot write {}: {e}", out.display())))?;
            batch::write_csv(&rows, file)?;
            let summary = rows.last().expect("summary row");
            println!(
                "instances={} compared={} mean_improvement_pct={} {}",
                rows.len() - 1,
                summary.tasks.unwrap_or(0),
                summary.improvement_pct.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")),
                summary.error
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
