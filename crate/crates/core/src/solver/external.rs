//! File-based boundary to an external MILP solver: the model is written as an
//! LP file, a configurable command solves it, and the solution file is read
//! back.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::milp::{write_lp, MilpModel};

/// Environment variable naming the default solver profile: either a built-in
/// profile name or the path of a profile JSON file.
pub const SOLVER_ENV: &str = "ETGSCHED_SOLVER";

/// Extra wall time granted beyond the solver's own time limit before the
/// process is killed (covers interpreter start-up and file I/O).
const GRACE: Duration = Duration::from_secs(30);

/// HiGHS adapter shipped with the crate; written out on first use.
const HIGHS_ADAPTER: &str = include_str!("../../solvers/highs_adapter.py");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionFormat {
    /// `status <text>` and `objective <value>` lines, then `<name> <value>`.
    Pairs,
    /// `{"status": .., "objective": .., "values": {name: value}}`.
    Json,
}

/// How to invoke a solver and interpret what it writes.
///
/// `command_template` is split on whitespace; in each argument the
/// placeholders `{lp}`, `{sol}`, `{time_limit}` (seconds) and `{adapter}` (path
/// of the bundled HiGHS adapter script) are substituted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverProfile {
    pub name: String,
    pub command_template: String,
    pub solution_format: SolutionFormat,
    /// Solver status text to outcome status. Unmapped statuses are errors.
    pub status_map: BTreeMap<String, SolveStatus>,
}

impl SolverProfile {
    /// HiGHS through its Python bindings (`highspy`).
    pub fn highs() -> Self {
        Self::highs_with(SolutionFormat::Json)
    }

    pub fn highs_with(format: SolutionFormat) -> Self {
        let fmt = match format {
            SolutionFormat::Json => "json",
            SolutionFormat::Pairs => "pairs",
        };
        let status_map = [
            ("Optimal", SolveStatus::Optimal),
            ("Infeasible", SolveStatus::Infeasible),
            ("Time limit reached", SolveStatus::Timeout),
            ("Iteration limit reached", SolveStatus::Timeout),
            ("Solution limit reached", SolveStatus::Feasible),
            ("Interrupted by user", SolveStatus::Feasible),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        SolverProfile {
            name: format!("highs-{fmt}"),
            command_template: format!("python3 {{adapter}} {{lp}} {{sol}} --time-limit {{time_limit}} --format {fmt}"),
            solution_format: format,
            status_map,
        }
    }

    /// Built-in profile by name: `highs` (JSON solution) or `highs-pairs`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "highs" | "highs-json" => Some(Self::highs()),
            "highs-pairs" => Some(Self::highs_with(SolutionFormat::Pairs)),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves a built-in name or loads a profile file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(p) = Self::builtin(spec) {
            return Ok(p);
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Error::SolverLaunch(format!("solver profile '{spec}' is neither built in nor readable: {e}")))?;
        Self::from_json(&text)
    }

    /// The profile named by `ETGSCHED_SOLVER`, or HiGHS when it is unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(SOLVER_ENV) {
            Ok(spec) if !spec.trim().is_empty() => Self::resolve(spec.trim()),
            _ => Ok(Self::highs()),
        }
    }
}

fn adapter_path() -> Result<PathBuf> {
    let path = std::env::temp_dir().join(format!("etgsched-highs-adapter-{}.py", env!("CARGO_PKG_VERSION")));
    if std::fs::read_to_string(&path).ok().as_deref() == Some(HIGHS_ADAPTER) {
        return Ok(path);
    }
    // Write under a unique name and rename so concurrent callers never see a
    // partial file.
    let mut tmp = tempfile::NamedTempFile::new_in(std::env::temp_dir())?;
    std::io::Write::write_all(&mut tmp, HIGHS_ADAPTER.as_bytes())?;
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

fn command_line(profile: &SolverProfile, lp: &Path, sol: &Path, time_limit_s: f64) -> Result<Vec<String>> {
    let needs_adapter = profile.command_template.contains("{adapter}");
    let adapter = if needs_adapter { adapter_path()?.display().to_string() } else { String::new() };
    let limit = if time_limit_s.is_finite() { format!("{time_limit_s}") } else { "inf".to_string() };
    let args: Vec<String> = profile
        .command_template
        .split_whitespace()
        .map(|a| {
            a.replace("{lp}", &lp.display().to_string())
                .replace("{sol}", &sol.display().to_string())
                .replace("{time_limit}", &limit)
                .replace("{adapter}", &adapter)
        })
        .collect();
    if args.is_empty() {
        return Err(Error::SolverLaunch(format!("profile '{}' has an empty command", profile.name)));
    }
    Ok(args)
}

/// Parsed solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub status: String,
    pub objective: Option<f64>,
    pub values: HashMap<String, f64>,
}

#[derive(Deserialize)]
struct JsonSolution {
    status: String,
    objective: Option<f64>,
    #[serde(default)]
    values: HashMap<String, f64>,
}

pub fn parse_solution(text: &str, format: SolutionFormat) -> Result<SolutionFile> {
    match format {
        SolutionFormat::Json => {
            let s: JsonSolution =
                serde_json::from_str(text).map_err(|e| Error::SolutionParse(format!("invalid JSON solution: {e}")))?;
            Ok(SolutionFile { status: s.status, objective: s.objective, values: s.values })
        }
        SolutionFormat::Pairs => {
            let mut status = None;
            let mut objective = None;
            let mut values = HashMap::new();
            for (k, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, rest) = line
                    .split_once(char::is_whitespace)
                    .map(|(a, b)| (a, b.trim()))
                    .ok_or_else(|| Error::SolutionParse(format!("line {}: expected '<name> <value>'", k + 1)))?;
                match key {
                    "status" => status = Some(rest.to_string()),
                    "objective" if rest == "none" => objective = None,
                    _ => {
                        let v: f64 = rest
                            .parse()
                            .map_err(|_| Error::SolutionParse(format!("line {}: bad number '{rest}'", k + 1)))?;
                        if key == "objective" {
                            objective = Some(v);
                        } else {
                            values.insert(key.to_string(), v);
                        }
                    }
                }
            }
            let status = status.ok_or_else(|| Error::SolutionParse("missing status line".into()))?;
            Ok(SolutionFile { status, objective, values })
        }
    }
}

/// Runs the profile's solver on the model.
///
/// A solver that exceeds `time_limit_s` plus a grace period is killed and
/// reported as `timeout` without an assignment; a solver that stops at its
/// own limit reports `timeout` with its incumbent, if any.
pub fn solve_external(model: &MilpModel, profile: &SolverProfile, time_limit_s: f64) -> Result<SolveOutcome> {
    let dir = tempfile::tempdir()?;
    let lp = dir.path().join("model.lp");
    let sol = dir.path().join("model.sol");
    std::fs::write(&lp, write_lp(model))?;
    let args = command_line(profile, &lp, &sol, time_limit_s)?;

    let started = Instant::now();
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::SolverLaunch(format!("{}: {e}", args[0])))?;
    let deadline = Duration::try_from_secs_f64(time_limit_s.max(0.0)).map(|d| d + GRACE).ok();
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if deadline.is_some_and(|d| started.elapsed() > d) {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let wall_time_s = started.elapsed().as_secs_f64();
    let backend = profile.name.clone();
    let Some(exit) = exit else {
        return Ok(SolveOutcome::empty(SolveStatus::Timeout, wall_time_s, backend));
    };
    if !exit.success() {
        let mut err = String::new();
        if let Some(mut s) = child.stderr.take() {
            let _ = std::io::Read::read_to_string(&mut s, &mut err);
        }
        return Err(Error::SolverLaunch(format!("{} exited with {exit}: {}", args[0], err.trim())));
    }
    let text = std::fs::read_to_string(&sol)
        .map_err(|e| Error::SolutionParse(format!("solver wrote no solution file: {e}")))?;
    let parsed = parse_solution(&text, profile.solution_format)?;
    let status = *profile
        .status_map
        .get(&parsed.status)
        .ok_or_else(|| Error::SolutionParse(format!("unmapped solver status '{}'", parsed.status)))?;

    let mut outcome = SolveOutcome::empty(status, wall_time_s, backend);
    if status == SolveStatus::Infeasible || parsed.values.is_empty() {
        if status == SolveStatus::Optimal {
            return Err(Error::SolutionParse("optimal status without values".into()));
        }
        return Ok(outcome);
    }
    let values = crate::milp::assignment_from_names(model, &parsed.values)
        .map_err(|e| Error::SolutionParse(e.to_string()))?;
    outcome.objective = parsed.objective.unwrap_or(values[model.objective()]);
    outcome.assignment = model.variables().iter().zip(&values).map(|(v, &x)| (v.name.clone(), x)).collect();
    Ok(outcome)
}
