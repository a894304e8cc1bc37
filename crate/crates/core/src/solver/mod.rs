//! Solving the scheduling problem exactly: through an external MILP solver
//! over the LP file ([`solve_external`]), or in-process by exhaustive
//! enumeration for small instances ([`solve_oracle`]).

mod external;
mod oracle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use external::{parse_solution, solve_external, SolutionFile, SolutionFormat, SolverProfile, SOLVER_ENV};
pub use oracle::{count_topological_orders, search_space, solve_oracle, OracleLimits, ORACLE_BACKEND};

use crate::error::{Error, Result};
use crate::etg::ExtendedTaskGraph;
use crate::milp::{self, assignment_from_names, build_model_with, decode_solution, ModelOptions};
use crate::model::SystemConfig;
use crate::validate::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Timeout,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Makespan of the returned solution; infinite when there is none.
    pub objective: f64,
    /// Variable values by canonical name. External solves report every model
    /// variable; the oracle reports the decision variables (`x`, `t`, `T`).
    pub assignment: BTreeMap<String, f64>,
    pub wall_time_s: f64,
    pub backend: String,
    /// Decoded schedule, when a solution exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
}

impl SolveOutcome {
    pub(crate) fn empty(status: SolveStatus, wall_time_s: f64, backend: String) -> Self {
        SolveOutcome { status, objective: f64::INFINITY, assignment: BTreeMap::new(), wall_time_s, backend, schedule: None }
    }

    pub fn has_solution(&self) -> bool {
        !self.assignment.is_empty()
    }
}

/// Selection, start and makespan values for a placement.
pub(crate) fn decision_values(
    etg: &ExtendedTaskGraph,
    nodes: &[usize],
    starts: &[f64],
    makespan: f64,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (n, c) in etg.nodes().iter().enumerate() {
        let id = etg.task(c.task).id;
        out.insert(format!("x[{id},{},{}]", c.device, c.core), if nodes[c.task] == n { 1.0 } else { 0.0 });
    }
    for (i, &s) in starts.iter().enumerate() {
        out.insert(format!("t[{}]", etg.task(i).id), s);
    }
    out.insert("T".to_string(), makespan);
    out
}

/// Builds the model, solves it externally and decodes the schedule.
pub fn solve_milp(
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    profile: &SolverProfile,
    time_limit_s: f64,
) -> Result<SolveOutcome> {
    solve_milp_with(etg, sys, profile, time_limit_s, &ModelOptions::default())
}

pub fn solve_milp_with(
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    profile: &SolverProfile,
    time_limit_s: f64,
    opts: &ModelOptions,
) -> Result<SolveOutcome> {
    let model = build_model_with(etg, sys, opts);
    let mut outcome = solve_external(&model, profile, time_limit_s)?;
    if outcome.has_solution() {
        let named = outcome.assignment.iter().map(|(k, &v)| (k.clone(), v)).collect();
        let values = assignment_from_names(&model, &named)?;
        outcome.schedule = Some(decode_solution(&model, etg, &values, "milp")?);
    }
    Ok(outcome)
}

/// Result of comparing an outcome with the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `None` when the outcome reports infeasibility.
    pub reported: Option<f64>,
    /// `None` when the oracle finds the instance infeasible.
    pub oracle: Option<f64>,
    pub tolerance: f64,
    pub oracle_schedule: Option<Schedule>,
}

/// Checks an outcome against the oracle optimum: objectives must agree within
/// ten times the model's ε, and both must agree on infeasibility.
pub fn verify_against_oracle(
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    outcome: &SolveOutcome,
    limits: &OracleLimits,
) -> Result<OracleReport> {
    let tolerance = 10.0 * milp::epsilon(etg);
    let oracle = match solve_oracle(etg, sys, limits) {
        Ok(o) => Some(o),
        Err(Error::InfeasibleInstance) => None,
        Err(e) => return Err(e),
    };
    let reported = match outcome.status {
        SolveStatus::Infeasible => None,
        SolveStatus::Optimal => Some(outcome.objective),
        s => return Err(Error::Domain(format!("only optimal or infeasible outcomes can be verified, got {s}"))),
    };
    let agree = match (reported, oracle.as_ref()) {
        (None, None) => true,
        (Some(r), Some(o)) => (r - o.objective).abs() <= tolerance,
        _ => false,
    };
    let oracle_schedule = oracle.as_ref().and_then(|o| o.schedule.clone());
    if !agree {
        return Err(Error::Mismatch {
            reported: reported.unwrap_or(f64::INFINITY),
            oracle: oracle.as_ref().map_or(f64::INFINITY, |o| o.objective),
            reported_schedule: outcome.schedule.clone().map(Box::new),
            oracle_schedule: oracle_schedule.map(Box::new),
        });
    }
    Ok(OracleReport { reported, oracle: oracle.map(|o| o.objective), tolerance, oracle_schedule })
}
