use thiserror::Error;

use crate::model::{DeviceId, TaskId};
use crate::validate::Schedule;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid input at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("task graph contains a cycle: {}", fmt_cycle(.cycle))]
    Cycle { cycle: Vec<TaskId> },

    #[error("no device features the capability required by task {task}")]
    NoCandidate { task: TaskId },

    #[error("no communication channel from {from} to {to}")]
    MissingChannel { from: DeviceId, to: DeviceId },

    #[error("task {task} has no execution profile for device {device}")]
    MissingProfile { task: TaskId, device: DeviceId },

    #[error("task {task} cannot be placed before its parent {parent} is scheduled")]
    UnscheduledParent { task: TaskId, parent: TaskId },

    #[error("cannot decode solver assignment: {0}")]
    Decode(String),

    #[error("failed to launch solver: {0}")]
    SolverLaunch(String),

    #[error("failed to parse solver output: {0}")]
    SolutionParse(String),

    #[error("oracle search space of {states:.3e} states exceeds the limit of {limit:.3e}")]
    StateLimitExceeded { states: f64, limit: f64 },

    #[error("instance is infeasible")]
    InfeasibleInstance,

    #[error("objective mismatch: reported {reported}, oracle optimum {oracle}")]
    Mismatch {
        reported: f64,
        oracle: f64,
        reported_schedule: Option<Box<Schedule>>,
        oracle_schedule: Option<Box<Schedule>>,
    },

    #[error("{0}")]
    Domain(String),

    #[error("average degree {target} is unreachable for {tasks} tasks")]
    DegreeUnreachable { target: f64, tasks: usize },

    #[error("unknown system configuration '{0}'")]
    UnknownConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { path: path.into(), message: message.into() }
    }
}

fn fmt_cycle(cycle: &[TaskId]) -> String {
    cycle.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> ")
}
