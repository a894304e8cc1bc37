//! Workflow scheduling on edge-hub-cloud systems.
//!
//! A task graph and a system description are expanded into an extended task
//! graph ([`etg`]) whose candidate nodes are the feasible (task, device, core)
//! placements. From it the crate builds a continuous-time MILP ([`milp`]),
//! solves it with an external LP-file solver or an exhaustive oracle for small
//! instances ([`solver`]), schedules it heuristically ([`heft`]), and checks
//! any resulting schedule independently ([`validate`]).

pub mod batch;
pub mod error;
pub mod etg;
pub mod heft;
pub mod milp;
pub mod model;
pub mod par;
pub mod solver;
pub mod units;
pub mod validate;
pub mod workloads;

pub use error::{Error, Result};
