//! Continuous-time MILP over the extended task graph.
//!
//! Variables (canonical names):
//! - `x[i,d,q]`: candidate node of task `i` on core `q` of device `d` selected;
//! - `xa[i,d,q,j,e,r]`: candidate arc selected;
//! - `t[i]`: start of task `i`; `T`: makespan (the objective);
//! - `xo[i,j]`: task `i` runs before task `j` on a shared core;
//! - `xe[n,i,d,q]`: the candidate executes at the start of task `n`;
//! - `xh[n,i,d,q]`: helper selecting "before start" vs "after end" when not
//!   executing.

mod build;
mod decode;
pub mod lp;
mod model;

pub use build::{big_m, build_model, build_model_with, epsilon, ModelOptions};
pub use decode::{assignment_from_names, decode_solution, encode_schedule, BINARY_TOLERANCE};
pub use lp::write_lp;
pub use model::{DecodeMap, LinearConstraint, MilpModel, Sense, Tag, VarId, VarKind, Variable};
