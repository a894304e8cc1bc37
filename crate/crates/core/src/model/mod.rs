//! Application and system models.

mod ids;
pub mod json;
mod system;
mod task;

pub use ids::{Capability, DeviceId, ParseDeviceIdError, TaskId, Tier};
pub use json::{load_system_config, load_task_graph, system_to_json, task_graph_to_json};
pub use system::{CapabilityInfo, ChannelKind, CommChannel, Device, Link, Route, SystemConfig};
pub use task::{validate_dag, ExecProfile, Task, TaskGraph};
