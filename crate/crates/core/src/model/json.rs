//! File formats for task graphs and system configurations.
//!
//! Quantities are written in the units of the published device and channel
//! tables (Mbit, ms, GiB, Wh, Mbit/s, µJ/bit) and converted to SI on load.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ids::{Capability, DeviceId, TaskId, Tier};
use super::system::{CapabilityInfo, ChannelKind, CommChannel, Device, Link, SystemConfig};
use super::task::{ExecProfile, Task, TaskGraph};
use crate::error::{Error, Result};
use crate::units;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskGraphFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub tasks: Vec<TaskEntry>,
    #[serde(default)]
    pub arcs: Vec<(TaskId, TaskId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub id: TaskId,
    pub capability: Capability,
    pub data_mbit: f64,
    pub memory_mbit: f64,
    pub storage_mbit: f64,
}

/// Execution time and power of one task on the reserved cores of one device.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub task: TaskId,
    pub device: DeviceId,
    pub time_ms: f64,
    pub power_w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub channels: Vec<ChannelEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capability_catalog: Vec<CapabilityEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub id: DeviceId,
    pub tier: Tier,
    pub cores: u32,
    pub capabilities: Vec<Capability>,
    pub memory_budget_gib: f64,
    pub storage_budget_gib: f64,
    /// `null` for an unconstrained (mains-powered) device.
    pub energy_budget_wh: Option<f64>,
    pub perf_ratio: f64,
}

/// A relayed channel carries no link parameters of its own; it uses the
/// direct channels to and from the relay.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub from: DeviceId,
    pub to: DeviceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_uj_per_bit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_uj_per_bit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay: Option<DeviceId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityEntry {
    pub id: Capability,
    pub description: String,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::validation("schema_version", format!("unsupported version {v}")));
    }
    Ok(())
}

pub fn load_task_graph(json_text: &str) -> Result<TaskGraph> {
    let file: TaskGraphFile = serde_json::from_str(json_text)?;
    task_graph_from_file(file)
}

pub fn task_graph_from_file(file: TaskGraphFile) -> Result<TaskGraph> {
    check_version(file.schema_version)?;
    let tasks = file
        .tasks
        .iter()
        .map(|t| Task {
            id: t.id,
            capability: t.capability,
            output_data_bits: units::mbit_to_bits(t.data_mbit),
            memory_bits: units::mbit_to_bits(t.memory_mbit),
            storage_bits: units::mbit_to_bits(t.storage_mbit),
        })
        .collect();
    let mut profiles = BTreeMap::new();
    for (k, p) in file.profiles.iter().enumerate() {
        let prof = ExecProfile { exec_time_s: units::ms_to_s(p.time_ms), power_w: p.power_w };
        if profiles.insert((p.task, p.device), prof).is_some() {
            return Err(Error::validation(
                format!("profiles[{k}]"),
                format!("duplicate profile for task {} on {}", p.task, p.device),
            ));
        }
    }
    TaskGraph::new(tasks, file.arcs, file.deadline_ms.map(units::ms_to_s), profiles)
}

pub fn task_graph_to_file(tg: &TaskGraph) -> TaskGraphFile {
    TaskGraphFile {
        schema_version: SCHEMA_VERSION,
        tasks: tg
            .tasks()
            .iter()
            .map(|t| TaskEntry {
                id: t.id,
                capability: t.capability,
                data_mbit: units::bits_to_mbit(t.output_data_bits),
                memory_mbit: units::bits_to_mbit(t.memory_bits),
                storage_mbit: units::bits_to_mbit(t.storage_bits),
            })
            .collect(),
        arcs: tg.arcs().to_vec(),
        deadline_ms: tg.deadline_s().map(units::s_to_ms),
        profiles: tg
            .profiles()
            .iter()
            .map(|(&(task, device), p)| ProfileEntry {
                task,
                device,
                time_ms: units::s_to_ms(p.exec_time_s),
                power_w: p.power_w,
            })
            .collect(),
    }
}

pub fn task_graph_to_json(tg: &TaskGraph) -> String {
    serde_json::to_string_pretty(&task_graph_to_file(tg)).expect("task graph serializes")
}

pub fn load_system_config(json_text: &str) -> Result<SystemConfig> {
    let file: SystemFile = serde_json::from_str(json_text)?;
    system_from_file(file)
}

pub fn system_from_file(file: SystemFile) -> Result<SystemConfig> {
    check_version(file.schema_version)?;
    let mut devices = Vec::with_capacity(file.devices.len());
    for (k, d) in file.devices.iter().enumerate() {
        if d.tier != d.id.tier {
            return Err(Error::validation(
                format!("devices[{k}].tier"),
                format!("tier does not match device id {}", d.id),
            ));
        }
        if let Some(e) = d.energy_budget_wh {
            if !e.is_finite() {
                return Err(Error::validation(format!("devices[{k}].energy_budget_wh"), "use null for no budget"));
            }
        }
        devices.push(Device {
            id: d.id,
            cores: d.cores,
            capabilities: d.capabilities.iter().copied().collect(),
            memory_budget_bits: units::gib_to_bits(d.memory_budget_gib),
            storage_budget_bits: units::gib_to_bits(d.storage_budget_gib),
            energy_budget_j: d.energy_budget_wh.map_or(f64::INFINITY, units::wh_to_joules),
            perf_ratio: d.perf_ratio,
        });
    }

    let mut channels = Vec::with_capacity(file.channels.len());
    for (k, c) in file.channels.iter().enumerate() {
        let path = format!("channels[{k}]");
        let kind = match (c.relay, c.bandwidth_mbps, c.tx_uj_per_bit, c.rx_uj_per_bit) {
            (Some(via), None, None, None) => ChannelKind::Relayed { via },
            (Some(_), ..) => {
                return Err(Error::validation(path, "a relayed channel takes its parameters from its hops"))
            }
            (None, Some(bw), Some(tx), Some(rx)) => ChannelKind::Direct(Link {
                bandwidth_bps: units::mbps_to_bps(bw),
                tx_j_per_bit: units::uj_to_j(tx),
                rx_j_per_bit: units::uj_to_j(rx),
            }),
            (None, ..) => {
                return Err(Error::validation(path, "direct channels need bandwidth_mbps, tx_uj_per_bit and rx_uj_per_bit"))
            }
        };
        channels.push(CommChannel { from: c.from, to: c.to, kind });
    }

    let catalog = file
        .capability_catalog
        .iter()
        .map(|c| CapabilityInfo { id: c.id, description: c.description.clone() })
        .collect();
    SystemConfig::new(devices, channels, catalog)
}

pub fn system_to_file(sys: &SystemConfig) -> SystemFile {
    SystemFile {
        schema_version: SCHEMA_VERSION,
        devices: sys
            .devices()
            .iter()
            .map(|d| DeviceEntry {
                id: d.id,
                tier: d.id.tier,
                cores: d.cores,
                capabilities: d.capabilities.iter().copied().collect(),
                memory_budget_gib: units::bits_to_gib(d.memory_budget_bits),
                storage_budget_gib: units::bits_to_gib(d.storage_budget_bits),
                energy_budget_wh: d.energy_budget_j.is_finite().then(|| units::joules_to_wh(d.energy_budget_j)),
                perf_ratio: d.perf_ratio,
            })
            .collect(),
        channels: sys
            .channels()
            .map(|c| match c.kind {
                ChannelKind::Direct(l) => ChannelEntry {
                    from: c.from,
                    to: c.to,
                    bandwidth_mbps: Some(units::bps_to_mbps(l.bandwidth_bps)),
                    tx_uj_per_bit: Some(units::j_to_uj(l.tx_j_per_bit)),
                    rx_uj_per_bit: Some(units::j_to_uj(l.rx_j_per_bit)),
                    relay: None,
                },
                ChannelKind::Relayed { via } => ChannelEntry {
                    from: c.from,
                    to: c.to,
                    bandwidth_mbps: None,
                    tx_uj_per_bit: None,
                    rx_uj_per_bit: None,
                    relay: Some(via),
                },
            })
            .collect(),
        capability_catalog: sys
            .capability_catalog()
            .iter()
            .map(|c| CapabilityEntry { id: c.id, description: c.description.clone() })
            .collect(),
    }
}

pub fn system_to_json(sys: &SystemConfig) -> String {
    serde_json::to_string_pretty(&system_to_file(sys)).expect("system serializes")
}
