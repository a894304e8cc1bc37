use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::{
    Capability, CapabilityInfo, ChannelKind, CommChannel, Device, DeviceId, ExecProfile, Link, SystemConfig, Task,
    TaskGraph, TaskId,
};

/// A device with generous finite memory/storage budgets, no energy budget and
/// unit performance ratio. Capability 0 is always added.
pub fn basic_device(id: DeviceId, cores: u32, caps: &[u32]) -> Device {
    Device {
        id,
        cores,
        capabilities: std::iter::once(Capability::BASIC).chain(caps.iter().map(|&c| Capability(c))).collect(),
        memory_budget_bits: 1e15,
        storage_budget_bits: 1e15,
        energy_budget_j: f64::INFINITY,
        perf_ratio: 1.0,
    }
}

/// Link parameters in table units (Mbit/s, µJ/bit).
pub fn link(mbps: f64, tx_uj_per_bit: f64, rx_uj_per_bit: f64) -> Link {
    Link { bandwidth_bps: mbps * 1e6, tx_j_per_bit: tx_uj_per_bit * 1e-6, rx_j_per_bit: rx_uj_per_bit * 1e-6 }
}

/// Programmatic construction of a (task graph, system) pair in SI units.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    devices: Vec<Device>,
    channels: BTreeMap<(DeviceId, DeviceId), ChannelKind>,
    catalog: Vec<CapabilityInfo>,
    tasks: Vec<Task>,
    arcs: Vec<(TaskId, TaskId)>,
    profiles: BTreeMap<(TaskId, DeviceId), ExecProfile>,
    deadline_s: Option<f64>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn device(mut self, device: Device) -> Self {
        self.devices.push(device);
        self
    }

    pub fn link(mut self, from: DeviceId, to: DeviceId, link: Link) -> Self {
        self.channels.insert((from, to), ChannelKind::Direct(link));
        self
    }

    pub fn link_both(self, a: DeviceId, b: DeviceId, link: Link) -> Self {
        self.link(a, b, link).link(b, a, link)
    }

    pub fn relay(mut self, from: DeviceId, to: DeviceId, via: DeviceId) -> Self {
        self.channels.insert((from, to), ChannelKind::Relayed { via });
        self
    }

    /// Adds `link` in both directions between every pair of devices that has
    /// no channel yet.
    pub fn fully_connect(mut self, link: Link) -> Self {
        let ids: Vec<DeviceId> = self.devices.iter().map(|d| d.id).collect();
        for &a in &ids {
            for &b in &ids {
                if a != b {
                    self.channels.entry((a, b)).or_insert(ChannelKind::Direct(link));
                }
            }
        }
        self
    }

    pub fn catalog(mut self, catalog: Vec<CapabilityInfo>) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn task(mut self, id: u32, capability: u32, data_bits: f64, memory_bits: f64, storage_bits: f64) -> Self {
        self.tasks.push(Task {
            id: TaskId(id),
            capability: Capability(capability),
            output_data_bits: data_bits,
            memory_bits,
            storage_bits,
        });
        self
    }

    pub fn arc(mut self, parent: u32, child: u32) -> Self {
        self.arcs.push((TaskId(parent), TaskId(child)));
        self
    }

    pub fn profile(mut self, task: u32, device: DeviceId, exec_time_s: f64, power_w: f64) -> Self {
        self.profiles.insert((TaskId(task), device), ExecProfile { exec_time_s, power_w });
        self
    }

    /// Same execution time and power on every device added so far.
    pub fn uniform_profile(mut self, task: u32, exec_time_s: f64, power_w: f64) -> Self {
        for d in &self.devices {
            self.profiles.insert((TaskId(task), d.id), ExecProfile { exec_time_s, power_w });
        }
        self
    }

    /// Execution time `ref_time_s / perf_ratio` on every device added so far.
    pub fn scaled_profile(mut self, task: u32, ref_time_s: f64, power_w: f64) -> Self {
        for d in &self.devices {
            self.profiles
                .insert((TaskId(task), d.id), ExecProfile { exec_time_s: ref_time_s / d.perf_ratio, power_w });
        }
        self
    }

    pub fn deadline(mut self, deadline_s: f64) -> Self {
        self.deadline_s = Some(deadline_s);
        self
    }

    pub fn build(self) -> Result<(TaskGraph, SystemConfig)> {
        let channels = self.channels.into_iter().map(|((from, to), kind)| CommChannel { from, to, kind }).collect();
        let sys = SystemConfig::new(self.devices, channels, self.catalog)?;
        let tg = TaskGraph::new(self.tasks, self.arcs, self.deadline_s, self.profiles)?;
        Ok((tg, sys))
    }
}

/// Capabilities featured by at least one device.
pub fn featured_capabilities(sys: &SystemConfig) -> BTreeSet<Capability> {
    sys.devices().iter().flat_map(|d| d.capabilities.iter().copied()).collect()
}
