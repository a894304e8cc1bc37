use std::collections::{BTreeMap, BTreeSet};

use super::ids::{Capability, DeviceId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub id: DeviceId,
    /// Number of processing cores reserved for the workflow.
    pub cores: u32,
    pub capabilities: BTreeSet<Capability>,
    pub memory_budget_bits: f64,
    pub storage_budget_bits: f64,
    /// `f64::INFINITY` means the device is mains-powered / unconstrained.
    pub energy_budget_j: f64,
    /// Performance relative to the reference device.
    pub perf_ratio: f64,
}

impl Device {
    pub fn features(&self, cap: Capability) -> bool {
        self.capabilities.contains(&cap)
    }
}

/// Parameters of one direct link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub bandwidth_bps: f64,
    pub tx_j_per_bit: f64,
    pub rx_j_per_bit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Direct(Link),
    /// Traffic goes through `via`, using the direct channels `from -> via`
    /// and `via -> to`.
    Relayed { via: DeviceId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommChannel {
    pub from: DeviceId,
    pub to: DeviceId,
    pub kind: ChannelKind,
}

impl CommChannel {
    pub fn relay(&self) -> Option<DeviceId> {
        match self.kind {
            ChannelKind::Relayed { via } => Some(via),
            ChannelKind::Direct(_) => None,
        }
    }
}

/// How data moves between the devices of two candidate nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    SameDevice,
    Direct(Link),
    Relayed { first: Link, via: DeviceId, second: Link },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityInfo {
    pub id: Capability,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    devices: Vec<Device>,
    channels: BTreeMap<(DeviceId, DeviceId), CommChannel>,
    capability_catalog: Vec<CapabilityInfo>,
}

impl SystemConfig {
    pub fn new(
        mut devices: Vec<Device>,
        channels: Vec<CommChannel>,
        capability_catalog: Vec<CapabilityInfo>,
    ) -> Result<Self> {
        for (k, d) in devices.iter().enumerate() {
            let path = |f: &str| format!("devices[{k}].{f}");
            if !d.features(Capability::BASIC) {
                return Err(Error::validation(path("capabilities"), format!("device {} lacks capability 0", d.id)));
            }
            if d.cores == 0 {
                return Err(Error::validation(path("cores"), "at least one core must be reserved"));
            }
            for (f, v) in [("memory_budget", d.memory_budget_bits), ("storage_budget", d.storage_budget_bits)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation(path(f), format!("must be finite and non-negative, got {v}")));
                }
            }
            if d.energy_budget_j.is_nan() || d.energy_budget_j < 0.0 {
                return Err(Error::validation(path("energy_budget"), "must be non-negative"));
            }
            if !(d.perf_ratio.is_finite() && d.perf_ratio > 0.0) {
                return Err(Error::validation(path("perf_ratio"), "must be positive"));
            }
        }
        devices.sort_by_key(|d| d.id);
        if let Some(w) = devices.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::validation("devices", format!("duplicate device {}", w[0].id)));
        }
        let known: BTreeSet<DeviceId> = devices.iter().map(|d| d.id).collect();

        let mut map = BTreeMap::new();
        for (k, ch) in channels.iter().enumerate() {
            let path = format!("channels[{k}]");
            for end in [ch.from, ch.to] {
                if !known.contains(&end) {
                    return Err(Error::validation(&path, format!("unknown device {end}")));
                }
            }
            if ch.from == ch.to {
                return Err(Error::validation(&path, "a channel must connect two distinct devices"));
            }
            match ch.kind {
                ChannelKind::Direct(link) => {
                    if !(link.bandwidth_bps.is_finite() && link.bandwidth_bps > 0.0) {
                        return Err(Error::validation(&path, "bandwidth must be positive"));
                    }
                    if !(link.tx_j_per_bit.is_finite() && link.tx_j_per_bit >= 0.0)
                        || !(link.rx_j_per_bit.is_finite() && link.rx_j_per_bit >= 0.0)
                    {
                        return Err(Error::validation(&path, "per-bit energies must be non-negative"));
                    }
                }
                ChannelKind::Relayed { via } => {
                    if via == ch.from || via == ch.to {
                        return Err(Error::validation(&path, "relay must be a third device"));
                    }
                    if !known.contains(&via) {
                        return Err(Error::validation(&path, format!("unknown relay device {via}")));
                    }
                }
            }
            if map.insert((ch.from, ch.to), *ch).is_some() {
                return Err(Error::validation(&path, format!("duplicate channel {} -> {}", ch.from, ch.to)));
            }
        }
        for ch in map.values() {
            if let ChannelKind::Relayed { via } = ch.kind {
                for hop in [(ch.from, via), (via, ch.to)] {
                    if let Some(ChannelKind::Relayed { .. }) = map.get(&hop).map(|c| c.kind) {
                        return Err(Error::validation(
                            format!("channels[{}->{}]", ch.from, ch.to),
                            format!("hop {} -> {} is itself relayed; only one relay hop is allowed", hop.0, hop.1),
                        ));
                    }
                }
            }
        }

        Ok(SystemConfig { devices, channels: map, capability_catalog })
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn device(&self, id: DeviceId) -> Option<&Device> {
        self.devices.binary_search_by_key(&id, |d| d.id).ok().map(|k| &self.devices[k])
    }

    pub fn device_index(&self, id: DeviceId) -> Option<usize> {
        self.devices.binary_search_by_key(&id, |d| d.id).ok()
    }

    pub fn channels(&self) -> impl Iterator<Item = &CommChannel> {
        self.channels.values()
    }

    pub fn channel(&self, from: DeviceId, to: DeviceId) -> Option<&CommChannel> {
        self.channels.get(&(from, to))
    }

    pub fn capability_catalog(&self) -> &[CapabilityInfo] {
        &self.capability_catalog
    }

    pub fn total_cores(&self) -> u32 {
        self.devices.iter().map(|d| d.cores).sum()
    }

    /// Resolves the route between two devices. Same-device transfers need no
    /// channel.
    pub fn route(&self, from: DeviceId, to: DeviceId) -> Result<Route> {
        if from == to {
            return Ok(Route::SameDevice);
        }
        let ch = self.channel(from, to).ok_or(Error::MissingChannel { from, to })?;
        match ch.kind {
            ChannelKind::Direct(link) => Ok(Route::Direct(link)),
            ChannelKind::Relayed { via } => {
                let hop = |a, b| match self.channel(a, b).map(|c| c.kind) {
                    Some(ChannelKind::Direct(link)) => Ok(link),
                    _ => Err(Error::MissingChannel { from: a, to: b }),
                };
                Ok(Route::Relayed { first: hop(from, via)?, via, second: hop(via, to)? })
            }
        }
    }
}
