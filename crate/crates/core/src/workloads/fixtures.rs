//! Bundled instances: the six edge-hub-cloud configurations, the 16-task
//! power-line inspection workflow, and a small four-task example.
//!
//! Device specifications and budgets follow the published device table.
//! Channel parameters are seeded draws from the published per-channel-class
//! ranges; edge-to-edge channels are symmetric, and edge devices reach the
//! cloud through the hub. Task data sizes, memory/storage demands and
//! execution profiles are seeded draws from the published parameter ranges,
//! since the measured values are not available.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builder::{basic_device, link, InstanceBuilder};
use super::generator::{derive_candidate_params, ParamRanges};
use crate::error::{Error, Result};
use crate::model::{
    Capability, CapabilityInfo, ChannelKind, CommChannel, Device, DeviceId, Link, SystemConfig, Task, TaskGraph, TaskId,
};
use crate::units;

/// Seed of all fixture draws.
pub const FIXTURE_SEED: u64 = 20_240_701;

pub const CAPABILITY_CATALOG: [(u32, &str); 10] = [
    (0, "Basic computational capability"),
    (1, "Thermal camera"),
    (2, "LiDAR sensor"),
    (3, "Multispectral camera"),
    (4, "High-precision GNSS module"),
    (5, "Custom payload release mechanism"),
    (6, "Specialized software module (e.g., for UAV coordination)"),
    (7, "Integrated display unit"),
    (8, "Specialized hardware accelerator (e.g., a GPU)"),
    (9, "High-availability storage"),
];

pub fn capability_catalog() -> Vec<CapabilityInfo> {
    CAPABILITY_CATALOG
        .iter()
        .map(|&(id, d)| CapabilityInfo { id: Capability(id), description: d.to_string() })
        .collect()
}

/// Reserved resources of one device: (id, name, cores, memory GiB,
/// storage GiB, energy Wh or none, performance ratio).
pub struct DeviceSpec {
    pub id: &'static str,
    pub name: &'static str,
    pub cores: u32,
    pub memory_gib: f64,
    pub storage_gib: f64,
    pub energy_wh: Option<f64>,
    pub perf_ratio: f64,
}

pub const DEVICE_SPECS: [DeviceSpec; 6] = [
    DeviceSpec { id: "e1", name: "Raspberry Pi 3", cores: 2, memory_gib: 0.95, storage_gib: 1.0, energy_wh: Some(1.0), perf_ratio: 1.00 },
    DeviceSpec { id: "e2", name: "Odroid XU4", cores: 2, memory_gib: 1.00, storage_gib: 1.5, energy_wh: Some(1.0), perf_ratio: 1.20 },
    DeviceSpec { id: "e3", name: "Jetson TX2", cores: 2, memory_gib: 2.00, storage_gib: 2.0, energy_wh: Some(1.0), perf_ratio: 2.80 },
    DeviceSpec { id: "e4", name: "Jetson Xavier NX", cores: 2, memory_gib: 2.00, storage_gib: 2.5, energy_wh: Some(1.0), perf_ratio: 5.74 },
    DeviceSpec { id: "h1", name: "Mi Notebook Pro", cores: 4, memory_gib: 3.00, storage_gib: 5.0, energy_wh: Some(2.0), perf_ratio: 15.23 },
    DeviceSpec { id: "c1", name: "HPE DL580 Gen10", cores: 6, memory_gib: 4.00, storage_gib: 10.0, energy_wh: Some(10.0), perf_ratio: 21.70 },
];

/// One of the six system configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum ConfigId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

impl ConfigId {
    pub const ALL: [ConfigId; 6] = [ConfigId::C1, ConfigId::C2, ConfigId::C3, ConfigId::C4, ConfigId::C5, ConfigId::C6];

    /// Edge devices with their capabilities; the hub always features
    /// {0, 6, 7} and the cloud {0, 8, 9}.
    pub fn edge_capabilities(self) -> &'static [(&'static str, &'static [u32])] {
        match self {
            ConfigId::C1 => &[("e1", &[0, 1, 3]), ("e4", &[0, 2, 4, 5])],
            ConfigId::C2 => &[("e2", &[0, 1, 3]), ("e3", &[0, 2, 4, 5])],
            ConfigId::C3 => &[("e1", &[0, 3]), ("e2", &[0, 5]), ("e4", &[0, 1, 2, 4])],
            ConfigId::C4 => &[("e1", &[0, 3]), ("e2", &[0, 5]), ("e3", &[0, 1, 2, 4])],
            ConfigId::C5 => &[("e1", &[0, 1]), ("e2", &[0, 3]), ("e3", &[0, 5]), ("e4", &[0, 2, 4])],
            ConfigId::C6 => &[("e1", &[0, 1]), ("e2", &[0, 3]), ("e3", &[0, 2, 4]), ("e4", &[0, 5])],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConfigId::C1 => "C1",
            ConfigId::C2 => "C2",
            ConfigId::C3 => "C3",
            ConfigId::C4 => "C4",
            ConfigId::C5 => "C5",
            ConfigId::C6 => "C6",
        }
    }
}

impl std::fmt::Display for ConfigId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConfigId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConfigId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownConfig(s.to_string()))
    }
}

fn device_from_spec(spec: &DeviceSpec, caps: &[u32]) -> Device {
    Device {
        id: spec.id.parse().expect("static device id"),
        cores: spec.cores,
        capabilities: caps.iter().map(|&c| Capability(c)).collect(),
        memory_budget_bits: units::gib_to_bits(spec.memory_gib),
        storage_budget_bits: units::gib_to_bits(spec.storage_gib),
        energy_budget_j: spec.energy_wh.map_or(f64::INFINITY, units::wh_to_joules),
        perf_ratio: spec.perf_ratio,
    }
}

fn spec(id: &str) -> &'static DeviceSpec {
    DEVICE_SPECS.iter().find(|s| s.id == id).expect("known device")
}

/// Parameter ranges per channel class: bandwidth (Mbit/s), transmit and
/// receive energy (µJ/bit).
#[derive(Debug, Clone, Copy)]
pub struct ChannelRange {
    pub bandwidth_mbps: (f64, f64),
    pub tx_uj_per_bit: (f64, f64),
    pub rx_uj_per_bit: (f64, f64),
}

pub const EDGE_EDGE: ChannelRange =
    ChannelRange { bandwidth_mbps: (6.0, 9.0), tx_uj_per_bit: (0.6, 1.0), rx_uj_per_bit: (0.4, 0.6) };
pub const EDGE_HUB: ChannelRange =
    ChannelRange { bandwidth_mbps: (9.0, 13.0), tx_uj_per_bit: (0.8, 1.2), rx_uj_per_bit: (0.6, 0.8) };
pub const HUB_EDGE: ChannelRange =
    ChannelRange { bandwidth_mbps: (7.0, 10.0), tx_uj_per_bit: (0.7, 1.1), rx_uj_per_bit: (0.5, 0.7) };
pub const HUB_CLOUD: ChannelRange =
    ChannelRange { bandwidth_mbps: (10.0, 15.0), tx_uj_per_bit: (1.8, 2.7), rx_uj_per_bit: (0.8, 1.2) };
pub const CLOUD_HUB: ChannelRange =
    ChannelRange { bandwidth_mbps: (16.0, 24.0), tx_uj_per_bit: (2.0, 3.0), rx_uj_per_bit: (1.0, 1.5) };

impl ChannelRange {
    fn draw(&self, rng: &mut impl Rng) -> Link {
        let round = |v: f64, k: f64| (v * k).round() / k;
        let (bw, tx, rx) = (self.bandwidth_mbps, self.tx_uj_per_bit, self.rx_uj_per_bit);
        link(
            round(rng.gen_range(bw.0..=bw.1), 100.0),
            round(rng.gen_range(tx.0..=tx.1), 1000.0),
            round(rng.gen_range(rx.0..=rx.1), 1000.0),
        )
    }

    pub fn contains(&self, l: &Link) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| lo - 1e-9 <= v && v <= hi + 1e-9;
        inside(units::bps_to_mbps(l.bandwidth_bps), self.bandwidth_mbps)
            && inside(units::j_to_uj(l.tx_j_per_bit), self.tx_uj_per_bit)
            && inside(units::j_to_uj(l.rx_j_per_bit), self.rx_uj_per_bit)
    }
}

/// Direct links among all six devices, drawn once so every configuration
/// sees the same parameters for a device pair.
pub fn channel_table() -> BTreeMap<(DeviceId, DeviceId), Link> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let edges: Vec<DeviceId> = (1..=4).map(DeviceId::edge).collect();
    let (h1, c1) = (DeviceId::hub(1), DeviceId::cloud(1));
    let mut table = BTreeMap::new();
    for (k, &a) in edges.iter().enumerate() {
        for &b in &edges[k + 1..] {
            let l = EDGE_EDGE.draw(&mut rng);
            table.insert((a, b), l);
            table.insert((b, a), l);
        }
    }
    for &e in &edges {
        table.insert((e, h1), EDGE_HUB.draw(&mut rng));
    }
    for &e in &edges {
        table.insert((h1, e), HUB_EDGE.draw(&mut rng));
    }
    table.insert((h1, c1), HUB_CLOUD.draw(&mut rng));
    table.insert((c1, h1), CLOUD_HUB.draw(&mut rng));
    table
}

fn assemble(devices: Vec<Device>) -> Result<SystemConfig> {
    let table = channel_table();
    let ids: Vec<DeviceId> = devices.iter().map(|d| d.id).collect();
    let mut channels = Vec::new();
    for &a in &ids {
        for &b in &ids {
            if a == b {
                continue;
            }
            let kind = match table.get(&(a, b)) {
                Some(&l) => ChannelKind::Direct(l),
                None => ChannelKind::Relayed { via: DeviceId::hub(1) },
            };
            channels.push(CommChannel { from: a, to: b, kind });
        }
    }
    SystemConfig::new(devices, channels, capability_catalog())
}

/// The system of one configuration.
pub fn config(id: ConfigId) -> SystemConfig {
    let mut devices: Vec<Device> =
        id.edge_capabilities().iter().map(|&(dev, caps)| device_from_spec(spec(dev), caps)).collect();
    devices.push(device_from_spec(spec("h1"), &[0, 6, 7]));
    devices.push(device_from_spec(spec("c1"), &[0, 8, 9]));
    assemble(devices).expect("bundled configuration is valid")
}

/// All six devices with every capability of the catalog; used to draw
/// execution profiles that are shared by every configuration.
fn profiling_system() -> SystemConfig {
    let all: Vec<u32> = (0..10).collect();
    assemble(DEVICE_SPECS.iter().map(|s| device_from_spec(s, &all)).collect()).expect("valid")
}

/// Required capability of each task of the inspection workflow.
pub const REAL_WORLD_CAPABILITIES: [u32; 16] = [3, 0, 0, 0, 2, 4, 0, 0, 1, 0, 0, 8, 9, 6, 7, 5];

/// Arcs of the inspection workflow: three sensing chains converge on the
/// fusion task 12, which feeds storage (13) and path planning (14); path
/// planning feeds the display (15) and tag deployment (16).
pub const REAL_WORLD_ARCS: [(u32, u32); 15] = [
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 12),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 12),
    (9, 10),
    (10, 11),
    (11, 12),
    (12, 13),
    (12, 14),
    (14, 15),
    (14, 16),
];

/// The 16-task inspection workflow with profiles for all six devices.
pub fn real_world_tg() -> TaskGraph {
    let ranges = ParamRanges::default();
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 0x5151);
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    let tasks = REAL_WORLD_CAPABILITIES
        .iter()
        .enumerate()
        .map(|(k, &cap)| Task {
            id: TaskId(k as u32 + 1),
            capability: Capability(cap),
            output_data_bits: units::mbit_to_bits(round2(rng.gen_range(ranges.data_mbit.0..=ranges.data_mbit.1))),
            memory_bits: units::mbit_to_bits(round2(rng.gen_range(ranges.memory_mbit.0..=ranges.memory_mbit.1))),
            storage_bits: units::mbit_to_bits(round2(rng.gen_range(ranges.storage_mbit.0..=ranges.storage_mbit.1))),
        })
        .collect();
    let arcs = REAL_WORLD_ARCS.iter().map(|&(a, b)| (TaskId(a), TaskId(b))).collect();
    let tg = TaskGraph::new(tasks, arcs, None, BTreeMap::new()).expect("valid workflow");
    derive_candidate_params(tg, &profiling_system(), FIXTURE_SEED ^ 0xa11, &ranges)
}

/// The inspection workflow paired with one configuration.
pub fn real_world_fixture(id: ConfigId) -> (TaskGraph, SystemConfig) {
    (real_world_tg(), config(id))
}

/// Looks a configuration up by name ("C1" … "C6").
pub fn real_world_fixture_named(name: &str) -> Result<(TaskGraph, SystemConfig)> {
    Ok(real_world_fixture(name.parse()?))
}

/// Four tasks (capabilities 2, 1, 0, 3; arcs 1→3, 2→3, 3→4) on
/// e1{0,1}, e2{0,2}, h1{0,3} with one core each and c1{0} with two cores;
/// the edge devices reach the cloud through the hub. Task 3 has five
/// candidate placements, the others one each.
pub fn transformation_example() -> (TaskGraph, SystemConfig) {
    let (e1, e2, h1, c1) = (DeviceId::edge(1), DeviceId::edge(2), DeviceId::hub(1), DeviceId::cloud(1));
    let with_ratio = |mut d: Device, r: f64| {
        d.perf_ratio = r;
        d
    };
    let mut b = InstanceBuilder::new()
        .device(with_ratio(basic_device(e1, 1, &[1]), 1.0))
        .device(with_ratio(basic_device(e2, 1, &[2]), 1.2))
        .device(with_ratio(basic_device(h1, 1, &[3]), 15.23))
        .device(with_ratio(basic_device(c1, 2, &[]), 21.70))
        .link_both(e1, e2, link(7.5, 0.8, 0.5))
        .link(e1, h1, link(11.0, 1.0, 0.7))
        .link(e2, h1, link(11.0, 1.0, 0.7))
        .link(h1, e1, link(8.5, 0.9, 0.6))
        .link(h1, e2, link(8.5, 0.9, 0.6))
        .link(h1, c1, link(12.5, 2.25, 1.0))
        .link(c1, h1, link(20.0, 2.5, 1.25))
        .relay(e1, c1, h1)
        .relay(e2, c1, h1)
        .relay(c1, e1, h1)
        .relay(c1, e2, h1)
        .catalog(capability_catalog());
    let caps = [2, 1, 0, 3];
    let ref_times = [2.0, 3.0, 4.0, 1.0];
    for k in 0..4u32 {
        b = b.task(k + 1, caps[k as usize], 10e6, 100e6, 200e6).scaled_profile(k + 1, ref_times[k as usize], 2.0);
    }
    b.arc(1, 3).arc(2, 3).arc(3, 4).build().expect("valid example")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configurations_have_the_published_core_counts() {
        let cores: Vec<u32> = ConfigId::ALL.iter().map(|&c| config(c).total_cores()).collect();
        assert_eq!(cores, vec![14, 14, 16, 16, 18, 18]);
        assert_eq!(config(ConfigId::C1).devices().len(), 4);
    }

    #[test]
    fn every_device_has_basic_capability() {
        for c in ConfigId::ALL {
            assert!(config(c).devices().iter().all(|d| d.features(Capability::BASIC)));
        }
    }

    #[test]
    fn edge_to_cloud_is_relayed_through_the_hub() {
        let sys = config(ConfigId::C6);
        for k in 1..=4 {
            let e = DeviceId::edge(k);
            assert_eq!(sys.channel(e, DeviceId::cloud(1)).unwrap().relay(), Some(DeviceId::hub(1)));
            assert_eq!(sys.channel(DeviceId::cloud(1), e).unwrap().relay(), Some(DeviceId::hub(1)));
        }
    }

    #[test]
    fn channel_draws_respect_their_class_ranges() {
        let t = channel_table();
        for (&(a, b), l) in &t {
            use crate::model::Tier::*;
            let range = match (a.tier, b.tier) {
                (Edge, Edge) => EDGE_EDGE,
                (Edge, Hub) => EDGE_HUB,
                (Hub, Edge) => HUB_EDGE,
                (Hub, Cloud) => HUB_CLOUD,
                (Cloud, Hub) => CLOUD_HUB,
                other => panic!("unexpected pair {other:?}"),
            };
            assert!(range.contains(l), "{a}->{b}: {l:?}");
        }
        assert_eq!(t[&(DeviceId::edge(1), DeviceId::edge(2))], t[&(DeviceId::edge(2), DeviceId::edge(1))]);
    }

    #[test]
    fn fusion_and_storage_tasks_need_cloud_capabilities() {
        let tg = real_world_tg();
        assert_eq!(tg.task(tg.index_of(TaskId(12)).unwrap()).capability, Capability(8));
        assert_eq!(tg.task(tg.index_of(TaskId(13)).unwrap()).capability, Capability(9));
        assert_eq!(tg.len(), 16);
    }

    #[test]
    fn unknown_config_is_reported() {
        assert!(matches!("C7".parse::<ConfigId>(), Err(Error::UnknownConfig(_))));
        assert_eq!("c3".parse::<ConfigId>().unwrap(), ConfigId::C3);
    }
}
