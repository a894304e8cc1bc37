//! Extended task graph: every task expanded into its feasible core placements
//! ("candidate nodes") and every arc into all pairs of those placements, with
//! latency and energy parameters precomputed.

mod deadline;
mod params;

use std::ops::Range;

use serde::Serialize;

pub use deadline::{compute_deadline, critical_path, CpAggregate, DEFAULT_DEADLINE_FACTOR};
pub use params::{comm_energy, comm_latency, comp_energy, ArcEnergy};

use crate::error::{Error, Result};
use crate::model::{Capability, DeviceId, SystemConfig, TaskGraph, TaskId};

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateNode {
    /// Dense task index.
    pub task: usize,
    pub device: DeviceId,
    /// 1-based reserved core index on `device`.
    pub core: u32,
    pub exec_time_s: f64,
    pub power_w: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateArc {
    /// Node indices.
    pub from: usize,
    pub to: usize,
    pub relay: Option<DeviceId>,
    pub comm_latency_s: f64,
    pub comm_energy_j: f64,
    pub energy: ArcEnergy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtgTask {
    pub id: TaskId,
    pub capability: Capability,
    pub data_bits: f64,
    pub memory_bits: f64,
    pub storage_bits: f64,
    pub nodes: Range<usize>,
}

/// All candidate arcs stemming from one task-graph arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcGroup {
    pub parent: usize,
    pub child: usize,
    pub arcs: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtgOptions {
    pub deadline_factor: f64,
    pub cp_aggregate: CpAggregate,
}

impl Default for EtgOptions {
    fn default() -> Self {
        EtgOptions { deadline_factor: DEFAULT_DEADLINE_FACTOR, cp_aggregate: CpAggregate::Mean }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTaskGraph {
    tasks: Vec<EtgTask>,
    nodes: Vec<CandidateNode>,
    arcs: Vec<CandidateArc>,
    groups: Vec<ArcGroup>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
    deadline_s: f64,
}

/// Builds the ETG with the default deadline rule.
pub fn build_etg(tg: &TaskGraph, sys: &SystemConfig) -> Result<ExtendedTaskGraph> {
    build_etg_with(tg, sys, &EtgOptions::default())
}

pub fn build_etg_with(tg: &TaskGraph, sys: &SystemConfig, opts: &EtgOptions) -> Result<ExtendedTaskGraph> {
    let mut tasks = Vec::with_capacity(tg.len());
    let mut nodes = Vec::new();
    for (ti, t) in tg.tasks().iter().enumerate() {
        let start = nodes.len();
        for dev in sys.devices().iter().filter(|d| d.features(t.capability)) {
            let prof = tg.profile(t.id, dev.id).ok_or(Error::MissingProfile { task: t.id, device: dev.id })?;
            for core in 1..=dev.cores {
                nodes.push(CandidateNode {
                    task: ti,
                    device: dev.id,
                    core,
                    exec_time_s: prof.exec_time_s,
                    power_w: prof.power_w,
                    energy_j: comp_energy(prof.exec_time_s, prof.power_w),
                });
            }
        }
        if nodes.len() == start {
            return Err(Error::NoCandidate { task: t.id });
        }
        tasks.push(EtgTask {
            id: t.id,
            capability: t.capability,
            data_bits: t.output_data_bits,
            memory_bits: t.memory_bits,
            storage_bits: t.storage_bits,
            nodes: start..nodes.len(),
        });
    }

    let mut arcs = Vec::new();
    let mut groups = Vec::with_capacity(tg.arcs().len());
    for &(p, c) in tg.arcs() {
        let (pi, ci) = (tg.index_of(p).expect("validated"), tg.index_of(c).expect("validated"));
        let start = arcs.len();
        let data = tasks[pi].data_bits;
        for from in tasks[pi].nodes.clone() {
            for to in tasks[ci].nodes.clone() {
                let route = sys.route(nodes[from].device, nodes[to].device)?;
                let energy = ArcEnergy::of(data, &route);
                arcs.push(CandidateArc {
                    from,
                    to,
                    relay: energy.relay.map(|(via, _)| via),
                    comm_latency_s: comm_latency(data, &route),
                    comm_energy_j: energy.total(),
                    energy,
                });
            }
        }
        groups.push(ArcGroup { parent: pi, child: ci, arcs: start..arcs.len() });
    }

    let parents = (0..tg.len()).map(|i| tg.parents(i).to_vec()).collect();
    let children = (0..tg.len()).map(|i| tg.children(i).to_vec()).collect();
    let mut etg = ExtendedTaskGraph {
        tasks,
        nodes,
        arcs,
        groups,
        parents,
        children,
        topo: tg.topological_order().to_vec(),
        out_arcs: Vec::new(),
        in_arcs: Vec::new(),
        deadline_s: f64::INFINITY,
    };
    etg.index_arcs();
    etg.deadline_s = match tg.deadline_s() {
        Some(d) => d,
        None => compute_deadline(&etg, opts.deadline_factor, opts.cp_aggregate),
    };
    Ok(etg)
}

impl ExtendedTaskGraph {
    fn index_arcs(&mut self) {
        self.out_arcs = vec![Vec::new(); self.nodes.len()];
        self.in_arcs = vec![Vec::new(); self.nodes.len()];
        for (k, a) in self.arcs.iter().enumerate() {
            self.out_arcs[a.from].push(k);
            self.in_arcs[a.to].push(k);
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn tasks(&self) -> &[EtgTask] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &EtgTask {
        &self.tasks[idx]
    }

    pub fn task_index(&self, id: TaskId) -> Option<usize> {
        self.tasks.binary_search_by_key(&id, |t| t.id).ok()
    }

    pub fn nodes(&self) -> &[CandidateNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &CandidateNode {
        &self.nodes[idx]
    }

    /// Candidate nodes of one task, ordered by device then core.
    pub fn candidates(&self, task: usize) -> &[CandidateNode] {
        &self.nodes[self.tasks[task].nodes.clone()]
    }

    pub fn node_index(&self, task: usize, device: DeviceId, core: u32) -> Option<usize> {
        let r = self.tasks.get(task)?.nodes.clone();
        self.nodes[r.clone()]
            .binary_search_by(|n| (n.device, n.core).cmp(&(device, core)))
            .ok()
            .map(|k| r.start + k)
    }

    pub fn arcs(&self) -> &[CandidateArc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &CandidateArc {
        &self.arcs[idx]
    }

    pub fn groups(&self) -> &[ArcGroup] {
        &self.groups
    }

    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }

    pub fn in_arcs(&self, node: usize) -> &[usize] {
        &self.in_arcs[node]
    }

    /// Index of the candidate arc `from -> to`, if the two nodes belong to a
    /// parent/child task pair.
    pub fn arc_between(&self, from: usize, to: usize) -> Option<usize> {
        self.out_arcs[from].iter().copied().find(|&a| self.arcs[a].to == to)
    }

    pub fn parents(&self, task: usize) -> &[usize] {
        &self.parents[task]
    }

    pub fn children(&self, task: usize) -> &[usize] {
        &self.children[task]
    }

    /// Direct parent/child relation in either direction.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.children[a].binary_search(&b).is_ok() || self.children[b].binary_search(&a).is_ok()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn deadline_s(&self) -> f64 {
        self.deadline_s
    }

    pub fn with_deadline(mut self, deadline_s: f64) -> Self {
        self.deadline_s = deadline_s;
        self
    }

    /// Copy with every execution time, communication latency and the deadline
    /// multiplied by `k`. Power draws stay fixed, so computational energy
    /// scales with time; communication energy is unchanged.
    pub fn scale_time(&self, k: f64) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.exec_time_s *= k;
            n.energy_j = comp_energy(n.exec_time_s, n.power_w);
        }
        for a in &mut out.arcs {
            a.comm_latency_s *= k;
        }
        out.deadline_s *= k;
        out
    }

    pub fn to_dump(&self) -> EtgDump {
        let node_ref = |n: usize| {
            let c = &self.nodes[n];
            (self.tasks[c.task].id, c.device, c.core)
        };
        EtgDump {
            schema_version: crate::model::json::SCHEMA_VERSION,
            deadline_s: self.deadline_s,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    task: self.tasks[n.task].id,
                    device: n.device,
                    core: n.core,
                    exec_time_s: n.exec_time_s,
                    power_w: n.power_w,
                    energy_j: n.energy_j,
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| {
                    let (ft, fd, fc) = node_ref(a.from);
                    let (tt, td, tc) = node_ref(a.to);
                    ArcDump {
                        from_task: ft,
                        from_device: fd,
                        from_core: fc,
                        to_task: tt,
                        to_device: td,
                        to_core: tc,
                        relay: a.relay,
                        comm_latency_s: a.comm_latency_s,
                        comm_energy_j: a.comm_energy_j,
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("ETG serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EtgDump {
    pub schema_version: u32,
    pub deadline_s: f64,
    pub nodes: Vec<NodeDump>,
    pub arcs: Vec<ArcDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeDump {
    pub task: TaskId,
    pub device: DeviceId,
    pub core: u32,
    pub exec_time_s: f64,
    pub power_w: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcDump {
    pub from_task: TaskId,
    pub from_device: DeviceId,
    pub from_core: u32,
    pub to_task: TaskId,
    pub to_device: DeviceId,
    pub to_core: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay: Option<DeviceId>,
    pub comm_latency_s: f64,
    pub comm_energy_j: f64,
}
