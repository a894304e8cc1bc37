//! Method-agnostic schedule checking and energy/latency metrics.
//!
//! The validator only reads a [`Schedule`] (task placements and start times),
//! never solver variables, so MILP, heuristic and oracle schedules are all
//! judged by the same rules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etg::ExtendedTaskGraph;
use crate::model::{DeviceId, SystemConfig, TaskId};

/// Where and when one task runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub task: TaskId,
    pub device: DeviceId,
    pub core: u32,
    pub start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// One placement per task, in task order.
    pub placements: Vec<Placement>,
    pub makespan_s: f64,
    pub method: String,
}

impl Schedule {
    /// Builds a schedule from per-task candidate node indices and starts
    /// (both indexed by dense task index); the makespan is the latest
    /// completion.
    pub fn from_nodes(etg: &ExtendedTaskGraph, nodes: &[usize], starts: &[f64], method: &str) -> Schedule {
        let placements: Vec<Placement> = nodes
            .iter()
            .zip(starts)
            .map(|(&n, &start_s)| {
                let c = etg.node(n);
                Placement { task: etg.task(c.task).id, device: c.device, core: c.core, start_s }
            })
            .collect();
        let makespan_s = nodes.iter().zip(starts).map(|(&n, &s)| s + etg.node(n).exec_time_s).fold(0.0, f64::max);
        Schedule { placements, makespan_s, method: method.to_string() }
    }

    /// Candidate node and start time per dense task index.
    pub fn resolve(&self, etg: &ExtendedTaskGraph) -> Result<Vec<(usize, f64)>> {
        let mut out = vec![None; etg.num_tasks()];
        for p in &self.placements {
            let t = etg.task_index(p.task).ok_or_else(|| Error::Decode(format!("unknown task {}", p.task)))?;
            let n = etg.node_index(t, p.device, p.core).ok_or_else(|| {
                Error::Decode(format!("task {} has no candidate on {} core {}", p.task, p.device, p.core))
            })?;
            if out[t].replace((n, p.start_s)).is_some() {
                return Err(Error::Decode(format!("task {} is placed twice", p.task)));
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(t, v)| v.ok_or_else(|| Error::Decode(format!("task {} is not placed", etg.task(t).id))))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Schedule> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Selection,
    StartBound,
    Precedence,
    Completion,
    Deadline,
    Nonoverlap,
    Capability,
    Memory,
    Storage,
    Energy,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Selection => "selection",
            Family::StartBound => "start-bound",
            Family::Precedence => "precedence",
            Family::Completion => "completion",
            Family::Deadline => "deadline",
            Family::Nonoverlap => "nonoverlap",
            Family::Capability => "capability",
            Family::Memory => "memory",
            Family::Storage => "storage",
            Family::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: Family,
    pub entities: Vec<String>,
    /// Deficit in the constraint's own unit (s, bits, J, or task count).
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Sorted worst-first within the order of families.
    pub violations: Vec<Violation>,
    pub energy_per_device_j: BTreeMap<DeviceId, f64>,
    pub declared_makespan_s: f64,
    pub recomputed_makespan_s: f64,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, family: Family) -> bool {
        self.violations.iter().any(|v| v.family == family)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Tolerances of the validator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub time_s: f64,
    pub memory_bits: f64,
    pub storage_bits: f64,
    pub energy_j: f64,
}

impl Tolerances {
    pub fn with_time(time_s: f64) -> Self {
        Tolerances { time_s, memory_bits: 1.0, storage_bits: 1.0, energy_j: 1e-9 }
    }
}

/// Whether a task occupying `[start, end)` is executing at instant `s`,
/// with times compared up to `eps`.
pub fn is_active(start: f64, end: f64, s: f64, eps: f64) -> bool {
    start - eps <= s && s < end - eps
}

/// Checks `schedule` against every constraint family, with times compared up
/// to `epsilon` seconds.
pub fn validate(schedule: &Schedule, etg: &ExtendedTaskGraph, sys: &SystemConfig, epsilon: f64) -> ViolationReport {
    validate_with(schedule, etg, sys, &Tolerances::with_time(epsilon))
}

pub fn validate_with(
    schedule: &Schedule,
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    tol: &Tolerances,
) -> ViolationReport {
    let mut violations = Vec::new();
    let mut push = |family, entities: Vec<String>, magnitude: f64| violations.push(Violation { family, entities, magnitude });

    let resolved = match schedule.resolve(etg) {
        Ok(r) => r,
        Err(e) => {
            push(Family::Selection, vec![e.to_string()], 1.0);
            return ViolationReport {
                violations,
                energy_per_device_j: BTreeMap::new(),
                declared_makespan_s: schedule.makespan_s,
                recomputed_makespan_s: f64::NAN,
            };
        }
    };
    let name = |t: usize| format!("task {}", etg.task(t).id);
    let start = |t: usize| resolved[t].1;
    let node = |t: usize| etg.node(resolved[t].0);
    let end = |t: usize| start(t) + node(t).exec_time_s;
    let n = etg.num_tasks();
    let eps = tol.time_s;

    for t in 0..n {
        if start(t) < -eps || !start(t).is_finite() {
            push(Family::StartBound, vec![name(t)], -start(t));
        }
    }

    for g in etg.groups() {
        let (p, c) = (g.parent, g.child);
        let arc = etg.arc_between(resolved[p].0, resolved[c].0).expect("candidate arcs are complete");
        let ready = end(p) + etg.arc(arc).comm_latency_s;
        if ready > start(c) + eps {
            push(Family::Precedence, vec![name(p), name(c)], ready - start(c));
        }
    }

    let completion = (0..n).map(end).fold(0.0, f64::max);
    if (schedule.makespan_s - completion).abs() > eps {
        push(Family::Completion, vec!["makespan".into()], (schedule.makespan_s - completion).abs());
    }
    let latest = completion.max(schedule.makespan_s);
    if latest > etg.deadline_s() + eps {
        push(Family::Deadline, vec!["makespan".into()], latest - etg.deadline_s());
    }

    for a in 0..n {
        for b in (a + 1)..n {
            let (na, nb) = (node(a), node(b));
            if na.device != nb.device || na.core != nb.core {
                continue;
            }
            let overlap = end(a).min(end(b)) - start(a).max(start(b));
            if overlap > eps {
                push(Family::Nonoverlap, vec![name(a), name(b), format!("{} core {}", na.device, na.core)], overlap);
            }
        }
    }

    for s_task in 0..n {
        let s = start(s_task);
        for dev in sys.devices() {
            let active: Vec<usize> =
                (0..n).filter(|&t| node(t).device == dev.id && is_active(start(t), end(t), s, eps)).collect();
            if active.is_empty() {
                continue;
            }
            let mut by_cap: BTreeMap<_, Vec<usize>> = BTreeMap::new();
            for &t in &active {
                let cap = etg.task(t).capability;
                if cap.is_specialized() {
                    by_cap.entry(cap).or_default().push(t);
                }
            }
            for (cap, ts) in by_cap {
                if ts.len() > 1 {
                    let mut ent: Vec<String> = ts.iter().map(|&t| name(t)).collect();
                    ent.push(format!("{} capability {} at {s}", dev.id, cap));
                    push(Family::Capability, ent, (ts.len() - 1) as f64);
                }
            }
            let mem: f64 = active.iter().map(|&t| etg.task(t).memory_bits).sum();
            if mem > dev.memory_budget_bits + tol.memory_bits {
                let mut ent: Vec<String> = active.iter().map(|&t| name(t)).collect();
                ent.push(format!("{} at {s}", dev.id));
                push(Family::Memory, ent, mem - dev.memory_budget_bits);
            }
            let sto: f64 = active.iter().map(|&t| etg.task(t).storage_bits).sum();
            if sto > dev.storage_budget_bits + tol.storage_bits {
                let mut ent: Vec<String> = active.iter().map(|&t| name(t)).collect();
                ent.push(format!("{} at {s}", dev.id));
                push(Family::Storage, ent, sto - dev.storage_budget_bits);
            }
        }
    }

    let nodes: Vec<usize> = resolved.iter().map(|&(n, _)| n).collect();
    let energy = device_energy(&nodes, etg, sys);
    for dev in sys.devices() {
        let e = energy[&dev.id];
        if e > dev.energy_budget_j + tol.energy_j {
            push(Family::Energy, vec![dev.id.to_string()], e - dev.energy_budget_j);
        }
    }

    // Repeated instants can report the same resource clash more than once.
    violations.dedup_by(|a, b| a.family == b.family && a.entities == b.entities);
    violations.sort_by(|a, b| a.family.cmp(&b.family).then(b.magnitude.total_cmp(&a.magnitude)));
    ViolationReport {
        violations,
        energy_per_device_j: energy,
        declared_makespan_s: schedule.makespan_s,
        recomputed_makespan_s: completion,
    }
}

/// Energy charged to every device for an allocation (candidate node per
/// dense task index): computation on the executing device, transmission on
/// the sender, reception on the receiver, and both for a relay.
pub fn device_energy(nodes: &[usize], etg: &ExtendedTaskGraph, sys: &SystemConfig) -> BTreeMap<DeviceId, f64> {
    let mut energy: BTreeMap<DeviceId, f64> = sys.devices().iter().map(|d| (d.id, 0.0)).collect();
    for &n in nodes {
        let c = etg.node(n);
        *energy.entry(c.device).or_default() += c.energy_j;
    }
    for g in etg.groups() {
        let a = etg.arc(etg.arc_between(nodes[g.parent], nodes[g.child]).expect("complete"));
        *energy.entry(etg.node(a.from).device).or_default() += a.energy.sender_j;
        *energy.entry(etg.node(a.to).device).or_default() += a.energy.receiver_j;
        if let Some((via, e)) = a.energy.relay {
            *energy.entry(via).or_default() += e;
        }
    }
    energy
}

/// Per-device energy of a schedule.
pub fn total_energy(schedule: &Schedule, etg: &ExtendedTaskGraph, sys: &SystemConfig) -> Result<BTreeMap<DeviceId, f64>> {
    let nodes: Vec<usize> = schedule.resolve(etg)?.into_iter().map(|(n, _)| n).collect();
    Ok(device_energy(&nodes, etg, sys))
}

/// Relative makespan reduction of the MILP schedule over the heuristic one,
/// in percent.
pub fn improvement(milp_makespan: f64, heft_makespan: f64) -> Result<f64> {
    if !(milp_makespan > 0.0 && heft_makespan > 0.0) {
        return Err(Error::Domain(format!(
            "makespans must be positive, got milp={milp_makespan} heft={heft_makespan}"
        )));
    }
    Ok((heft_makespan - milp_makespan) / heft_makespan * 100.0)
}
