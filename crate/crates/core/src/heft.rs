//! Constraint-aware HEFT list scheduling over the extended task graph.
//!
//! Phase 1 ranks every candidate node by its upward rank (the longest
//! latency path from its start to the end of the workflow through candidate
//! arcs) and sorts them into a priority list. Phase 2 repeatedly takes the
//! first task of the list that can be scheduled, tries each of its candidates
//! and keeps the one with the earliest finish time, subject to energy,
//! memory, storage, capability, core-exclusivity and deadline constraints.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::etg::ExtendedTaskGraph;
use crate::model::{SystemConfig, TaskId};
use crate::validate::Schedule;

/// Method name recorded in heuristic schedules.
pub const HEFT_METHOD: &str = "heft";

/// Upward rank per candidate node.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub rank: Vec<f64>,
}

impl RankTable {
    pub fn get(&self, node: usize) -> f64 {
        self.rank[node]
    }

    /// Candidate nodes by non-increasing rank; ties by (task id, device,
    /// core) ascending.
    pub fn priority_list(&self, etg: &ExtendedTaskGraph) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rank.len()).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (etg.node(a), etg.node(b));
            self.rank[b]
                .total_cmp(&self.rank[a])
                .then_with(|| etg.task(na.task).id.cmp(&etg.task(nb.task).id))
                .then_with(|| (na.device, na.core).cmp(&(nb.device, nb.core)))
        });
        order
    }
}

/// `R(n) = L(n) + max over outgoing arcs (CL + R(child))`, or `L(n)` for
/// candidates of exit tasks.
pub fn upward_rank(etg: &ExtendedTaskGraph) -> RankTable {
    let mut rank = vec![0.0; etg.nodes().len()];
    for &task in etg.topological_order().iter().rev() {
        for n in etg.task(task).nodes.clone() {
            let tail = etg
                .out_arcs(n)
                .iter()
                .map(|&a| {
                    let arc = etg.arc(a);
                    arc.comm_latency_s + rank[arc.to]
                })
                .fold(0.0, f64::max);
            rank[n] = etg.node(n).exec_time_s + tail;
        }
    }
    RankTable { rank }
}

/// Tasks placed so far: selected candidate and start per dense task index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialSchedule {
    pub node: Vec<Option<usize>>,
    pub start: Vec<f64>,
}

impl PartialSchedule {
    pub fn new(num_tasks: usize) -> Self {
        PartialSchedule { node: vec![None; num_tasks], start: vec![0.0; num_tasks] }
    }

    pub fn place(&mut self, task: usize, node: usize, start: f64) {
        self.node[task] = Some(node);
        self.start[task] = start;
    }

    pub fn is_scheduled(&self, task: usize) -> bool {
        self.node[task].is_some()
    }

    fn finish(&self, etg: &ExtendedTaskGraph, task: usize) -> f64 {
        self.start[task] + self.node[task].map_or(0.0, |n| etg.node(n).exec_time_s)
    }
}

/// Earliest time all inputs of `task` are available at `candidate`: the
/// latest parent finish plus transfer latency over the arc to `candidate`.
pub fn data_ready_time(
    etg: &ExtendedTaskGraph,
    task: usize,
    candidate: usize,
    partial: &PartialSchedule,
) -> Result<f64> {
    let mut ready: f64 = 0.0;
    for &p in etg.parents(task) {
        let pn = partial.node[p].ok_or(Error::UnscheduledParent { task: etg.task(task).id, parent: etg.task(p).id })?;
        let arc = etg.arc(etg.arc_between(pn, candidate).expect("candidate arcs are complete"));
        ready = ready.max(partial.finish(etg, p) + arc.comm_latency_s);
    }
    Ok(ready)
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeftOutcome {
    Scheduled(Schedule),
    /// No candidate of `task` meets the constraints and the deadline.
    Infeasible { task: TaskId },
}

impl HeftOutcome {
    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            HeftOutcome::Scheduled(s) => Some(s),
            HeftOutcome::Infeasible { .. } => None,
        }
    }

    pub fn into_schedule(self) -> Option<Schedule> {
        match self {
            HeftOutcome::Scheduled(s) => Some(s),
            HeftOutcome::Infeasible { .. } => None,
        }
    }
}

/// Energy every device would spend with `partial` plus `candidate` for
/// `task` and the arcs into it from scheduled parents.
fn energy_exceeded(etg: &ExtendedTaskGraph, sys: &SystemConfig, partial: &PartialSchedule, task: usize, candidate: usize) -> bool {
    let dev = |id| sys.device_index(id).expect("device");
    let chosen = |i: usize| if i == task { Some(candidate) } else { partial.node[i] };
    let mut energy = vec![0.0; sys.devices().len()];
    for n in (0..etg.num_tasks()).filter_map(chosen) {
        energy[dev(etg.node(n).device)] += etg.node(n).energy_j;
    }
    for g in etg.groups() {
        let (Some(from), Some(to)) = (chosen(g.parent), chosen(g.child)) else {
            continue;
        };
        let a = etg.arc(etg.arc_between(from, to).expect("candidate arcs are complete"));
        energy[dev(etg.node(a.from).device)] += a.energy.sender_j;
        energy[dev(etg.node(a.to).device)] += a.energy.receiver_j;
        if let Some((via, e)) = a.energy.relay {
            energy[dev(via)] += e;
        }
    }
    sys.devices().iter().zip(&energy).any(|(d, &e)| e > d.energy_budget_j)
}

/// Earliest start of `task` on `candidate` not before `ready`, pushed past
/// core, capability, memory and storage conflicts with tasks already
/// placed on the same device.
fn resolve_conflicts(
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    partial: &PartialSchedule,
    task: usize,
    candidate: usize,
    ready: f64,
) -> f64 {
    let me = etg.node(candidate);
    let info = etg.task(task);
    let device = sys.device(me.device).expect("device");
    let mut t = ready;
    // Tasks on this device still running at `ready`, by finish time.
    let mut running: Vec<usize> = (0..etg.num_tasks())
        .filter(|&j| partial.node[j].is_some_and(|n| etg.node(n).device == me.device) && partial.finish(etg, j) > t)
        .collect();
    running.sort_by(|&a, &b| {
        partial.finish(etg, a).total_cmp(&partial.finish(etg, b)).then_with(|| etg.task(a).id.cmp(&etg.task(b).id))
    });
    for &j in &running {
        let overlaps = |h: usize| t < partial.finish(etg, h) && t + me.exec_time_s > partial.start[h];
        let core_of = |h: usize| etg.node(partial.node[h].expect("placed")).core;
        let concurrent: Vec<usize> = running.iter().copied().filter(|&h| core_of(h) != me.core && overlaps(h)).collect();
        let core_clash = core_of(j) == me.core && overlaps(j);
        let cap_clash = info.capability.is_specialized()
            && 1 + concurrent.iter().filter(|&&h| etg.task(h).capability == info.capability).count() > 1;
        let mem: f64 = info.memory_bits + concurrent.iter().map(|&h| etg.task(h).memory_bits).sum::<f64>();
        let sto: f64 = info.storage_bits + concurrent.iter().map(|&h| etg.task(h).storage_bits).sum::<f64>();
        if core_clash || cap_clash || mem > device.memory_budget_bits || sto > device.storage_budget_bits {
            t = partial.finish(etg, j);
        }
    }
    t
}

/// Schedules the workflow heuristically.
pub fn heft_schedule(etg: &ExtendedTaskGraph, sys: &SystemConfig) -> HeftOutcome {
    let ranks = upward_rank(etg);
    let list = ranks.priority_list(etg);
    let n = etg.num_tasks();
    let mut partial = PartialSchedule::new(n);
    for _ in 0..n {
        // First unscheduled task in the list whose parents are all placed.
        let task = list
            .iter()
            .map(|&c| etg.node(c).task)
            .find(|&i| !partial.is_scheduled(i) && etg.parents(i).iter().all(|&p| partial.is_scheduled(p)))
            .expect("an acyclic graph always has a ready task");
        let info = etg.task(task);
        let mut best: Option<(f64, usize, f64)> = None;
        for c in info.nodes.clone() {
            let node = etg.node(c);
            let device = sys.device(node.device).expect("device");
            if energy_exceeded(etg, sys, &partial, task, c)
                || info.memory_bits > device.memory_budget_bits
                || info.storage_bits > device.storage_budget_bits
            {
                continue;
            }
            let ready = data_ready_time(etg, task, c, &partial).expect("parents are scheduled");
            let start = resolve_conflicts(etg, sys, &partial, task, c, ready);
            let eft = start + node.exec_time_s;
            let better = match best {
                None => true,
                Some((b, bc, _)) => match eft.total_cmp(&b) {
                    Ordering::Less => true,
                    Ordering::Equal => (node.device, node.core) < (etg.node(bc).device, etg.node(bc).core),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((eft, c, start));
            }
        }
        match best {
            Some((eft, c, start)) if eft <= etg.deadline_s() => partial.place(task, c, start),
            _ => return HeftOutcome::Infeasible { task: info.id },
        }
    }
    let nodes: Vec<usize> = partial.node.iter().map(|n| n.expect("all placed")).collect();
    HeftOutcome::Scheduled(Schedule::from_nodes(etg, &nodes, &partial.start, HEFT_METHOD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etg::build_etg;
    use crate::model::DeviceId;
    use crate::validate::validate;
    use crate::workloads::builder::{basic_device, link, InstanceBuilder};
    use crate::workloads::fixtures;

    fn instance(b: InstanceBuilder) -> (ExtendedTaskGraph, SystemConfig) {
        let (tg, sys) = b.build().unwrap();
        (build_etg(&tg, &sys).unwrap(), sys)
    }

    /// e1 runs task 1 (L = 2) and sends 1 Mbit at 1 Mbit/s to e2, which runs
    /// task 2 (L = 3). Task 3 (L = 1) is a second child of task 1.
    fn chain() -> (ExtendedTaskGraph, SystemConfig) {
        let (e1, e2) = (DeviceId::edge(1), DeviceId::edge(2));
        instance(
            InstanceBuilder::new()
                .device(basic_device(e1, 1, &[1]))
                .device(basic_device(e2, 1, &[2]))
                .link_both(e1, e2, link(1.0, 0.0, 0.0))
                .task(1, 1, 1e6, 0.0, 0.0)
                .task(2, 2, 0.0, 0.0, 0.0)
                .task(3, 1, 0.0, 0.0, 0.0)
                .uniform_profile(1, 2.0, 1.0)
                .uniform_profile(2, 3.0, 1.0)
                .uniform_profile(3, 1.0, 1.0)
                .arc(1, 2)
                .arc(1, 3)
                .deadline(100.0),
        )
    }

    #[test]
    fn exit_rank_is_execution_time() {
        let (etg, _) = chain();
        let r = upward_rank(&etg);
        assert_eq!(r.get(etg.node_index(1, DeviceId::edge(2), 1).unwrap()), 3.0);
    }

    #[test]
    fn chain_rank_adds_transfer() {
        // Task 1: L = 2, arcs (CL 1 + R 3) and (CL 0 + R 1) → R = 6.
        let (etg, _) = chain();
        let r = upward_rank(&etg);
        assert!((r.get(etg.node_index(0, DeviceId::edge(1), 1).unwrap()) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rank_takes_the_longest_branch() {
        // L = 1 with branches CL + R = 4 and 7 → 8.
        let d = DeviceId::edge(1);
        let (etg, _) = instance(
            InstanceBuilder::new()
                .device(basic_device(d, 1, &[]))
                .task(1, 0, 0.0, 0.0, 0.0)
                .task(2, 0, 0.0, 0.0, 0.0)
                .task(3, 0, 0.0, 0.0, 0.0)
                .uniform_profile(1, 1.0, 1.0)
                .uniform_profile(2, 4.0, 1.0)
                .uniform_profile(3, 7.0, 1.0)
                .arc(1, 2)
                .arc(1, 3)
                .deadline(100.0),
        );
        assert!((upward_rank(&etg).get(0) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn parents_outrank_children() {
        let (tg, sys) = fixtures::transformation_example();
        let etg = build_etg(&tg, &sys).unwrap();
        let r = upward_rank(&etg);
        for a in etg.arcs() {
            assert!(r.get(a.from) > r.get(a.to));
        }
    }

    #[test]
    fn data_ready_time_cases() {
        let (etg, _) = chain();
        let mut p = PartialSchedule::new(3);
        let c2 = etg.node_index(1, DeviceId::edge(2), 1).unwrap();
        assert!(matches!(data_ready_time(&etg, 1, c2, &p), Err(Error::UnscheduledParent { .. })));
        assert_eq!(data_ready_time(&etg, 0, 0, &p).unwrap(), 0.0);
        // Parent starts at 1, runs 2 s, transfer 1 s.
        p.place(0, etg.node_index(0, DeviceId::edge(1), 1).unwrap(), 1.0);
        assert_eq!(data_ready_time(&etg, 1, c2, &p).unwrap(), 4.0);
    }

    #[test]
    fn data_ready_time_is_the_latest_parent() {
        let (e1, e2) = (DeviceId::edge(1), DeviceId::edge(2));
        let (etg, _) = instance(
            InstanceBuilder::new()
                .device(basic_device(e1, 1, &[1]))
                .device(basic_device(e2, 1, &[2]))
                .link_both(e1, e2, link(2.0, 0.0, 0.0))
                .task(1, 1, 1e6, 0.0, 0.0)
                .task(2, 1, 0.0, 0.0, 0.0)
                .task(3, 2, 0.0, 0.0, 0.0)
                .uniform_profile(1, 2.0, 1.0)
                .uniform_profile(2, 4.0, 1.0)
                .uniform_profile(3, 1.0, 1.0)
                .arc(1, 3)
                .arc(2, 3)
                .deadline(100.0),
        );
        let mut p = PartialSchedule::new(3);
        p.place(0, 0, 1.0); // ready at 1 + 2 + 0.5 = 3.5
        p.place(1, 1, 0.0); // ready at 0 + 4 + 0 = 4.0
        assert_eq!(data_ready_time(&etg, 2, 2, &p).unwrap(), 4.0);
    }

    #[test]
    fn single_task_takes_the_fastest_candidate() {
        let (a, b) = (DeviceId::edge(1), DeviceId::hub(1));
        let (etg, sys) = instance(
            InstanceBuilder::new()
                .device(basic_device(a, 1, &[]))
                .device(basic_device(b, 1, &[]))
                .fully_connect(link(1.0, 0.0, 0.0))
                .task(1, 0, 0.0, 0.0, 0.0)
                .profile(1, a, 3.0, 1.0)
                .profile(1, b, 2.0, 1.0)
                .deadline(10.0),
        );
        let s = heft_schedule(&etg, &sys).into_schedule().unwrap();
        assert_eq!(s.placements[0].device, b);
        assert_eq!(s.placements[0].start_s, 0.0);
        assert_eq!(s.makespan_s, 2.0);
    }

    #[test]
    fn independent_tasks_use_both_cores() {
        let d = DeviceId::edge(1);
        let (etg, sys) = instance(
            InstanceBuilder::new()
                .device(basic_device(d, 2, &[]))
                .task(1, 0, 0.0, 0.0, 0.0)
                .task(2, 0, 0.0, 0.0, 0.0)
                .uniform_profile(1, 2.0, 1.0)
                .uniform_profile(2, 2.0, 1.0)
                .deadline(10.0),
        );
        let s = heft_schedule(&etg, &sys).into_schedule().unwrap();
        assert_eq!((s.placements[0].core, s.placements[0].start_s), (1, 0.0));
        assert_eq!((s.placements[1].core, s.placements[1].start_s), (2, 0.0));
    }

    #[test]
    fn shared_capability_is_serialized() {
        let d = DeviceId::edge(1);
        let (etg, sys) = instance(
            InstanceBuilder::new()
                .device(basic_device(d, 2, &[1]))
                .task(1, 1, 0.0, 0.0, 0.0)
                .task(2, 1, 0.0, 0.0, 0.0)
                .uniform_profile(1, 3.0, 1.0)
                .uniform_profile(2, 2.0, 1.0)
                .deadline(10.0),
        );
        let s = heft_schedule(&etg, &sys).into_schedule().unwrap();
        // Task 1 has the higher rank and starts first; task 2 waits for it.
        assert_eq!(s.placements[0].start_s, 0.0);
        assert_eq!(s.placements[1].start_s, 3.0);
        assert_eq!(s.makespan_s, 5.0);
        assert!(validate(&s, &etg, &sys, 1e-9).is_feasible());
    }

    #[test]
    fn deadline_miss_names_the_task() {
        let d = DeviceId::edge(1);
        let (etg, sys) = instance(
            InstanceBuilder::new()
                .device(basic_device(d, 1, &[]))
                .task(1, 0, 0.0, 0.0, 0.0)
                .task(2, 0, 0.0, 0.0, 0.0)
                .uniform_profile(1, 3.0, 1.0)
                .uniform_profile(2, 2.0, 1.0)
                .deadline(4.0),
        );
        assert_eq!(heft_schedule(&etg, &sys), HeftOutcome::Infeasible { task: TaskId(2) });
    }

    #[test]
    fn energy_budget_excludes_a_candidate() {
        let (a, b) = (DeviceId::edge(1), DeviceId::edge(2));
        let mut fast = basic_device(a, 1, &[]);
        fast.energy_budget_j = 5.0;
        let (etg, sys) = instance(
            InstanceBuilder::new()
                .device(fast)
                .device(basic_device(b, 1, &[]))
                .fully_connect(link(1.0, 0.0, 0.0))
                .task(1, 0, 0.0, 0.0, 0.0)
                .profile(1, a, 1.0, 10.0)
                .profile(1, b, 2.0, 1.0)
                .deadline(10.0),
        );
        let s = heft_schedule(&etg, &sys).into_schedule().unwrap();
        assert_eq!(s.placements[0].device, b);
    }

    #[test]
    fn transformation_example_is_valid() {
        let (tg, sys) = fixtures::transformation_example();
        let etg = build_etg(&tg, &sys).unwrap();
        let s = heft_schedule(&etg, &sys).into_schedule().unwrap();
        assert_eq!(s.placements.len(), 4);
        let r = validate(&s, &etg, &sys, crate::milp::epsilon(&etg));
        assert!(r.is_feasible(), "{:?}", r.violations);
    }
}
