use std::collections::BTreeMap;

use super::model::{DecodeMap, MilpModel, Sense, Tag, VarId, VarKind};
use crate::etg::ExtendedTaskGraph;
use crate::model::{Capability, DeviceId, SystemConfig};

/// Selects which resource families are emitted. Dropping a family relaxes
/// the model; everything else is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    pub capability: bool,
    pub memory: bool,
    pub storage: bool,
    pub energy: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { capability: true, memory: true, storage: true, energy: true }
    }
}

impl ModelOptions {
    /// Only selection, precedence, timing and core exclusivity.
    pub fn without_resources() -> Self {
        ModelOptions { capability: false, memory: false, storage: false, energy: false }
    }
}

/// Big-M constant: every task's slowest execution, every arc's slowest
/// transfer and the deadline, summed. No task of a feasible schedule can
/// complete later than this.
pub fn big_m(etg: &ExtendedTaskGraph) -> f64 {
    let exec: f64 = (0..etg.num_tasks())
        .map(|t| etg.candidates(t).iter().map(|c| c.exec_time_s).fold(0.0, f64::max))
        .sum();
    let comm: f64 = etg
        .groups()
        .iter()
        .map(|g| etg.arcs()[g.arcs.clone()].iter().map(|a| a.comm_latency_s).fold(0.0, f64::max))
        .sum();
    exec + comm + etg.deadline_s()
}

/// Strictness margin: a millionth of the shortest positive execution time,
/// but at least a nanosecond.
pub fn epsilon(etg: &ExtendedTaskGraph) -> f64 {
    let min_l = etg.nodes().iter().map(|n| n.exec_time_s).filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
    if min_l.is_finite() {
        (1e-6 * min_l).max(1e-9)
    } else {
        1e-9
    }
}

fn node_key(etg: &ExtendedTaskGraph, n: usize) -> String {
    let c = etg.node(n);
    format!("{},{},{}", etg.task(c.task).id, c.device, c.core)
}

/// Builds the complete model with every constraint family.
pub fn build_model(etg: &ExtendedTaskGraph, sys: &SystemConfig) -> MilpModel {
    build_model_with(etg, sys, &ModelOptions::default())
}

pub fn build_model_with(etg: &ExtendedTaskGraph, sys: &SystemConfig, opts: &ModelOptions) -> MilpModel {
    let omega = big_m(etg);
    let eps = epsilon(etg);
    let deadline = etg.deadline_s();
    let mut m = MilpModel::empty(omega, eps);
    let n_tasks = etg.num_tasks();
    let n_nodes = etg.nodes().len();
    let keys: Vec<String> = (0..n_nodes).map(|n| node_key(etg, n)).collect();

    let x: Vec<VarId> = (0..n_nodes).map(|n| m.binary(format!("x[{}]", keys[n]))).collect();
    let xa: Vec<VarId> = etg
        .arcs()
        .iter()
        .map(|a| m.binary(format!("xa[{},{}]", keys[a.from], keys[a.to])))
        .collect();
    let t: Vec<VarId> = (0..n_tasks)
        .map(|i| m.add_var(format!("t[{}]", etg.task(i).id), VarKind::Continuous, 0.0, Some(deadline)))
        .collect();
    let makespan = m.add_var("T".to_string(), VarKind::Continuous, 0.0, Some(deadline));

    // Pairs of candidate nodes of unrelated tasks that share a core.
    let mut by_core: BTreeMap<(DeviceId, u32), Vec<usize>> = BTreeMap::new();
    for (k, c) in etg.nodes().iter().enumerate() {
        by_core.entry((c.device, c.core)).or_default().push(k);
    }
    let mut core_pairs = Vec::new();
    for nodes in by_core.values() {
        for (p, &a) in nodes.iter().enumerate() {
            for &b in &nodes[p + 1..] {
                let (i, j) = (etg.node(a).task, etg.node(b).task);
                if i != j && !etg.adjacent(i, j) {
                    core_pairs.push(if i < j { (a, b) } else { (b, a) });
                }
            }
        }
    }
    core_pairs.sort_by_key(|&(a, b)| (etg.node(a).task, etg.node(b).task, a, b));
    let mut xo = BTreeMap::new();
    for &(a, b) in &core_pairs {
        let (i, j) = (etg.node(a).task, etg.node(b).task);
        xo.entry((i, j))
            .or_insert_with(|| m.binary(format!("xo[{},{}]", etg.task(i).id, etg.task(j).id)));
    }

    let mut xe = Vec::with_capacity(n_tasks * n_nodes);
    let mut xh = Vec::with_capacity(n_tasks * n_nodes);
    for e in 0..n_tasks {
        let ev = etg.task(e).id;
        for key in &keys {
            xe.push(m.binary(format!("xe[{ev},{key}]")));
        }
        for key in &keys {
            xh.push(m.binary(format!("xh[{ev},{key}]")));
        }
    }

    // Candidate selection: exactly one placement per task.
    for i in 0..n_tasks {
        let terms = etg.task(i).nodes.clone().map(|n| (1.0, x[n])).collect();
        m.add(Tag::Selection, terms, Sense::Eq, 1.0);
    }

    // Arc selection: an arc is chosen iff both its endpoints are.
    for (k, a) in etg.arcs().iter().enumerate() {
        m.add(Tag::ArcParent, vec![(1.0, xa[k]), (-1.0, x[a.from])], Sense::Le, 0.0);
    }
    for (k, a) in etg.arcs().iter().enumerate() {
        m.add(Tag::ArcChild, vec![(1.0, xa[k]), (-1.0, x[a.to])], Sense::Le, 0.0);
    }
    for (k, a) in etg.arcs().iter().enumerate() {
        m.add(Tag::ArcBoth, vec![(1.0, xa[k]), (-1.0, x[a.from]), (-1.0, x[a.to])], Sense::Ge, -1.0);
    }

    // Precedence: a child starts after its parent finishes and the data
    // arrives.
    for (k, a) in etg.arcs().iter().enumerate() {
        let (p, c) = (etg.node(a.from), etg.node(a.to));
        m.add(
            Tag::Precedence,
            vec![(1.0, t[p.task]), (p.exec_time_s, x[a.from]), (a.comm_latency_s, xa[k]), (-1.0, t[c.task])],
            Sense::Le,
            0.0,
        );
    }

    // Completion and deadline.
    for (n, c) in etg.nodes().iter().enumerate() {
        m.add(Tag::Completion, vec![(1.0, t[c.task]), (c.exec_time_s, x[n]), (-1.0, makespan)], Sense::Le, 0.0);
    }
    m.add(Tag::Deadline, vec![(1.0, makespan)], Sense::Le, deadline);

    // Non-overlap on a shared core; xo[i,j] = 1 orders i before j.
    for &(a, b) in &core_pairs {
        let (na, nb) = (etg.node(a), etg.node(b));
        let o = xo[&(na.task, nb.task)];
        m.add(
            Tag::NonoverlapFwd,
            vec![
                (1.0, t[na.task]),
                (na.exec_time_s, x[a]),
                (-1.0, t[nb.task]),
                (omega, x[a]),
                (omega, x[b]),
                (omega, o),
            ],
            Sense::Le,
            3.0 * omega,
        );
    }
    for &(a, b) in &core_pairs {
        let (na, nb) = (etg.node(a), etg.node(b));
        let o = xo[&(na.task, nb.task)];
        m.add(
            Tag::NonoverlapBwd,
            vec![
                (1.0, t[nb.task]),
                (nb.exec_time_s, x[b]),
                (-1.0, t[na.task]),
                (omega, x[a]),
                (omega, x[b]),
                (-omega, o),
            ],
            Sense::Le,
            2.0 * omega,
        );
    }

    // Execution indicators: xe[e,n] = 1 iff candidate n is selected and its
    // task executes at the start of task e, i.e. t_i <= t_e < t_i + L.
    // xh[e,n] = 1 selects the "event before start" branch when not executing.
    let dm_xe = |e: usize, n: usize| xe[e * n_nodes + n];
    let dm_xh = |e: usize, n: usize| xh[e * n_nodes + n];
    for e in 0..n_tasks {
        for (n, &xn) in x.iter().enumerate() {
            m.add(Tag::ExecSelect, vec![(1.0, dm_xe(e, n)), (-1.0, xn)], Sense::Le, 0.0);
        }
    }
    for e in 0..n_tasks {
        for (n, c) in etg.nodes().iter().enumerate() {
            m.add(
                Tag::ExecStart,
                vec![(1.0, t[c.task]), (-1.0, t[e]), (omega, x[n]), (omega, dm_xe(e, n))],
                Sense::Le,
                2.0 * omega,
            );
        }
    }
    for e in 0..n_tasks {
        for (n, c) in etg.nodes().iter().enumerate() {
            m.add(
                Tag::ExecEnd,
                vec![(1.0, t[e]), (-1.0, t[c.task]), (-c.exec_time_s, x[n]), (omega, x[n]), (omega, dm_xe(e, n))],
                Sense::Le,
                2.0 * omega - eps,
            );
        }
    }
    for e in 0..n_tasks {
        for (n, c) in etg.nodes().iter().enumerate() {
            m.add(
                Tag::ExecBefore,
                vec![(1.0, t[e]), (-1.0, t[c.task]), (omega, x[n]), (-omega, dm_xe(e, n)), (omega, dm_xh(e, n))],
                Sense::Le,
                2.0 * omega - eps,
            );
        }
    }
    for e in 0..n_tasks {
        for (n, c) in etg.nodes().iter().enumerate() {
            m.add(
                Tag::ExecAfter,
                vec![
                    (1.0, t[c.task]),
                    (c.exec_time_s, x[n]),
                    (-1.0, t[e]),
                    (omega, x[n]),
                    (-omega, dm_xe(e, n)),
                    (-omega, dm_xh(e, n)),
                ],
                Sense::Le,
                omega,
            );
        }
    }

    // Cumulative device usage at every event.
    let mut on_device: BTreeMap<DeviceId, Vec<usize>> = BTreeMap::new();
    for (n, c) in etg.nodes().iter().enumerate() {
        on_device.entry(c.device).or_default().push(n);
    }
    if opts.capability {
        for e in 0..n_tasks {
            for dev in sys.devices() {
                let nodes = on_device.get(&dev.id).map_or(&[][..], Vec::as_slice);
                let mut by_cap: BTreeMap<Capability, Vec<usize>> = BTreeMap::new();
                for &n in nodes {
                    let cap = etg.task(etg.node(n).task).capability;
                    if cap.is_specialized() {
                        by_cap.entry(cap).or_default().push(n);
                    }
                }
                for ns in by_cap.values() {
                    if distinct_tasks(etg, ns) > 1 {
                        m.add(Tag::Capability, ns.iter().map(|&n| (1.0, dm_xe(e, n))).collect(), Sense::Le, 1.0);
                    }
                }
            }
        }
    }
    let resource_rows = |m: &mut MilpModel, tag: Tag, demand: &dyn Fn(usize) -> f64, budget: &dyn Fn(DeviceId) -> f64| {
        for e in 0..n_tasks {
            for dev in sys.devices() {
                let nodes = on_device.get(&dev.id).map_or(&[][..], Vec::as_slice);
                if worst_case_demand(etg, nodes, demand) <= budget(dev.id) {
                    continue;
                }
                let terms = nodes
                    .iter()
                    .map(|&n| (demand(etg.node(n).task), dm_xe(e, n)))
                    .collect();
                m.add(tag, terms, Sense::Le, budget(dev.id));
            }
        }
    };
    let budget_of = |f: fn(&crate::model::Device) -> f64| move |id: DeviceId| f(sys.device(id).expect("device"));
    if opts.memory {
        resource_rows(&mut m, Tag::Memory, &|i| etg.task(i).memory_bits, &budget_of(|d| d.memory_budget_bits));
    }
    if opts.storage {
        resource_rows(&mut m, Tag::Storage, &|i| etg.task(i).storage_bits, &budget_of(|d| d.storage_budget_bits));
    }

    // Device energy: computation, first-hop transmission at the sender,
    // last-hop reception at the receiver, and both at a relay.
    if opts.energy {
        for dev in sys.devices() {
            if !dev.energy_budget_j.is_finite() {
                continue;
            }
            let mut terms = Vec::new();
            for &n in on_device.get(&dev.id).map_or(&[][..], Vec::as_slice) {
                terms.push((etg.node(n).energy_j, x[n]));
            }
            for (k, a) in etg.arcs().iter().enumerate() {
                let mut coef = 0.0;
                if etg.node(a.from).device == dev.id {
                    coef += a.energy.sender_j;
                }
                if etg.node(a.to).device == dev.id {
                    coef += a.energy.receiver_j;
                }
                if let Some((via, e)) = a.energy.relay {
                    if via == dev.id {
                        coef += e;
                    }
                }
                if coef != 0.0 {
                    terms.push((coef, xa[k]));
                }
            }
            m.add(Tag::Energy, terms, Sense::Le, dev.energy_budget_j);
        }
    }

    m.decode = DecodeMap { x, xa, t, makespan, xo, xe, xh, num_nodes: n_nodes };
    m
}

fn distinct_tasks(etg: &ExtendedTaskGraph, nodes: &[usize]) -> usize {
    let mut tasks: Vec<usize> = nodes.iter().map(|&n| etg.node(n).task).collect();
    tasks.dedup();
    tasks.len()
}

/// Largest total demand the candidates on one device could ever place at
/// once (each task counted once).
fn worst_case_demand(etg: &ExtendedTaskGraph, nodes: &[usize], demand: &dyn Fn(usize) -> f64) -> f64 {
    let mut tasks: Vec<usize> = nodes.iter().map(|&n| etg.node(n).task).collect();
    tasks.dedup();
    tasks.into_iter().map(demand).sum()
}
