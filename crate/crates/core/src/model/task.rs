use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use super::ids::{Capability, DeviceId, TaskId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub capability: Capability,
    pub output_data_bits: f64,
    pub memory_bits: f64,
    pub storage_bits: f64,
}

/// Execution time and power draw of a task on one device's reserved cores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecProfile {
    pub exec_time_s: f64,
    pub power_w: f64,
}

/// Validated workflow DAG.
///
/// Tasks are stored sorted by id; internal algorithms address them by their
/// dense position (`0..len()`), which is what `parents`/`children` return.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    arcs: Vec<(TaskId, TaskId)>,
    deadline_s: Option<f64>,
    profiles: BTreeMap<(TaskId, DeviceId), ExecProfile>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl TaskGraph {
    pub fn new(
        mut tasks: Vec<Task>,
        arcs: Vec<(TaskId, TaskId)>,
        deadline_s: Option<f64>,
        profiles: BTreeMap<(TaskId, DeviceId), ExecProfile>,
    ) -> Result<Self> {
        for (k, t) in tasks.iter().enumerate() {
            for (field, v) in [
                ("data", t.output_data_bits),
                ("memory", t.memory_bits),
                ("storage", t.storage_bits),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation(
                        format!("tasks[{k}].{field}"),
                        format!("must be a finite non-negative quantity, got {v}"),
                    ));
                }
            }
        }
        tasks.sort_by_key(|t| t.id);
        if let Some(w) = tasks.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::validation("tasks", format!("duplicate task id {}", w[0].id)));
        }
        if let Some(d) = deadline_s {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::validation("deadline_ms", format!("must be positive, got {d}")));
            }
        }

        let index: HashMap<TaskId, usize> = tasks.iter().enumerate().map(|(k, t)| (t.id, k)).collect();
        let mut seen = BTreeSet::new();
        let mut parents = vec![Vec::new(); tasks.len()];
        let mut children = vec![Vec::new(); tasks.len()];
        for (k, &(p, c)) in arcs.iter().enumerate() {
            let path = format!("arcs[{k}]");
            if p == c {
                return Err(Error::validation(path, format!("self-arc on task {p}")));
            }
            let (Some(&pi), Some(&ci)) = (index.get(&p), index.get(&c)) else {
                let missing = if index.contains_key(&p) { c } else { p };
                return Err(Error::validation(path, format!("references unknown task {missing}")));
            };
            if !seen.insert((p, c)) {
                return Err(Error::validation(path, format!("duplicate arc {p} -> {c}")));
            }
            parents[ci].push(pi);
            children[pi].push(ci);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }

        let ids: Vec<TaskId> = tasks.iter().map(|t| t.id).collect();
        let sorted_arcs: Vec<(TaskId, TaskId)> = seen.into_iter().collect();
        let order = validate_dag(&ids, &sorted_arcs).map_err(|e| match e {
            Error::Cycle { cycle } => Error::validation(
                "arcs",
                format!("cycle {}", cycle.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> ")),
            ),
            other => other,
        })?;
        let topo = order.iter().map(|id| index[id]).collect();

        for (&(task, device), p) in &profiles {
            let path = format!("profiles[{task},{device}]");
            if !index.contains_key(&task) {
                return Err(Error::validation(path, format!("references unknown task {task}")));
            }
            if !(p.exec_time_s.is_finite() && p.exec_time_s >= 0.0) {
                return Err(Error::validation(path, "execution time must be finite and non-negative"));
            }
            if !(p.power_w.is_finite() && p.power_w >= 0.0) {
                return Err(Error::validation(path, "power must be finite and non-negative"));
            }
        }

        Ok(TaskGraph { tasks, arcs: sorted_arcs, deadline_s, profiles, parents, children, topo })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &Task {
        &self.tasks[idx]
    }

    pub fn index_of(&self, id: TaskId) -> Option<usize> {
        self.tasks.binary_search_by_key(&id, |t| t.id).ok()
    }

    /// Arcs as `(parent, child)` id pairs in ascending order.
    pub fn arcs(&self) -> &[(TaskId, TaskId)] {
        &self.arcs
    }

    pub fn parents(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Topological order (dense indices), ties broken by ascending task id.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn deadline_s(&self) -> Option<f64> {
        self.deadline_s
    }

    pub fn with_deadline(mut self, deadline_s: Option<f64>) -> Self {
        self.deadline_s = deadline_s;
        self
    }

    pub fn profiles(&self) -> &BTreeMap<(TaskId, DeviceId), ExecProfile> {
        &self.profiles
    }

    pub fn profile(&self, task: TaskId, device: DeviceId) -> Option<ExecProfile> {
        self.profiles.get(&(task, device)).copied()
    }

    pub fn with_profiles(mut self, profiles: BTreeMap<(TaskId, DeviceId), ExecProfile>) -> Self {
        self.profiles = profiles;
        self
    }

    pub fn is_entry(&self, idx: usize) -> bool {
        self.parents[idx].is_empty()
    }

    pub fn is_exit(&self, idx: usize) -> bool {
        self.children[idx].is_empty()
    }
}

/// Topological order of `tasks` under `arcs`, ties broken by ascending id.
///
/// Fails with [`Error::Cycle`] naming one directed cycle when the arc relation
/// is cyclic.
pub fn validate_dag(tasks: &[TaskId], arcs: &[(TaskId, TaskId)]) -> Result<Vec<TaskId>> {
    let mut succ: BTreeMap<TaskId, Vec<TaskId>> = tasks.iter().map(|&t| (t, Vec::new())).collect();
    let mut indeg: BTreeMap<TaskId, usize> = tasks.iter().map(|&t| (t, 0)).collect();
    for &(p, c) in arcs {
        succ.entry(p).or_default().push(c);
        succ.entry(c).or_default();
        *indeg.entry(c).or_default() += 1;
        indeg.entry(p).or_default();
    }

    let mut ready: BinaryHeap<Reverse<TaskId>> =
        indeg.iter().filter(|(_, &d)| d == 0).map(|(&t, _)| Reverse(t)).collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(Reverse(t)) = ready.pop() {
        order.push(t);
        for &c in &succ[&t] {
            let d = indeg.get_mut(&c).expect("successor registered");
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == indeg.len() {
        return Ok(order);
    }

    // Every leftover node has a leftover predecessor, so walking predecessors
    // from any of them must revisit a node.
    let mut pred: BTreeMap<TaskId, TaskId> = BTreeMap::new();
    for &(p, c) in arcs {
        if indeg[&p] > 0 && indeg[&c] > 0 {
            pred.entry(c).or_insert(p);
        }
    }
    let start = *indeg.iter().find(|(_, &d)| d > 0).expect("leftover node").0;
    let mut walk = vec![start];
    let mut pos: HashMap<TaskId, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        cur = pred[&cur];
        if let Some(&k) = pos.get(&cur) {
            let mut cycle: Vec<TaskId> = walk[k..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(Error::Cycle { cycle });
        }
        pos.insert(cur, walk.len());
        walk.push(cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    fn arcs(v: &[(u32, u32)]) -> Vec<(TaskId, TaskId)> {
        v.iter().map(|&(a, b)| (TaskId(a), TaskId(b))).collect()
    }

    #[test]
    fn transformation_example_orders_by_id() {
        let order = validate_dag(&ids(&[1, 2, 3, 4]), &arcs(&[(1, 3), (2, 3), (3, 4)])).unwrap();
        assert_eq!(order, ids(&[1, 2, 3, 4]));
    }

    #[test]
    fn empty_graph_has_empty_order() {
        assert!(validate_dag(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn diamond_breaks_ties_by_id() {
        let order = validate_dag(&ids(&[4, 3, 2, 1]), &arcs(&[(1, 2), (1, 3), (2, 4), (3, 4)])).unwrap();
        assert_eq!(order, ids(&[1, 2, 3, 4]));
    }

    #[test]
    fn two_cycle_is_reported() {
        let err = validate_dag(&ids(&[1, 2]), &arcs(&[(1, 2), (2, 1)])).unwrap_err();
        let Error::Cycle { cycle } = err else { panic!("expected cycle, got {err:?}") };
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 3);
    }

    #[test]
    fn reported_cycle_follows_arcs() {
        let a = arcs(&[(1, 2), (2, 3), (3, 4), (4, 2), (4, 5)]);
        let Error::Cycle { cycle } = validate_dag(&ids(&[1, 2, 3, 4, 5]), &a).unwrap_err() else {
            panic!("expected cycle")
        };
        for w in cycle.windows(2) {
            assert!(a.contains(&(w[0], w[1])), "{:?} is not an arc", w);
        }
    }
}
