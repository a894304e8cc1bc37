//! Exhaustive in-process solver for small instances.
//!
//! Every allocation (one candidate node per task) is combined with every
//! precedence-feasible activity list; each list is turned into a schedule by
//! the serial schedule-generation scheme, which places tasks one at a time at
//! their earliest start compatible with precedence and transfer latency,
//! core exclusivity, specialized-capability exclusivity and the memory and
//! storage budgets. Allocations over an energy budget are discarded, as are
//! schedules finishing after the deadline. For a regular objective such as
//! the makespan, the schedules generated this way include an optimal one.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use super::{SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::etg::ExtendedTaskGraph;
use crate::model::SystemConfig;
use crate::par;
use crate::validate::{device_energy, Schedule};

/// Backend name recorded in oracle outcomes.
pub const ORACLE_BACKEND: &str = "oracle";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    /// Largest admissible allocations × activity-lists product.
    pub max_states: f64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_states: 1e7 }
    }
}

/// Number of topological orders of the task graph (as a float; exact up to
/// 2^53). Tasks beyond 24 are not counted exactly and yield `n!`.
pub fn count_topological_orders(etg: &ExtendedTaskGraph) -> f64 {
    let n = etg.num_tasks();
    if n > 24 {
        return (1..=n).map(|k| k as f64).product();
    }
    let parents: Vec<u32> = (0..n).map(|i| etg.parents(i).iter().fold(0u32, |m, &p| m | 1 << p)).collect();
    let mut ways = vec![0f64; 1 << n];
    ways[0] = 1.0;
    for set in 0..(1usize << n) {
        if ways[set] == 0.0 {
            continue;
        }
        for (i, &p) in parents.iter().enumerate() {
            if set & (1 << i) == 0 && (p as usize) & !set == 0 {
                ways[set | 1 << i] += ways[set];
            }
        }
    }
    ways[(1 << n) - 1]
}

/// Size of the oracle's search space: allocations × activity lists.
pub fn search_space(etg: &ExtendedTaskGraph) -> f64 {
    let allocations: f64 = (0..etg.num_tasks()).map(|t| etg.candidates(t).len() as f64).product();
    allocations * count_topological_orders(etg)
}

/// Per-allocation data for the serial scheme.
struct Alloc<'a> {
    etg: &'a ExtendedTaskGraph,
    nodes: Vec<usize>,
    dev: Vec<usize>,
    /// Latency of the incoming transfer per (parent, child) group.
    lag: Vec<Vec<(usize, f64)>>,
    /// Longest remaining path from a task's start to the end of the workflow.
    tail: Vec<f64>,
}

struct Shared<'a> {
    mem_budget: Vec<f64>,
    sto_budget: Vec<f64>,
    deadline: f64,
    best: &'a AtomicU64,
}

const CMP_TOL: f64 = 1e-12;

/// Right-open intervals [a, a+la) and [b, b+lb) intersect.
fn overlaps(a: f64, ea: f64, b: f64, eb: f64) -> bool {
    a < eb && b < ea
}

struct Search<'a, 'b> {
    alloc: &'a Alloc<'b>,
    shared: &'a Shared<'b>,
    start: Vec<f64>,
    finish: Vec<f64>,
    placed: Vec<usize>,
    is_placed: Vec<bool>,
    best: f64,
    best_starts: Option<Vec<f64>>,
}

impl Search<'_, '_> {
    fn feasible_at(&self, i: usize, s: f64) -> bool {
        let a = self.alloc;
        let etg = a.etg;
        let ni = etg.node(a.nodes[i]);
        let e = s + ni.exec_time_s;
        let cap = etg.task(i).capability;
        for &j in &self.placed {
            if a.dev[j] != a.dev[i] || !overlaps(s, e, self.start[j], self.finish[j]) {
                continue;
            }
            let nj = etg.node(a.nodes[j]);
            if nj.core == ni.core {
                return false;
            }
            if cap.is_specialized() && etg.task(j).capability == cap {
                return false;
            }
        }
        // Usage only grows at starts, so checking the starts inside the
        // new interval suffices.
        let d = a.dev[i];
        let events = std::iter::once(s).chain(
            self.placed.iter().filter(|&&j| a.dev[j] == d && s < self.start[j] && self.start[j] < e).map(|&j| self.start[j]),
        );
        for tau in events {
            let (mut mem, mut sto) = (etg.task(i).memory_bits, etg.task(i).storage_bits);
            for &j in &self.placed {
                if a.dev[j] == d && self.start[j] <= tau && tau < self.finish[j] {
                    mem += etg.task(j).memory_bits;
                    sto += etg.task(j).storage_bits;
                }
            }
            if mem > self.shared.mem_budget[d] || sto > self.shared.sto_budget[d] {
                return false;
            }
        }
        true
    }

    fn earliest_start(&self, i: usize) -> f64 {
        let ready = self.alloc.lag[i].iter().map(|&(p, l)| self.finish[p] + l).fold(0.0, f64::max);
        if self.feasible_at(i, ready) {
            return ready;
        }
        let mut cands: Vec<f64> = self.placed.iter().map(|&j| self.finish[j]).filter(|&f| f > ready).collect();
        cands.sort_by(f64::total_cmp);
        cands
            .into_iter()
            .find(|&s| self.feasible_at(i, s))
            .expect("a start after every placed task is always feasible")
    }

    fn global_best(&self) -> f64 {
        f64::from_bits(self.shared.best.load(Ordering::Relaxed))
    }

    fn dfs(&mut self, bound: f64) {
        let etg = self.alloc.etg;
        let n = etg.num_tasks();
        if self.placed.len() == n {
            let makespan = self.finish.iter().copied().fold(0.0, f64::max);
            if makespan < self.best {
                self.best = makespan;
                self.best_starts = Some(self.start.clone());
                self.shared.best.fetch_min(makespan.to_bits(), Ordering::Relaxed);
            }
            return;
        }
        for i in 0..n {
            if self.is_placed[i] || !etg.parents(i).iter().all(|&p| self.is_placed[p]) {
                continue;
            }
            let s = self.earliest_start(i);
            let f = s + etg.node(self.alloc.nodes[i]).exec_time_s;
            let b = bound.max(s + self.alloc.tail[i]);
            let limit = self.global_best() * (1.0 + CMP_TOL);
            if b >= self.best || b > limit || f > self.shared.deadline {
                continue;
            }
            self.start[i] = s;
            self.finish[i] = f;
            self.is_placed[i] = true;
            self.placed.push(i);
            self.dfs(b);
            self.placed.pop();
            self.is_placed[i] = false;
        }
    }
}

fn decode_allocation(etg: &ExtendedTaskGraph, mut index: usize) -> Vec<usize> {
    (0..etg.num_tasks())
        .map(|t| {
            let r = etg.task(t).nodes.clone();
            let k = index % r.len();
            index /= r.len();
            r.start + k
        })
        .collect()
}

fn prepare<'a>(etg: &'a ExtendedTaskGraph, sys: &SystemConfig, nodes: Vec<usize>) -> Alloc<'a> {
    let n = etg.num_tasks();
    let dev = nodes.iter().map(|&k| sys.device_index(etg.node(k).device).expect("device")).collect();
    let mut lag = vec![Vec::new(); n];
    let mut out_lag = vec![Vec::new(); n];
    for g in etg.groups() {
        let a = etg.arc(etg.arc_between(nodes[g.parent], nodes[g.child]).expect("complete arc group"));
        lag[g.child].push((g.parent, a.comm_latency_s));
        out_lag[g.parent].push((g.child, a.comm_latency_s));
    }
    let mut tail = vec![0.0; n];
    for &i in etg.topological_order().iter().rev() {
        let after = out_lag[i].iter().map(|&(c, l)| l + tail[c]).fold(0.0, f64::max);
        tail[i] = etg.node(nodes[i]).exec_time_s + after;
    }
    Alloc { etg, nodes, dev, lag, tail }
}

/// Best makespan and start times for one allocation, if any schedule meets
/// the energy budgets and the deadline.
fn solve_allocation(alloc: &Alloc<'_>, sys: &SystemConfig, shared: &Shared<'_>) -> Option<(f64, Vec<f64>)> {
    let energy = device_energy(&alloc.nodes, alloc.etg, sys);
    if sys.devices().iter().any(|d| energy[&d.id] > d.energy_budget_j + 1e-9) {
        return None;
    }
    let lb = (0..alloc.etg.num_tasks()).filter(|&i| alloc.etg.parents(i).is_empty()).map(|i| alloc.tail[i]).fold(0.0, f64::max);
    if lb > shared.deadline || lb > f64::from_bits(shared.best.load(Ordering::Relaxed)) * (1.0 + CMP_TOL) {
        return None;
    }
    let n = alloc.etg.num_tasks();
    let mut search = Search {
        alloc,
        shared,
        start: vec![0.0; n],
        finish: vec![0.0; n],
        placed: Vec::with_capacity(n),
        is_placed: vec![false; n],
        best: f64::INFINITY,
        best_starts: None,
    };
    search.dfs(lb);
    search.best_starts.map(|s| (search.best, s))
}

type Best = Option<(f64, usize, Vec<f64>)>;

fn better(a: Best, b: Best) -> Best {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if (b.0, b.1) < (a.0, a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Exact minimum makespan by exhaustive enumeration. Ties between
/// allocations are broken by enumeration index, so the returned schedule is
/// the same whatever the thread count.
pub fn solve_oracle(etg: &ExtendedTaskGraph, sys: &SystemConfig, limits: &OracleLimits) -> Result<SolveOutcome> {
    let states = search_space(etg);
    if states > limits.max_states || etg.num_tasks() > 24 {
        return Err(Error::StateLimitExceeded { states, limit: limits.max_states });
    }
    let started = Instant::now();
    let allocations: usize = (0..etg.num_tasks()).map(|t| etg.candidates(t).len()).product();
    let best = AtomicU64::new(f64::INFINITY.to_bits());
    let shared = Shared {
        mem_budget: sys.devices().iter().map(|d| d.memory_budget_bits).collect(),
        sto_budget: sys.devices().iter().map(|d| d.storage_budget_bits).collect(),
        deadline: etg.deadline_s() * (1.0 + CMP_TOL),
        best: &best,
    };
    let found = par::reduce_range(
        allocations,
        None,
        |k| {
            let alloc = prepare(etg, sys, decode_allocation(etg, k));
            solve_allocation(&alloc, sys, &shared).map(|(m, s)| (m, k, s))
        },
        better,
    );
    let (makespan, k, starts) = found.ok_or(Error::InfeasibleInstance)?;
    let nodes = decode_allocation(etg, k);
    let schedule = Schedule::from_nodes(etg, &nodes, &starts, ORACLE_BACKEND);
    let mut outcome = SolveOutcome::empty(SolveStatus::Optimal, started.elapsed().as_secs_f64(), ORACLE_BACKEND.into());
    outcome.objective = makespan;
    outcome.assignment = super::decision_values(etg, &nodes, &starts, makespan);
    outcome.schedule = Some(schedule);
    Ok(outcome)
}
