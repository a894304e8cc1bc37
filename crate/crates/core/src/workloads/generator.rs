//! Random workflow generation: layered DAGs with a target average degree,
//! random capability requirements and parameters drawn from the measured
//! ranges of the real-world workflow.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Capability, ExecProfile, SystemConfig, Task, TaskGraph, TaskId, Tier};
use crate::units;

/// Closed range `[lo, hi]`.
pub type Range = (f64, f64);

/// Parameter ranges of the real-world workflow (table units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub data_mbit: Range,
    pub memory_mbit: Range,
    pub storage_mbit: Range,
    pub exec_time_ms: Range,
    pub power_w: Range,
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            data_mbit: (3.22, 151.27),
            memory_mbit: (103.98, 3800.17),
            storage_mbit: (246.57, 3766.42),
            exec_time_ms: (2.57, 12648.38),
            power_w: (0.30, 23.70),
        }
    }
}

impl ParamRanges {
    /// Power sub-range of a device class: edge, hub and cloud devices draw
    /// from the low, middle and high third of the power range respectively.
    pub fn power_for(&self, tier: Tier) -> Range {
        let (lo, hi) = self.power_w;
        let third = (hi - lo) / 3.0;
        let k = match tier {
            Tier::Edge => 0.0,
            Tier::Hub => 1.0,
            Tier::Cloud => 2.0,
        };
        (round2(lo + k * third), round2(lo + (k + 1.0) * third))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub num_tasks: usize,
    /// Target average in/out degree; the generated graph has exactly
    /// `round(avg_degree * num_tasks)` arcs.
    pub avg_degree: f64,
    pub cap_prob_entry_exit: f64,
    pub cap_prob_intermediate: f64,
    /// Specialized capabilities to draw from.
    pub capability_pool: Vec<Capability>,
    pub ranges: ParamRanges,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(num_tasks: usize, seed: u64) -> Self {
        GeneratorParams {
            num_tasks,
            avg_degree: 1.7,
            cap_prob_entry_exit: 0.8,
            cap_prob_intermediate: 0.2,
            capability_pool: (1..=9).map(Capability).collect(),
            ranges: ParamRanges::default(),
            seed,
        }
    }

    /// Restricts capability draws to the specialized capabilities that some
    /// device of `sys` features.
    pub fn feasible_caps(mut self, sys: &SystemConfig) -> Self {
        let featured = super::builder::featured_capabilities(sys);
        self.capability_pool.retain(|c| featured.contains(c));
        self
    }

    fn check(&self) -> Result<()> {
        for (name, p) in [("cap_prob_entry_exit", self.cap_prob_entry_exit), ("cap_prob_intermediate", self.cap_prob_intermediate)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(name, format!("probability must lie in [0, 1], got {p}")));
            }
        }
        if !(self.avg_degree.is_finite() && self.avg_degree > 0.0) {
            return Err(Error::validation("avg_degree", "must be positive"));
        }
        if self.num_tasks == 0 {
            return Err(Error::validation("num_tasks", "must be at least 1"));
        }
        if self.capability_pool.iter().any(|c| !c.is_specialized()) {
            return Err(Error::validation("capability_pool", "may only contain specialized capabilities"));
        }
        Ok(())
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn uniform2(rng: &mut impl Rng, (lo, hi): Range) -> f64 {
    round2(rng.gen_range(lo..=hi)).clamp(lo, hi)
}

/// Number of arcs a generated graph of `n` tasks has for a degree target.
pub fn arc_count(n: usize, avg_degree: f64) -> usize {
    (avg_degree * n as f64).round() as usize
}

/// Layered random DAG with exactly `arc_count` arcs. Task ids follow level
/// order, so every arc goes from a smaller to a larger id. Every task outside
/// the first level gets a parent in the level directly above it (as long as
/// the arc budget allows); the remaining arcs are drawn uniformly among all
/// forward pairs across levels.
pub fn generate_tg(params: &GeneratorParams) -> Result<TaskGraph> {
    params.check()?;
    let n = params.num_tasks;
    let m = arc_count(n, params.avg_degree);
    if m > n * (n - 1) / 2 {
        return Err(Error::DegreeUnreachable { target: params.avg_degree, tasks: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // More levels admit more forward pairs; start near sqrt(n) levels and add
    // levels until the arc budget fits (n levels always fit, checked above).
    let mut levels = ((n as f64).sqrt().ceil() as usize + 1).min(n).max(1);
    let widths = loop {
        let widths = split_levels(&mut rng, n, levels);
        let pairs: usize = {
            let total: usize = widths.iter().sum();
            let within: usize = widths.iter().map(|w| w * (w - 1) / 2).sum();
            total * (total - 1) / 2 - within
        };
        if pairs >= m {
            break widths;
        }
        levels += 1;
    };

    let mut level_of = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(widths.len());
    for (l, &w) in widths.iter().enumerate() {
        starts.push(level_of.len());
        level_of.extend(std::iter::repeat_n(l, w));
    }

    let mut arcs = std::collections::BTreeSet::new();
    for (v, &l) in level_of.iter().enumerate().skip(widths[0]) {
        if arcs.len() == m {
            break;
        }
        let parent = starts[l - 1] + rng.gen_range(0..widths[l - 1]);
        arcs.insert((parent, v));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .filter(|&(a, b)| level_of[a] < level_of[b] && !arcs.contains(&(a, b)))
        .collect();
    rest.shuffle(&mut rng);
    arcs.extend(rest.into_iter().take(m - arcs.len()));

    let mut has_parent = vec![false; n];
    let mut has_child = vec![false; n];
    for &(a, b) in &arcs {
        has_child[a] = true;
        has_parent[b] = true;
    }
    let tasks = (0..n)
        .map(|v| {
            let terminal = !has_parent[v] || !has_child[v];
            let p = if terminal { params.cap_prob_entry_exit } else { params.cap_prob_intermediate };
            let capability = if !params.capability_pool.is_empty() && rng.gen_bool(p) {
                *params.capability_pool.choose(&mut rng).expect("non-empty pool")
            } else {
                Capability::BASIC
            };
            Task {
                id: TaskId(v as u32 + 1),
                capability,
                output_data_bits: units::mbit_to_bits(uniform2(&mut rng, params.ranges.data_mbit)),
                memory_bits: units::mbit_to_bits(uniform2(&mut rng, params.ranges.memory_mbit)),
                storage_bits: units::mbit_to_bits(uniform2(&mut rng, params.ranges.storage_mbit)),
            }
        })
        .collect();
    let arcs = arcs.into_iter().map(|(a, b)| (TaskId(a as u32 + 1), TaskId(b as u32 + 1))).collect();
    TaskGraph::new(tasks, arcs, None, BTreeMap::new())
}

fn split_levels(rng: &mut impl Rng, n: usize, levels: usize) -> Vec<usize> {
    let mut widths = vec![1usize; levels];
    for _ in levels..n {
        widths[rng.gen_range(0..levels)] += 1;
    }
    widths
}

/// Attaches execution profiles for every device of `sys`.
///
/// Each task draws a reference execution time (on a device of performance
/// ratio 1); a device with ratio `r` runs it in `L_ref / r`. Power is drawn
/// independently per (task, device) from the device class's sub-range.
pub fn derive_candidate_params(tg: TaskGraph, sys: &SystemConfig, seed: u64, ranges: &ParamRanges) -> TaskGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = BTreeMap::new();
    for t in tg.tasks() {
        let l_ref_ms = uniform2(&mut rng, ranges.exec_time_ms);
        for d in sys.devices() {
            let power_w = uniform2(&mut rng, ranges.power_for(d.id.tier));
            profiles.insert((t.id, d.id), profile_for(l_ref_ms, d.perf_ratio, power_w));
        }
    }
    tg.with_profiles(profiles)
}

/// Execution profile of a task with reference time `l_ref_ms` on a device of
/// the given performance ratio.
pub fn profile_for(l_ref_ms: f64, perf_ratio: f64, power_w: f64) -> ExecProfile {
    ExecProfile { exec_time_s: units::ms_to_s(units::canonical(l_ref_ms / perf_ratio)), power_w }
}

/// A synthetic instance: generated graph with profiles for `sys`.
pub fn synthetic_instance(params: &GeneratorParams, sys: &SystemConfig) -> Result<TaskGraph> {
    let tg = generate_tg(params)?;
    Ok(derive_candidate_params(tg, sys, params.seed ^ 0x9e37_79b9_7f4a_7c15, &params.ranges))
}

/// Mean in-degree (equal to mean out-degree) of a graph.
pub fn average_degree(tg: &TaskGraph) -> f64 {
    tg.arcs().len() as f64 / tg.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::task_graph_to_json;

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorParams::new(10, 42);
        assert_eq!(task_graph_to_json(&generate_tg(&p).unwrap()), task_graph_to_json(&generate_tg(&p).unwrap()));
        let q = GeneratorParams::new(10, 43);
        assert_ne!(task_graph_to_json(&generate_tg(&p).unwrap()), task_graph_to_json(&generate_tg(&q).unwrap()));
    }

    #[test]
    fn arc_count_hits_the_degree_target() {
        for n in [5, 10, 20, 30, 40, 50] {
            for seed in 0..20 {
                let tg = generate_tg(&GeneratorParams::new(n, seed)).unwrap();
                assert_eq!(tg.arcs().len(), arc_count(n, 1.7));
                assert!((average_degree(&tg) - 1.7).abs() <= 0.2);
            }
        }
    }

    #[test]
    fn zero_probabilities_give_basic_tasks_only() {
        let mut p = GeneratorParams::new(30, 7);
        p.cap_prob_entry_exit = 0.0;
        p.cap_prob_intermediate = 0.0;
        let tg = generate_tg(&p).unwrap();
        assert!(tg.tasks().iter().all(|t| t.capability == Capability::BASIC));
    }

    #[test]
    fn impossible_degree_is_reported() {
        assert!(matches!(generate_tg(&GeneratorParams::new(3, 0)), Err(Error::DegreeUnreachable { .. })));
        let mut p = GeneratorParams::new(10, 0);
        p.avg_degree = 5.0;
        assert!(matches!(generate_tg(&p), Err(Error::DegreeUnreachable { .. })));
    }

    #[test]
    fn draws_stay_in_range() {
        let r = ParamRanges::default();
        for seed in 0..20 {
            let tg = generate_tg(&GeneratorParams::new(20, seed)).unwrap();
            for t in tg.tasks() {
                let d = units::bits_to_mbit(t.output_data_bits);
                let m = units::bits_to_mbit(t.memory_bits);
                let s = units::bits_to_mbit(t.storage_bits);
                assert!(r.data_mbit.0 <= d && d <= r.data_mbit.1);
                assert!(r.memory_mbit.0 <= m && m <= r.memory_mbit.1);
                assert!(r.storage_mbit.0 <= s && s <= r.storage_mbit.1);
            }
        }
    }

    #[test]
    fn execution_time_scales_with_performance_ratio() {
        assert_eq!(profile_for(1000.0, 1.0, 1.0).exec_time_s, 1.0);
        let p = profile_for(1000.0, 21.70, 1.0);
        assert!((units::s_to_ms(p.exec_time_s) - 46.08).abs() < 0.005);
    }

    #[test]
    fn power_classes_partition_the_range() {
        let r = ParamRanges::default();
        assert_eq!(r.power_for(Tier::Edge), (0.30, 8.10));
        assert_eq!(r.power_for(Tier::Hub), (8.10, 15.90));
        assert_eq!(r.power_for(Tier::Cloud), (15.90, 23.70));
    }
}
