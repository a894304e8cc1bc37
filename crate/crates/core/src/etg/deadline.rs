use std::fmt;
use std::str::FromStr;

use super::ExtendedTaskGraph;

pub const DEFAULT_DEADLINE_FACTOR: f64 = 1.5;

/// How heterogeneous candidates collapse to one weight per task/arc when
/// measuring the critical path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpAggregate {
    Min,
    #[default]
    Mean,
    Max,
}

impl CpAggregate {
    fn apply(self, values: impl Iterator<Item = f64>) -> f64 {
        let (mut n, mut sum, mut lo, mut hi) = (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if n == 0 {
            return 0.0;
        }
        match self {
            CpAggregate::Min => lo,
            CpAggregate::Mean => sum / n as f64,
            CpAggregate::Max => hi,
        }
    }
}

impl fmt::Display for CpAggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpAggregate::Min => "min",
            CpAggregate::Mean => "mean",
            CpAggregate::Max => "max",
        })
    }
}

impl FromStr for CpAggregate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(CpAggregate::Min),
            "mean" => Ok(CpAggregate::Mean),
            "max" => Ok(CpAggregate::Max),
            other => Err(format!("unknown aggregate {other:?}, expected min|mean|max")),
        }
    }
}

/// Longest path through the task graph where each task weighs the aggregate
/// of its candidates' execution times and each arc the aggregate of its
/// candidate arcs' latencies.
pub fn critical_path(etg: &ExtendedTaskGraph, agg: CpAggregate) -> f64 {
    let n = etg.num_tasks();
    let exec: Vec<f64> = (0..n).map(|t| agg.apply(etg.candidates(t).iter().map(|c| c.exec_time_s))).collect();
    let mut comm = vec![Vec::new(); n];
    for g in etg.groups() {
        let w = agg.apply(etg.arcs()[g.arcs.clone()].iter().map(|a| a.comm_latency_s));
        comm[g.parent].push((g.child, w));
    }
    let mut finish = vec![0.0f64; n];
    let mut ready = vec![0.0f64; n];
    for &t in etg.topological_order() {
        finish[t] = ready[t] + exec[t];
        for &(c, w) in &comm[t] {
            ready[c] = ready[c].max(finish[t] + w);
        }
    }
    finish.into_iter().fold(0.0, f64::max)
}

/// Deadline as `factor` times the critical path.
pub fn compute_deadline(etg: &ExtendedTaskGraph, factor: f64, agg: CpAggregate) -> f64 {
    factor * critical_path(etg, agg)
}
