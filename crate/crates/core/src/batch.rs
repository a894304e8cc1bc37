//! Batch comparison of the exact MILP schedule with the HEFT heuristic.
//!
//! A manifest lists instances (seeded synthetic workflows, the bundled
//! inspection workflow, or task-graph/system file pairs). Each instance is
//! scheduled with both methods, every schedule is validated, and one CSV row
//! per instance is written, followed by a summary row.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::etg::{build_etg_with, CpAggregate, EtgOptions, ExtendedTaskGraph, DEFAULT_DEADLINE_FACTOR};
use crate::heft::{heft_schedule, HEFT_METHOD};
use crate::milp;
use crate::model::json::{load_system_config, load_task_graph, task_graph_to_json, system_to_json, SCHEMA_VERSION};
use crate::model::{DeviceId, SystemConfig, TaskGraph};
use crate::par;
use crate::solver::{solve_milp, solve_oracle, OracleLimits, SolveStatus, SolverProfile};
use crate::validate::{improvement, total_energy, validate, Schedule};
use crate::workloads::fixtures::{self, ConfigId};
use crate::workloads::generator::{synthetic_instance, GeneratorParams};

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InstanceSource {
    /// Generated workflow under a bundled configuration.
    Synthetic {
        config: ConfigId,
        tasks: usize,
        seed: u64,
        /// Draw only capabilities the configuration features.
        #[serde(default)]
        feasible_caps: bool,
    },
    /// The bundled 16-task inspection workflow.
    RealWorld { config: ConfigId },
    /// Task graph and system files, relative to the manifest.
    Files { tg: PathBuf, system: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(flatten)]
    pub source: InstanceSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    /// Per-solve time limit for the MILP.
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(default = "default_factor")]
    pub deadline_factor: f64,
    #[serde(default)]
    pub cp_aggregate: CpAggregate,
    pub instances: Vec<ManifestEntry>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_time_limit() -> f64 {
    600.0
}

fn default_factor() -> f64 {
    DEFAULT_DEADLINE_FACTOR
}

impl Manifest {
    /// Seed-fixed synthetic batch: one instance per seed.
    pub fn synthetic(name: &str, config: ConfigId, tasks: usize, seeds: impl IntoIterator<Item = u64>) -> Self {
        let instances = seeds
            .into_iter()
            .map(|seed| ManifestEntry {
                id: format!("{}-n{tasks}-s{seed}", config.name().to_lowercase()),
                source: InstanceSource::Synthetic { config, tasks, seed, feasible_caps: true },
            })
            .collect();
        Manifest {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            time_limit_s: default_time_limit(),
            deadline_factor: DEFAULT_DEADLINE_FACTOR,
            cp_aggregate: CpAggregate::Mean,
            instances,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::validation("schema_version", format!("unsupported version {}", m.schema_version)));
        }
        if m.instances.is_empty() {
            return Err(Error::validation("instances", "manifest lists no instances"));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn etg_options(&self) -> EtgOptions {
        EtgOptions { deadline_factor: self.deadline_factor, cp_aggregate: self.cp_aggregate }
    }
}

/// Materializes one manifest entry. `base` resolves relative file paths.
pub fn load_instance(source: &InstanceSource, base: &Path) -> Result<(TaskGraph, SystemConfig)> {
    match source {
        InstanceSource::Synthetic { config, tasks, seed, feasible_caps } => {
            let sys = fixtures::config(*config);
            let mut params = GeneratorParams::new(*tasks, *seed);
            if *feasible_caps {
                params = params.feasible_caps(&sys);
            }
            Ok((synthetic_instance(&params, &sys)?, sys))
        }
        InstanceSource::RealWorld { config } => Ok(fixtures::real_world_fixture(*config)),
        InstanceSource::Files { tg, system } => {
            let tg = load_task_graph(&std::fs::read_to_string(base.join(tg))?)?;
            let sys = load_system_config(&std::fs::read_to_string(base.join(system))?)?;
            Ok((tg, sys))
        }
    }
}

/// SHA-256 over the task graph, the system, the deadline rule and the model
/// constants, so that equal hashes mean identical optimization problems.
pub fn config_hash(tg: &TaskGraph, sys: &SystemConfig, etg: &ExtendedTaskGraph, opts: &EtgOptions) -> String {
    let mut h = Sha256::new();
    h.update(task_graph_to_json(tg).as_bytes());
    h.update(system_to_json(sys).as_bytes());
    let constants = format!(
        "factor={};cp={};deadline={};omega={};epsilon={}",
        opts.deadline_factor,
        opts.cp_aggregate,
        etg.deadline_s(),
        milp::big_m(etg),
        milp::epsilon(etg)
    );
    h.update(constants.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of one scheduling method on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub instance: String,
    pub method: String,
    /// optimal | feasible | infeasible | timeout | invalid | error
    pub status: String,
    pub makespan_s: Option<f64>,
    pub energy_per_device_j: BTreeMap<DeviceId, f64>,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
    pub config_hash: String,
}

/// Solver settings shared by the scheduling methods.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: SolverProfile,
    pub time_limit_s: f64,
    pub oracle_limits: OracleLimits,
}

/// Schedules `etg` with one method (`milp`, `heft` or `oracle`) and
/// validates the result. Schedules failing validation are reported with
/// status `invalid` and no makespan.
pub fn run_method(
    instance: &str,
    method: &str,
    etg: &ExtendedTaskGraph,
    sys: &SystemConfig,
    cfg: &RunConfig,
) -> Result<(RunRecord, Option<Schedule>)> {
    let started = Instant::now();
    let (status, schedule) = match method {
        HEFT_METHOD => match heft_schedule(etg, sys).into_schedule() {
            Some(s) => ("feasible".to_string(), Some(s)),
            None => ("infeasible".to_string(), None),
        },
        "milp" => {
            let out = solve_milp(etg, sys, &cfg.profile, cfg.time_limit_s)?;
            (out.status.to_string(), out.schedule)
        }
        "oracle" => match solve_oracle(etg, sys, &cfg.oracle_limits) {
            Ok(out) => (SolveStatus::Optimal.to_string(), out.schedule),
            Err(Error::InfeasibleInstance) => ("infeasible".to_string(), None),
            Err(e) => return Err(e),
        },
        other => return Err(Error::Domain(format!("unknown method '{other}'"))),
    };
    let wall_time_s = started.elapsed().as_secs_f64();
    let (status, schedule) = match schedule {
        Some(s) if !validate(&s, etg, sys, milp::epsilon(etg)).is_feasible() => ("invalid".to_string(), None),
        s => (status, s),
    };
    let energy = match &schedule {
        Some(s) => total_energy(s, etg, sys)?,
        None => BTreeMap::new(),
    };
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        instance: instance.to_string(),
        method: method.to_string(),
        status,
        makespan_s: schedule.as_ref().map(|s| s.makespan_s),
        energy_per_device_j: energy,
        wall_time_s,
        seed: None,
        config_hash: String::new(),
    };
    Ok((record, schedule))
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub config: String,
    pub tasks: Option<usize>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub arcs: Option<usize>,
    pub milp_status: String,
    pub milp_makespan_s: Option<f64>,
    pub heft_status: String,
    pub heft_makespan_s: Option<f64>,
    /// Mean over compared instances in the summary row.
    pub improvement_pct: Option<f64>,
    /// Only in the summary row.
    pub improvement_median_pct: Option<f64>,
    /// Whether the MILP is better by more than the tolerance; in the summary
    /// row, the number of such instances.
    pub milp_strictly_better: Option<u32>,
    pub milp_time_s: f64,
    pub heft_time_s: f64,
    pub milp_energy_j: Option<f64>,
    pub heft_energy_j: Option<f64>,
    pub config_hash: String,
    pub error: String,
}

/// CSV column names, in order.
pub const CSV_COLUMNS: [&str; 19] = [
    "instance",
    "config",
    "tasks",
    "seed",
    "nodes",
    "arcs",
    "milp_status",
    "milp_makespan_s",
    "heft_status",
    "heft_makespan_s",
    "improvement_pct",
    "improvement_median_pct",
    "milp_strictly_better",
    "milp_time_s",
    "heft_time_s",
    "milp_energy_j",
    "heft_energy_j",
    "config_hash",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub profile: SolverProfile,
    /// Worker threads (0: backend default).
    pub jobs: usize,
    /// Zero the wall-time columns so that reruns are byte-identical.
    pub stable_output: bool,
    /// Overrides the manifest's time limit.
    pub time_limit_s: Option<f64>,
}

fn empty_row(entry: &ManifestEntry) -> BenchRow {
    let (config, tasks, seed) = match &entry.source {
        InstanceSource::Synthetic { config, tasks, seed, .. } => (config.name().to_string(), Some(*tasks), Some(*seed)),
        InstanceSource::RealWorld { config } => (config.name().to_string(), Some(16), None),
        InstanceSource::Files { .. } => (String::new(), None, None),
    };
    BenchRow {
        instance: entry.id.clone(),
        config,
        tasks,
        seed,
        nodes: None,
        arcs: None,
        milp_status: String::new(),
        milp_makespan_s: None,
        heft_status: String::new(),
        heft_makespan_s: None,
        improvement_pct: None,
        improvement_median_pct: None,
        milp_strictly_better: None,
        milp_time_s: 0.0,
        heft_time_s: 0.0,
        milp_energy_j: None,
        heft_energy_j: None,
        config_hash: String::new(),
        error: String::new(),
    }
}

fn run_entry(entry: &ManifestEntry, manifest: &Manifest, base: &Path, opts: &BenchOptions) -> BenchRow {
    let mut row = empty_row(entry);
    if let Err(e) = fill_row(&mut row, entry, manifest, base, opts) {
        row.error = e.to_string();
    }
    row
}

fn fill_row(row: &mut BenchRow, entry: &ManifestEntry, manifest: &Manifest, base: &Path, opts: &BenchOptions) -> Result<()> {
    let (tg, sys) = load_instance(&entry.source, base)?;
    let eopts = manifest.etg_options();
    let etg = build_etg_with(&tg, &sys, &eopts)?;
    row.tasks = Some(etg.num_tasks());
    row.nodes = Some(etg.nodes().len());
    row.arcs = Some(etg.arcs().len());
    row.config_hash = config_hash(&tg, &sys, &etg, &eopts);
    let cfg = RunConfig {
        profile: opts.profile.clone(),
        time_limit_s: opts.time_limit_s.unwrap_or(manifest.time_limit_s),
        oracle_limits: OracleLimits::default(),
    };
    let total = |r: &RunRecord| (!r.energy_per_device_j.is_empty()).then(|| r.energy_per_device_j.values().sum());

    let (heft, _) = run_method(&entry.id, HEFT_METHOD, &etg, &sys, &cfg)?;
    row.heft_status = heft.status.clone();
    row.heft_makespan_s = heft.makespan_s;
    row.heft_time_s = heft.wall_time_s;
    row.heft_energy_j = total(&heft);

    let (milp_rec, _) = run_method(&entry.id, "milp", &etg, &sys, &cfg)?;
    row.milp_status = milp_rec.status.clone();
    row.milp_makespan_s = milp_rec.makespan_s;
    row.milp_time_s = milp_rec.wall_time_s;
    row.milp_energy_j = total(&milp_rec);

    if let (Some(m), Some(h)) = (row.milp_makespan_s, row.heft_makespan_s) {
        row.improvement_pct = Some(improvement(m, h)?);
        row.milp_strictly_better = Some(u32::from(m < h - 10.0 * milp::epsilon(&etg)));
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { (v[k - 1] + v[k]) / 2.0 })
}

/// Summary over rows with both makespans.
pub fn summarize(rows: &[BenchRow]) -> BenchRow {
    let imps: Vec<f64> = rows.iter().filter_map(|r| r.improvement_pct).collect();
    let mean = (!imps.is_empty()).then(|| imps.iter().sum::<f64>() / imps.len() as f64);
    BenchRow {
        instance: "summary".into(),
        config: String::new(),
        tasks: Some(imps.len()),
        seed: None,
        nodes: None,
        arcs: None,
        milp_status: format!("optimal={}", rows.iter().filter(|r| r.milp_status == "optimal").count()),
        milp_makespan_s: None,
        heft_status: format!("feasible={}", rows.iter().filter(|r| r.heft_status == "feasible").count()),
        heft_makespan_s: None,
        improvement_pct: mean,
        improvement_median_pct: median(imps),
        milp_strictly_better: Some(rows.iter().filter_map(|r| r.milp_strictly_better).sum()),
        milp_time_s: rows.iter().map(|r| r.milp_time_s).sum(),
        heft_time_s: rows.iter().map(|r| r.heft_time_s).sum(),
        milp_energy_j: None,
        heft_energy_j: None,
        config_hash: String::new(),
        error: format!("failed={}", rows.iter().filter(|r| !r.error.is_empty()).count()),
    }
}

/// Runs every manifest instance with both methods. Per-instance failures are
/// recorded in the row's `error` column and the batch continues. Rows keep
/// manifest order; the summary row is last.
pub fn run_batch(manifest: &Manifest, base: &Path, opts: &BenchOptions) -> Vec<BenchRow> {
    let mut rows = par::with_threads(opts.jobs, || {
        par::map(&manifest.instances, |entry| run_entry(entry, manifest, base, opts))
    });
    if opts.stable_output {
        for r in &mut rows {
            r.milp_time_s = 0.0;
            r.heft_time_s = 0.0;
        }
    }
    let summary = summarize(&rows);
    rows.push(summary);
    rows
}

/// Writes rows as CSV with the fixed column set.
pub fn write_csv(rows: &[BenchRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<BenchRow>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest::synthetic("t", ConfigId::C6, 10, 0..3);
        m.instances.push(ManifestEntry { id: "rw".into(), source: InstanceSource::RealWorld { config: ConfigId::C2 } });
        m.instances.push(ManifestEntry {
            id: "f".into(),
            source: InstanceSource::Files { tg: "a.json".into(), system: "b.json".into() },
        });
        let back = Manifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.instances[0].id, "c6-n10-s0");
    }

    #[test]
    fn empty_manifest_is_rejected() {
        let text = r#"{"schema_version": 1, "instances": []}"#;
        assert!(matches!(Manifest::from_json(text), Err(Error::Validation { .. })));
    }

    #[test]
    fn header_matches_columns() {
        let mut buf = Vec::new();
        write_csv(&[summarize(&[])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(read_csv(&text).unwrap().len(), 1);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }

    #[test]
    fn hash_depends_on_the_deadline_rule() {
        let (tg, sys) = fixtures::transformation_example();
        let a = EtgOptions::default();
        let b = EtgOptions { deadline_factor: 2.0, ..a };
        let ea = build_etg_with(&tg, &sys, &a).unwrap();
        let eb = build_etg_with(&tg, &sys, &b).unwrap();
        assert_ne!(config_hash(&tg, &sys, &ea, &a), config_hash(&tg, &sys, &eb, &b));
        assert_eq!(config_hash(&tg, &sys, &ea, &a), config_hash(&tg, &sys, &ea, &a));
        assert_eq!(config_hash(&tg, &sys, &ea, &a).len(), 64);
    }
}
