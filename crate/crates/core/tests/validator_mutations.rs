//! Mutates feasible schedules in ways that must break exactly one kind of
//! constraint and checks the validator reports it.

use etgsched::etg::{build_etg, ExtendedTaskGraph};
use etgsched::heft::heft_schedule;
use etgsched::milp::epsilon;
use etgsched::model::json::{task_graph_from_file, task_graph_to_file};
use etgsched::model::{SystemConfig, TaskGraph};
use etgsched::solver::{solve_oracle, OracleLimits};
use etgsched::validate::{validate, Family, Schedule};
use etgsched::workloads::{random_small_instance, SmallParams};

struct Case {
    tg: TaskGraph,
    sys: SystemConfig,
    etg: ExtendedTaskGraph,
    schedule: Schedule,
}

fn cases(count: usize) -> Vec<Case> {
    let params = SmallParams { cores: (1, 3), ..SmallParams::default() };
    let limits = OracleLimits { max_states: 2e5 };
    let mut out = Vec::new();
    for seed in 0..2000u64 {
        if out.len() >= count {
            break;
        }
        let Ok((tg, sys)) = random_small_instance(seed, &params) else { continue };
        let Ok(etg) = build_etg(&tg, &sys) else { continue };
        // Alternate between heuristic and exact schedules.
        let schedule = if seed % 2 == 0 {
            heft_schedule(&etg, &sys).into_schedule()
        } else {
            solve_oracle(&etg, &sys, &limits).ok().and_then(|o| o.schedule)
        };
        if let Some(schedule) = schedule {
            out.push(Case { tg, sys, etg, schedule });
        }
    }
    out
}

/// Families that must be violated once task `t` starts at `s`, worked out
/// directly from the instance at that single instant. Empty when the task
/// had slack (e.g. a conservative heuristic delay).
fn expected_families(c: &Case, t: usize, s: f64) -> Vec<Family> {
    let resolved = c.schedule.resolve(&c.etg).unwrap();
    let (node, _) = resolved[t];
    let mut out = Vec::new();
    if s < 0.0 {
        out.push(Family::StartBound);
    }
    for &p in c.etg.parents(t) {
        let (pn, ps) = resolved[p];
        let cl = c.etg.arc_between(pn, node).map_or(0.0, |a| c.etg.arc(a).comm_latency_s);
        if ps + c.etg.node(pn).exec_time_s + cl > s + 1e-9 {
            out.push(Family::Precedence);
        }
    }
    let me = c.etg.node(node);
    let dev = c.sys.device(me.device).unwrap();
    let active: Vec<usize> = (0..c.etg.num_tasks())
        .filter(|&u| {
            let (un, us) = resolved[u];
            u != t && c.etg.node(un).device == me.device && us <= s && s < us + c.etg.node(un).exec_time_s
        })
        .collect();
    if active.iter().any(|&u| c.etg.node(resolved[u].0).core == me.core) {
        out.push(Family::Nonoverlap);
    }
    let cap = c.etg.task(t).capability;
    if cap.is_specialized() && active.iter().any(|&u| c.etg.task(u).capability == cap) {
        out.push(Family::Capability);
    }
    let mem: f64 = active.iter().map(|&u| c.etg.task(u).memory_bits).sum::<f64>() + c.etg.task(t).memory_bits;
    if mem > dev.memory_budget_bits + 1.0 {
        out.push(Family::Memory);
    }
    let sto: f64 = active.iter().map(|&u| c.etg.task(u).storage_bits).sum::<f64>() + c.etg.task(t).storage_bits;
    if sto > dev.storage_budget_bits + 1.0 {
        out.push(Family::Storage);
    }
    out
}

#[test]
fn unmutated_schedules_are_clean() {
    for c in cases(60) {
        let r = validate(&c.schedule, &c.etg, &c.sys, epsilon(&c.etg));
        assert!(r.is_feasible(), "{:?}", r.violations);
    }
}

#[test]
fn mutation_suite_has_no_false_negatives() {
    let mut mutations = [0usize; 3];
    for c in cases(80) {
        let eps = epsilon(&c.etg);

        // Shift every start earlier by 10ε, one task at a time.
        for t in 0..c.etg.num_tasks() {
            let mut s = c.schedule.clone();
            s.placements[t].start_s -= 10.0 * eps;
            let expected = expected_families(&c, t, s.placements[t].start_s);
            if expected.is_empty() {
                continue;
            }
            let r = validate(&s, &c.etg, &c.sys, eps);
            assert!(
                expected.iter().any(|&f| r.has(f)),
                "task {t}: expected one of {expected:?}, got {:?}",
                r.violations
            );
            mutations[0] += 1;
        }

        // Move a task onto the core of a task it overlaps on the same device.
        let resolved = c.schedule.resolve(&c.etg).unwrap();
        let end = |t: usize| resolved[t].1 + c.etg.node(resolved[t].0).exec_time_s;
        for a in 0..c.etg.num_tasks() {
            for b in 0..c.etg.num_tasks() {
                let (pa, pb) = (&c.schedule.placements[a], &c.schedule.placements[b]);
                let overlap = resolved[a].1 < end(b) && resolved[b].1 < end(a);
                if a != b && pa.device == pb.device && pa.core != pb.core && overlap {
                    let mut s = c.schedule.clone();
                    s.placements[a].core = pb.core;
                    let r = validate(&s, &c.etg, &c.sys, eps);
                    assert!(r.has(Family::Nonoverlap), "{:?}", r.violations);
                    mutations[1] += 1;
                }
            }
        }

        // Inflate one task's memory past its device's budget.
        for t in 0..c.etg.num_tasks() {
            let dev = c.sys.device(c.schedule.placements[t].device).unwrap();
            if !dev.memory_budget_bits.is_finite() {
                continue;
            }
            let mut file = task_graph_to_file(&c.tg);
            file.tasks[t].memory_mbit = dev.memory_budget_bits / 1e6 + 1.0;
            let tg = task_graph_from_file(file).unwrap();
            let etg = build_etg(&tg, &c.sys).unwrap().with_deadline(c.etg.deadline_s());
            let r = validate(&c.schedule, &etg, &c.sys, eps);
            assert!(r.has(Family::Memory), "{:?}", r.violations);
            assert!(!r.has(Family::Storage));
            mutations[2] += 1;
        }
    }
    assert!(mutations.iter().all(|&m| m >= 50), "mutation counts {mutations:?}");
}

#[test]
fn start_instants_cover_a_dense_grid() {
    for c in cases(40) {
        let resolved = c.schedule.resolve(&c.etg).unwrap();
        let horizon = c.schedule.makespan_s;
        for k in 0..100 {
            let s = horizon * k as f64 / 100.0;
            for dev in c.sys.devices() {
                let active: Vec<usize> = (0..c.etg.num_tasks())
                    .filter(|&u| {
                        let (un, us) = resolved[u];
                        c.etg.node(un).device == dev.id && us <= s && s < us + c.etg.node(un).exec_time_s
                    })
                    .collect();
                let mem: f64 = active.iter().map(|&u| c.etg.task(u).memory_bits).sum();
                let sto: f64 = active.iter().map(|&u| c.etg.task(u).storage_bits).sum();
                assert!(mem <= dev.memory_budget_bits + 1.0 && sto <= dev.storage_budget_bits + 1.0);
                for &a in &active {
                    let cap = c.etg.task(a).capability;
                    let same = active.iter().filter(|&&b| c.etg.task(b).capability == cap).count();
                    assert!(!cap.is_specialized() || same == 1);
                    let core = c.etg.node(resolved[a].0).core;
                    assert_eq!(active.iter().filter(|&&b| c.etg.node(resolved[b].0).core == core).count(), 1);
                }
            }
        }
    }
}
