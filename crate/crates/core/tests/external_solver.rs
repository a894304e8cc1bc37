//! End-to-end solves through the bundled HiGHS profile and through scripted
//! stand-in solvers that exercise the file boundary.

use std::collections::BTreeMap;

use etgsched::etg::{build_etg, ExtendedTaskGraph};
use etgsched::heft::heft_schedule;
use etgsched::milp::{build_model, epsilon};
use etgsched::model::{DeviceId, SystemConfig};
use etgsched::solver::{
    search_space, solve_external, solve_milp, verify_against_oracle, OracleLimits, SolutionFormat, SolveStatus,
    SolverProfile,
};
use etgsched::validate::validate;
use etgsched::workloads::builder::{basic_device, link, InstanceBuilder};
use etgsched::workloads::{random_small_instance, transformation_example, SmallParams};
use etgsched::Error;

fn etg_of(b: InstanceBuilder) -> (ExtendedTaskGraph, SystemConfig) {
    let (tg, sys) = b.build().unwrap();
    (build_etg(&tg, &sys).unwrap(), sys)
}

fn single_task(deadline_s: f64) -> (ExtendedTaskGraph, SystemConfig) {
    etg_of(
        InstanceBuilder::new()
            .device(basic_device(DeviceId::edge(1), 1, &[]))
            .task(1, 0, 0.0, 0.0, 0.0)
            .uniform_profile(1, 2.5, 1.0)
            .deadline(deadline_s),
    )
}

#[test]
fn single_task_is_optimal_at_its_latency() {
    let (etg, sys) = single_task(10.0);
    for profile in [SolverProfile::highs(), SolverProfile::highs_with(SolutionFormat::Pairs)] {
        let out = solve_milp(&etg, &sys, &profile, 60.0).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective - 2.5).abs() < 1e-9);
        assert_eq!(out.assignment.len(), build_model(&etg, &sys).variables().len());
        assert_eq!(out.schedule.unwrap().placements[0].start_s, 0.0);
    }
}

#[test]
fn zero_deadline_is_infeasible() {
    // Task graphs reject a zero deadline on load, so set it on the ETG.
    let (etg, sys) = single_task(10.0);
    let etg = etg.with_deadline(0.0);
    let out = solve_milp(&etg, &sys, &SolverProfile::highs(), 60.0).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
    assert!(!out.has_solution() && out.schedule.is_none());
    // The oracle agrees that there is nothing to schedule.
    let report = verify_against_oracle(&etg, &sys, &out, &OracleLimits::default()).unwrap();
    assert_eq!((report.reported, report.oracle), (None, None));
}

#[test]
fn tiny_time_limit_on_fifty_tasks_times_out() {
    let (a, b) = (DeviceId::edge(1), DeviceId::hub(1));
    let mut builder = InstanceBuilder::new()
        .device(basic_device(a, 1, &[]))
        .device(basic_device(b, 1, &[]))
        .fully_connect(link(10.0, 1.0, 1.0));
    for t in 1..=50u32 {
        builder = builder.task(t, 0, 1e6, 0.0, 0.0).uniform_profile(t, 1.0 + f64::from(t % 7), 1.0);
        if t > 1 && t % 3 == 0 {
            builder = builder.arc(t - 1, t);
        }
    }
    let (etg, sys) = etg_of(builder.deadline(1e4));
    let out = solve_external(&build_model(&etg, &sys), &SolverProfile::highs(), 0.001).unwrap();
    assert_eq!(out.status, SolveStatus::Timeout);
}

#[test]
fn transformation_example_agrees_with_the_oracle() {
    let (tg, sys) = transformation_example();
    let etg = build_etg(&tg, &sys).unwrap();
    let out = solve_milp(&etg, &sys, &SolverProfile::highs(), 120.0).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    let s = out.schedule.as_ref().unwrap();
    assert!(validate(s, &etg, &sys, epsilon(&etg)).is_feasible());
    let report = verify_against_oracle(&etg, &sys, &out, &OracleLimits::default()).unwrap();
    assert!((report.reported.unwrap() - report.oracle.unwrap()).abs() <= report.tolerance);
    let h = heft_schedule(&etg, &sys).into_schedule().unwrap();
    assert!(out.objective <= h.makespan_s + report.tolerance);

    // A corrupted objective is caught with both schedules attached.
    let mut bad = out.clone();
    bad.objective += 1.0;
    match verify_against_oracle(&etg, &sys, &bad, &OracleLimits::default()) {
        Err(Error::Mismatch { reported_schedule, oracle_schedule, .. }) => {
            assert!(reported_schedule.is_some() && oracle_schedule.is_some());
        }
        other => panic!("expected a mismatch, got {other:?}"),
    }
}

#[test]
fn random_small_instances_agree_with_the_oracle() {
    let limits = OracleLimits { max_states: 2e5 };
    let mut checked = 0;
    for seed in 0..40u64 {
        let Ok((tg, sys)) = random_small_instance(seed, &SmallParams::default()) else { continue };
        let Ok(etg) = build_etg(&tg, &sys) else { continue };
        if search_space(&etg) > limits.max_states {
            continue;
        }
        let out = solve_milp(&etg, &sys, &SolverProfile::highs(), 120.0).unwrap();
        verify_against_oracle(&etg, &sys, &out, &limits).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        if let Some(s) = &out.schedule {
            let r = validate(s, &etg, &sys, epsilon(&etg));
            assert!(r.is_feasible(), "seed {seed}: {:?}", r.violations);
        }
        checked += 1;
        if checked == 10 {
            break;
        }
    }
    assert_eq!(checked, 10);
}

/// A profile running `script` through `sh` with the LP and solution paths.
fn scripted(dir: &std::path::Path, script: &str, status_map: &[(&str, SolveStatus)]) -> SolverProfile {
    let path = dir.join("solver.sh");
    std::fs::write(&path, script).unwrap();
    let json = serde_json::json!({
        "name": "scripted",
        "command_template": format!("sh {} {{lp}} {{sol}}", path.display()),
        "solution_format": "pairs",
        "status_map": status_map.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
    });
    let file = dir.join("profile.json");
    std::fs::write(&file, json.to_string()).unwrap();
    SolverProfile::resolve(file.to_str().unwrap()).unwrap()
}

#[test]
fn scripted_solver_statuses_are_mapped() {
    let dir = tempfile::tempdir().unwrap();
    let (etg, sys) = single_task(10.0);
    let model = build_model(&etg, &sys);
    let p = scripted(dir.path(), "printf 'status NOSOL\\nobjective none\\n' > \"$2\"\n", &[("NOSOL", SolveStatus::Infeasible)]);
    let out = solve_external(&model, &p, 10.0).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
    assert_eq!(out.backend, "scripted");

    let p = scripted(dir.path(), "printf 'status WHAT\\nobjective none\\n' > \"$2\"\n", &[("NOSOL", SolveStatus::Infeasible)]);
    assert!(matches!(solve_external(&model, &p, 10.0), Err(Error::SolutionParse(_))));

    let p = scripted(dir.path(), "echo broken >&2; exit 3\n", &[]);
    assert!(matches!(solve_external(&model, &p, 10.0), Err(Error::SolverLaunch(_))));
}

#[test]
fn unknown_profile_is_a_launch_error() {
    assert!(matches!(SolverProfile::resolve("/nonexistent/profile.json"), Err(Error::SolverLaunch(_))));
}
