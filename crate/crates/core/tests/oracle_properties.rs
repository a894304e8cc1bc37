use etgsched::etg::{build_etg, ExtendedTaskGraph};
use etgsched::heft::heft_schedule;
use etgsched::milp::{build_model, encode_schedule, epsilon, Tag};
use etgsched::model::{DeviceId, SystemConfig};
use etgsched::par;
use etgsched::solver::{search_space, solve_oracle, OracleLimits};
use etgsched::validate::{total_energy, validate};
use etgsched::workloads::builder::{basic_device, link, InstanceBuilder};
use etgsched::workloads::{random_small_instance, SmallParams};
use etgsched::Error;

const LIMITS: OracleLimits = OracleLimits { max_states: 2e5 };

fn instances(params: &SmallParams, seeds: std::ops::Range<u64>) -> Vec<(u64, ExtendedTaskGraph, SystemConfig)> {
    seeds
        .filter_map(|seed| {
            let (tg, sys) = random_small_instance(seed, params).ok()?;
            let etg = build_etg(&tg, &sys).ok()?;
            (search_space(&etg) <= LIMITS.max_states).then_some((seed, etg, sys))
        })
        .collect()
}

fn optimum(etg: &ExtendedTaskGraph, sys: &SystemConfig) -> Option<f64> {
    match solve_oracle(etg, sys, &LIMITS) {
        Ok(o) => Some(o.objective),
        Err(Error::InfeasibleInstance) => None,
        Err(e) => panic!("oracle failed: {e}"),
    }
}

#[test]
fn heft_never_beats_the_oracle() {
    let mut compared = 0;
    for (seed, etg, sys) in instances(&SmallParams::default(), 0..150) {
        let tol = 10.0 * epsilon(&etg);
        let exact = solve_oracle(&etg, &sys, &LIMITS);
        let heuristic = heft_schedule(&etg, &sys).into_schedule();
        if let Ok(o) = &exact {
            let s = o.schedule.as_ref().unwrap();
            assert!(validate(s, &etg, &sys, epsilon(&etg)).is_feasible(), "seed {seed}");
            assert!((s.makespan_s - o.objective).abs() <= tol);
        }
        if let Some(h) = &heuristic {
            let r = validate(h, &etg, &sys, epsilon(&etg));
            assert!(r.is_feasible(), "seed {seed}: {:?}", r.violations);
        }
        match (exact, heuristic) {
            (Ok(o), Some(h)) => {
                assert!(o.objective <= h.makespan_s + tol, "seed {seed}: {} > {}", o.objective, h.makespan_s);
                compared += 1;
            }
            (Err(Error::InfeasibleInstance), Some(_)) => panic!("seed {seed}: heuristic found a schedule the oracle missed"),
            (Err(Error::InfeasibleInstance) | Ok(_), None) => {}
            (Err(e), _) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(compared >= 50, "only {compared} co-feasible instances");
}

#[test]
fn schedules_satisfy_the_model_rows() {
    for (seed, etg, sys) in instances(&SmallParams::default(), 0..60) {
        let Some(s) = heft_schedule(&etg, &sys).into_schedule() else { continue };
        let model = build_model(&etg, &sys);
        let values = encode_schedule(&model, &etg, &s).unwrap();
        let bad = model.check_assignment(&values, 1e-6);
        assert!(bad.is_empty(), "seed {seed}: {:?}", bad.iter().map(|(c, v)| (&c.name, v)).collect::<Vec<_>>());
        let energy = total_energy(&s, &etg, &sys).unwrap();
        for row in model.constraints().iter().filter(|c| c.tag == Tag::Energy) {
            let lhs = row.lhs(&values);
            assert!(
                energy.values().any(|&e| (e - lhs).abs() <= 1e-9 * e.abs().max(1.0)),
                "seed {seed}: energy row {} = {lhs} matches no device",
                row.name
            );
        }
    }
}

#[test]
fn scaling_time_scales_the_optimum() {
    let params = SmallParams { energy_budget_prob: 0.0, ..SmallParams::default() };
    let mut checked = 0;
    for (seed, etg, sys) in instances(&params, 0..100) {
        if checked == 20 {
            break;
        }
        let Some(base) = optimum(&etg, &sys) else { continue };
        for k in [0.5, 2.0, 10.0] {
            let scaled = optimum(&etg.scale_time(k), &sys).expect("scaling keeps feasibility");
            assert!((scaled - k * base).abs() <= 1e-6 * k * base, "seed {seed}, k = {k}: {scaled} vs {}", k * base);
        }
        checked += 1;
    }
    assert_eq!(checked, 20);
}

#[test]
fn oracle_is_deterministic_across_backends() {
    for (_, etg, sys) in instances(&SmallParams::default(), 0..30) {
        let a = solve_oracle(&etg, &sys, &LIMITS).ok().and_then(|o| o.schedule);
        let b = par::sequential(|| solve_oracle(&etg, &sys, &LIMITS)).ok().and_then(|o| o.schedule);
        let c = par::with_threads(3, || solve_oracle(&etg, &sys, &LIMITS)).ok().and_then(|o| o.schedule);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

fn solo(cores: u32, caps: &[u32]) -> InstanceBuilder {
    InstanceBuilder::new().device(basic_device(DeviceId::edge(1), cores, caps))
}

fn oracle_makespan(b: InstanceBuilder) -> f64 {
    let (tg, sys) = b.build().unwrap();
    let etg = build_etg(&tg, &sys).unwrap();
    solve_oracle(&etg, &sys, &LIMITS).unwrap().objective
}

#[test]
fn shared_capability_serializes_on_spare_cores() {
    let two = |cap| {
        solo(2, &[1])
            .task(1, cap, 0.0, 0.0, 0.0)
            .task(2, cap, 0.0, 0.0, 0.0)
            .uniform_profile(1, 3.0, 1.0)
            .uniform_profile(2, 2.0, 1.0)
            .deadline(10.0)
    };
    assert_eq!(oracle_makespan(two(0)), 3.0);
    assert_eq!(oracle_makespan(two(1)), 5.0);
}

#[test]
fn memory_budget_serializes_on_spare_cores() {
    let two = |budget_bits| {
        let mut d = basic_device(DeviceId::edge(1), 2, &[]);
        d.memory_budget_bits = budget_bits;
        InstanceBuilder::new()
            .device(d)
            .task(1, 0, 0.0, 600e6, 0.0)
            .task(2, 0, 0.0, 600e6, 0.0)
            .uniform_profile(1, 3.0, 1.0)
            .uniform_profile(2, 2.0, 1.0)
            .deadline(10.0)
    };
    assert_eq!(oracle_makespan(two(2000e6)), 3.0);
    assert_eq!(oracle_makespan(two(1000e6)), 5.0);
}

#[test]
fn energy_budget_moves_a_task_to_a_slower_device() {
    let with_budget = |budget_j| {
        let (a, b) = (DeviceId::edge(1), DeviceId::hub(1));
        let mut fast = basic_device(a, 1, &[]);
        fast.energy_budget_j = budget_j;
        let (tg, sys) = InstanceBuilder::new()
            .device(fast)
            .device(basic_device(b, 1, &[]))
            .fully_connect(link(1.0, 0.0, 0.0))
            .task(1, 0, 0.0, 0.0, 0.0)
            .profile(1, a, 1.0, 10.0)
            .profile(1, b, 2.0, 1.0)
            .deadline(10.0)
            .build()
            .unwrap();
        let etg = build_etg(&tg, &sys).unwrap();
        let s = solve_oracle(&etg, &sys, &LIMITS).unwrap().schedule.unwrap();
        (s.placements[0].device, s.makespan_s)
    };
    assert_eq!(with_budget(f64::INFINITY), (DeviceId::edge(1), 1.0));
    assert_eq!(with_budget(5.0), (DeviceId::hub(1), 2.0));
}
