use etgsched::etg::{build_etg, build_etg_with, compute_deadline, critical_path, CpAggregate, EtgOptions};
use etgsched::model::DeviceId;
use etgsched::workloads::builder::{basic_device, link, InstanceBuilder};

fn single_device() -> InstanceBuilder {
    InstanceBuilder::new().device(basic_device(DeviceId::edge(1), 1, &[]))
}

#[test]
fn single_task_deadline_is_one_and_a_half_times_its_latency() {
    let (tg, sys) = single_device().task(1, 0, 0.0, 0.0, 0.0).uniform_profile(1, 4.0, 1.0).build().unwrap();
    let etg = build_etg(&tg, &sys).unwrap();
    assert!((etg.deadline_s() - 6.0).abs() < 1e-12);
}

#[test]
fn chain_deadline_sums_the_path() {
    let (tg, sys) = single_device()
        .task(1, 0, 1e6, 0.0, 0.0)
        .task(2, 0, 1e6, 0.0, 0.0)
        .task(3, 0, 0.0, 0.0, 0.0)
        .uniform_profile(1, 1.0, 1.0)
        .uniform_profile(2, 1.0, 1.0)
        .uniform_profile(3, 1.0, 1.0)
        .arc(1, 2)
        .arc(2, 3)
        .build()
        .unwrap();
    let etg = build_etg(&tg, &sys).unwrap();
    assert!((etg.deadline_s() - 4.5).abs() < 1e-12);
}

#[test]
fn unit_factor_is_the_critical_path() {
    let (a, b) = (DeviceId::edge(1), DeviceId::hub(1));
    let (tg, sys) = InstanceBuilder::new()
        .device(basic_device(a, 1, &[]))
        .device(basic_device(b, 2, &[]))
        .fully_connect(link(1.0, 0.0, 0.0))
        .task(1, 0, 2e6, 0.0, 0.0)
        .task(2, 0, 0.0, 0.0, 0.0)
        .profile(1, a, 2.0, 1.0)
        .profile(1, b, 4.0, 1.0)
        .profile(2, a, 1.0, 1.0)
        .profile(2, b, 3.0, 1.0)
        .arc(1, 2)
        .build()
        .unwrap();
    let opts = EtgOptions { deadline_factor: 1.0, cp_aggregate: CpAggregate::Mean };
    let etg = build_etg_with(&tg, &sys, &opts).unwrap();
    let cp = critical_path(&etg, CpAggregate::Mean);
    assert!((etg.deadline_s() - cp).abs() < 1e-12);
    assert!((compute_deadline(&etg, 2.0, CpAggregate::Mean) - 2.0 * cp).abs() < 1e-12);
    assert!(critical_path(&etg, CpAggregate::Min) <= cp);
    assert!(critical_path(&etg, CpAggregate::Max) >= cp);
}

#[test]
fn explicit_deadline_is_kept() {
    let (tg, sys) = single_device().task(1, 0, 0.0, 0.0, 0.0).uniform_profile(1, 4.0, 1.0).deadline(9.0).build().unwrap();
    assert_eq!(build_etg(&tg, &sys).unwrap().deadline_s(), 9.0);
}
