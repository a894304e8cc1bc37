use etgsched::etg::build_etg;
use etgsched::model::DeviceId;
use etgsched::workloads::builder::{basic_device, link, InstanceBuilder};
use etgsched::workloads::fixtures::{self, ConfigId};
use proptest::prelude::*;

/// Random DAG on `n` tasks (arcs only from lower to higher ids) over devices
/// that all feature every capability the tasks need.
fn instance(n: usize, arc_mask: &[bool], caps: &[u32], cores: &[u32]) -> (usize, usize, u32, etgsched::etg::ExtendedTaskGraph) {
    let ids = [DeviceId::edge(1), DeviceId::edge(2), DeviceId::hub(1), DeviceId::cloud(1)];
    let mut b = InstanceBuilder::new();
    for (k, &c) in cores.iter().enumerate() {
        b = b.device(basic_device(ids[k], c, &[1, 2, 3]));
    }
    b = b.fully_connect(link(10.0, 1.0, 0.5));
    for (t, &cap) in caps.iter().enumerate().take(n) {
        b = b.task(t as u32 + 1, cap, 1e6, 1e6, 1e6).uniform_profile(t as u32 + 1, 1.0, 1.0);
    }
    let mut arcs = 0;
    let mut k = 0;
    for a in 0..n {
        for c in (a + 1)..n {
            if arc_mask[k] {
                b = b.arc(a as u32 + 1, c as u32 + 1);
                arcs += 1;
            }
            k += 1;
        }
    }
    let (tg, sys) = b.build().unwrap();
    let gamma = sys.total_cores();
    (n, arcs, gamma, build_etg(&tg, &sys).unwrap())
}

fn case() -> impl Strategy<Value = (usize, Vec<bool>, Vec<u32>, Vec<u32>)> {
    (5usize..=20).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::bool::weighted(0.2), n * (n - 1) / 2),
            prop::collection::vec(0u32..=3, n),
            prop::collection::vec(1u32..=3, 1..=4),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn all_capable_devices_multiply_nodes_and_arcs((n, mask, caps, cores) in case()) {
        let (n, arcs, gamma, etg) = instance(n, &mask, &caps, &cores);
        prop_assert_eq!(etg.nodes().len(), gamma as usize * n);
        prop_assert_eq!(etg.arcs().len(), (gamma * gamma) as usize * arcs);
        for t in 0..n {
            prop_assert_eq!(etg.candidates(t).len(), gamma as usize);
        }
    }
}

#[test]
fn transformation_example_distribution() {
    let (tg, sys) = fixtures::transformation_example();
    let etg = build_etg(&tg, &sys).unwrap();
    let counts: Vec<usize> = (0..etg.num_tasks()).map(|t| etg.candidates(t).len()).collect();
    assert_eq!(counts, [1, 1, 5, 1]);
}

#[test]
fn real_world_sizes_per_configuration() {
    let expected = [(128, 1208), (128, 1208), (142, 1496), (142, 1496), (156, 1816), (156, 1816)];
    for (id, (nodes, arcs)) in ConfigId::ALL.into_iter().zip(expected) {
        let (tg, sys) = fixtures::real_world_fixture(id);
        let etg = build_etg(&tg, &sys).unwrap();
        assert_eq!((etg.nodes().len(), etg.arcs().len()), (nodes, arcs), "{}", id.name());
    }
}
