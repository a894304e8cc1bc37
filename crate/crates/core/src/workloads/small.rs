//! Small random instances sized for exhaustive search: a handful of tasks on
//! two or three devices with one or two cores each, random specialized
//! capabilities and budgets that are tight often enough to matter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builder::{basic_device, link, InstanceBuilder};
use crate::error::Result;
use crate::model::{DeviceId, SystemConfig, TaskGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct SmallParams {
    pub tasks: (usize, usize),
    pub devices: (usize, usize),
    pub cores: (u32, u32),
    pub arc_prob: f64,
    /// Probability that a task needs a specialized capability.
    pub special_prob: f64,
    /// Probability that a device has a finite energy budget.
    pub energy_budget_prob: f64,
    /// Probability that e1 reaches c1 through the hub (three devices only).
    pub relay_prob: f64,
    /// When false, every device is unconstrained in memory, storage and
    /// energy.
    pub budgets: bool,
}

impl Default for SmallParams {
    fn default() -> Self {
        SmallParams {
            tasks: (3, 6),
            devices: (2, 3),
            cores: (1, 2),
            arc_prob: 0.35,
            special_prob: 0.35,
            energy_budget_prob: 0.5,
            relay_prob: 0.5,
            budgets: true,
        }
    }
}

fn round(v: f64, k: f64) -> f64 {
    (v * k).round() / k
}

/// Random small instance; deterministic in `seed`.
pub fn random_small_instance(seed: u64, p: &SmallParams) -> Result<(TaskGraph, SystemConfig)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(p.tasks.0..=p.tasks.1);
    let nd = rng.gen_range(p.devices.0..=p.devices.1);
    let ids: Vec<DeviceId> = match nd {
        1 => vec![DeviceId::edge(1)],
        2 => vec![DeviceId::edge(1), DeviceId::hub(1)],
        _ => {
            let mut v = vec![DeviceId::edge(1), DeviceId::hub(1), DeviceId::cloud(1)];
            v.extend((2..=nd as u32 - 2).map(DeviceId::edge));
            v
        }
    };

    // Per-task demands first, so budgets can be sized relative to them.
    let ref_times: Vec<f64> = (0..n).map(|_| round(rng.gen_range(0.5..8.0), 100.0)).collect();
    let memory: Vec<f64> = (0..n).map(|_| round(rng.gen_range(50.0..500.0), 1.0) * 1e6).collect();
    let storage: Vec<f64> = (0..n).map(|_| round(rng.gen_range(50.0..500.0), 1.0) * 1e6).collect();
    let data: Vec<f64> = (0..n).map(|_| round(rng.gen_range(1.0..20.0), 10.0) * 1e6).collect();
    let max_mem = memory.iter().copied().fold(0.0, f64::max);
    let max_sto = storage.iter().copied().fold(0.0, f64::max);

    let mut b = InstanceBuilder::new();
    let mut featured = vec![Vec::new(); 3];
    let mut ratios = Vec::new();
    for (k, &id) in ids.iter().enumerate() {
        let caps: Vec<u32> = [1u32, 2].into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        for &c in &caps {
            featured[c as usize].push(k);
        }
        let mut d = basic_device(id, rng.gen_range(p.cores.0..=p.cores.1), &caps);
        d.perf_ratio = *[1.0, 1.5, 2.0, 3.0].choose(&mut rng).expect("non-empty");
        ratios.push(d.perf_ratio);
        if p.budgets {
            d.memory_budget_bits = round(rng.gen_range(1.0..2.5) * max_mem / 1e6, 1.0) * 1e6;
            d.storage_budget_bits = round(rng.gen_range(1.0..2.5) * max_sto / 1e6, 1.0) * 1e6;
        }
        b = b.device(d);
    }

    for &a in &ids {
        for &c in &ids {
            if a != c {
                let l = link(
                    round(rng.gen_range(5.0..20.0), 10.0),
                    round(rng.gen_range(0.5..2.0), 100.0),
                    round(rng.gen_range(0.3..1.5), 100.0),
                );
                b = b.link(a, c, l);
            }
        }
    }
    if ids.len() >= 3 && rng.gen_bool(p.relay_prob) {
        b = b.relay(ids[0], ids[2], ids[1]).relay(ids[2], ids[0], ids[1]);
    }

    let mut mean_energy = 0.0;
    for t in 0..n {
        let id = t as u32 + 1;
        let wanted = if rng.gen_bool(p.special_prob) { rng.gen_range(1..=2u32) } else { 0 };
        let cap = if wanted > 0 && featured[wanted as usize].is_empty() { 0 } else { wanted };
        b = b.task(id, cap, data[t], memory[t], storage[t]);
        for (k, &dev) in ids.iter().enumerate() {
            let power = round(rng.gen_range(1.0..10.0), 10.0);
            let time = round(ref_times[t] / ratios[k], 1000.0);
            mean_energy += power * time / ids.len() as f64;
            b = b.profile(id, dev, time, power);
        }
    }
    for a in 0..n {
        for c in (a + 1)..n {
            if rng.gen_bool(p.arc_prob) {
                b = b.arc(a as u32 + 1, c as u32 + 1);
            }
        }
    }
    let (tg, sys) = b.build()?;

    if !p.budgets {
        return Ok((tg, sys));
    }
    // Energy budgets are set after the fact so they can scale with the
    // workload's mean computational energy.
    let mut devices = sys.devices().to_vec();
    for d in &mut devices {
        if rng.gen_bool(p.energy_budget_prob) {
            d.energy_budget_j = round(rng.gen_range(0.3..1.2) * mean_energy, 10.0);
        }
    }
    let channels = sys.channels().copied().collect();
    let sys = SystemConfig::new(devices, channels, sys.capability_catalog().to_vec())?;
    Ok((tg, sys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instances_are_valid_and_deterministic() {
        for seed in 0..50 {
            let a = random_small_instance(seed, &SmallParams::default()).unwrap();
            let b = random_small_instance(seed, &SmallParams::default()).unwrap();
            assert_eq!(a, b);
            assert!((3..=6).contains(&a.0.len()));
            assert!((2..=3).contains(&a.1.devices().len()));
            crate::etg::build_etg(&a.0, &a.1).unwrap();
        }
    }
}
