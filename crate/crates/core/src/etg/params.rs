use crate::model::{DeviceId, Route};

/// Energy to run a task: execution time times power draw.
pub fn comp_energy(exec_time_s: f64, power_w: f64) -> f64 {
    exec_time_s * power_w
}

/// Time to move `data_bits` along `route`. Relayed transfers pay both hops.
pub fn comm_latency(data_bits: f64, route: &Route) -> f64 {
    match route {
        Route::SameDevice => 0.0,
        Route::Direct(l) => data_bits / l.bandwidth_bps,
        Route::Relayed { first, second, .. } => data_bits * (1.0 / first.bandwidth_bps + 1.0 / second.bandwidth_bps),
    }
}

/// Total transmit + receive energy of moving `data_bits` along `route`.
pub fn comm_energy(data_bits: f64, route: &Route) -> f64 {
    ArcEnergy::of(data_bits, route).total()
}

/// Communication energy of one transfer, attributed to the devices that pay
/// it: the sender transmits on the first hop, the receiver receives on the
/// last hop, and a relay receives and retransmits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArcEnergy {
    pub sender_j: f64,
    pub receiver_j: f64,
    pub relay: Option<(DeviceId, f64)>,
}

impl ArcEnergy {
    pub fn of(data_bits: f64, route: &Route) -> Self {
        match *route {
            Route::SameDevice => ArcEnergy::default(),
            Route::Direct(l) => ArcEnergy {
                sender_j: data_bits * l.tx_j_per_bit,
                receiver_j: data_bits * l.rx_j_per_bit,
                relay: None,
            },
            Route::Relayed { first, via, second } => ArcEnergy {
                sender_j: data_bits * first.tx_j_per_bit,
                receiver_j: data_bits * second.rx_j_per_bit,
                relay: Some((via, data_bits * (first.rx_j_per_bit + second.tx_j_per_bit))),
            },
        }
    }

    pub fn total(&self) -> f64 {
        self.sender_j + self.receiver_j + self.relay.map_or(0.0, |(_, e)| e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Link;

    fn link(mbps: f64, tx_uj: f64, rx_uj: f64) -> Link {
        Link { bandwidth_bps: mbps * 1e6, tx_j_per_bit: tx_uj * 1e-6, rx_j_per_bit: rx_uj * 1e-6 }
    }

    #[test]
    fn computational_energy_is_time_times_power() {
        assert_eq!(comp_energy(2.0, 3.0), 6.0);
        assert_eq!(comp_energy(0.0, 17.5), 0.0);
        assert!((comp_energy(12.64838, 23.70) - 299.766606).abs() < 1e-9);
    }

    #[test]
    fn direct_latency_is_size_over_bandwidth() {
        assert!((comm_latency(10e6, &Route::Direct(link(5.0, 0.0, 0.0))) - 2.0).abs() < 1e-12);
        assert_eq!(comm_latency(10e6, &Route::SameDevice), 0.0);
    }

    #[test]
    fn relayed_latency_adds_both_hops() {
        let r = Route::Relayed { first: link(12.0, 0.0, 0.0), via: DeviceId::hub(1), second: link(6.0, 0.0, 0.0) };
        assert!((comm_latency(12e6, &r) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn direct_energy_is_tx_plus_rx() {
        let e = ArcEnergy::of(1e6, &Route::Direct(link(1.0, 1.0, 0.5)));
        assert!((e.sender_j - 1.0).abs() < 1e-12);
        assert!((e.receiver_j - 0.5).abs() < 1e-12);
        assert!((comm_energy(1e6, &Route::Direct(link(1.0, 1.0, 0.5))) - 1.5).abs() < 1e-12);
        assert_eq!(comm_energy(1e6, &Route::SameDevice), 0.0);
    }

    #[test]
    fn relayed_energy_charges_the_relay() {
        let r = Route::Relayed { first: link(1.0, 1.0, 1.0), via: DeviceId::hub(1), second: link(1.0, 1.0, 1.0) };
        assert!((comm_energy(1e6, &r) - 4.0).abs() < 1e-12);
        let e = ArcEnergy::of(1e6, &r);
        let (via, relay_j) = e.relay.unwrap();
        assert_eq!(via, DeviceId::hub(1));
        assert!((relay_j - 2.0).abs() < 1e-12);
    }
}
