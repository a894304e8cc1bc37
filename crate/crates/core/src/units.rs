//! Conversions between the table units used in input files and the SI units
//! used everywhere else (seconds, bits, joules, watts).
//!
//! Conversions back to table units round to 12 significant digits so that a
//! file written by this crate re-loads and re-serializes byte-identically.

pub const BITS_PER_MBIT: f64 = 1e6;
pub const BITS_PER_GIB: f64 = 8.0 * 1024.0 * 1024.0 * 1024.0;
pub const JOULES_PER_WH: f64 = 3600.0;
pub const SECONDS_PER_MS: f64 = 1e-3;
pub const JOULES_PER_UJ: f64 = 1e-6;

pub fn mbit_to_bits(v: f64) -> f64 {
    v * BITS_PER_MBIT
}

pub fn bits_to_mbit(v: f64) -> f64 {
    canonical(v / BITS_PER_MBIT)
}

pub fn gib_to_bits(v: f64) -> f64 {
    v * BITS_PER_GIB
}

pub fn bits_to_gib(v: f64) -> f64 {
    canonical(v / BITS_PER_GIB)
}

pub fn wh_to_joules(v: f64) -> f64 {
    v * JOULES_PER_WH
}

pub fn joules_to_wh(v: f64) -> f64 {
    canonical(v / JOULES_PER_WH)
}

pub fn ms_to_s(v: f64) -> f64 {
    v * SECONDS_PER_MS
}

pub fn s_to_ms(v: f64) -> f64 {
    canonical(v / SECONDS_PER_MS)
}

/// Mbit/s to bit/s.
pub fn mbps_to_bps(v: f64) -> f64 {
    v * BITS_PER_MBIT
}

pub fn bps_to_mbps(v: f64) -> f64 {
    canonical(v / BITS_PER_MBIT)
}

/// µJ/bit to J/bit.
pub fn uj_to_j(v: f64) -> f64 {
    v * JOULES_PER_UJ
}

pub fn j_to_uj(v: f64) -> f64 {
    canonical(v / JOULES_PER_UJ)
}

/// Rounds to 12 significant digits, the precision used in written files.
pub fn canonical(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_survive_a_round_trip() {
        for v in [0.95, 1.0, 2.57, 12648.38, 103.98, 0.3, 21.7, 3.22, 1e-3, 7.12345678901] {
            assert_eq!(s_to_ms(ms_to_s(v)), v);
            assert_eq!(bits_to_mbit(mbit_to_bits(v)), v);
            assert_eq!(bits_to_gib(gib_to_bits(v)), v);
            assert_eq!(joules_to_wh(wh_to_joules(v)), v);
            assert_eq!(j_to_uj(uj_to_j(v)), v);
        }
    }

    #[test]
    fn gib_is_binary() {
        assert_eq!(gib_to_bits(1.0), 8_589_934_592.0);
    }
}
