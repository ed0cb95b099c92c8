//! Decibel and power unit conversions.
//!
//! Configuration files speak dBm and dB; every solver works in linear
//! watts. Conversions happen once at the config boundary and once when
//! formatting output, never inside numeric kernels.

/// Converts a ratio in dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to dB.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts a power level in dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

/// Expresses an energy given in watt-slots on the dBm scale
/// (10·log10 of the milliwatt-slot value).
#[inline]
pub fn energy_dbm_slots(energy_w_slots: f64) -> f64 {
    10.0 * (energy_w_slots * 1e3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for dbm in [-114.4, -30.0, 0.0, 17.0, 23.0] {
            let w = dbm_to_watts(dbm);
            assert!(
                (watts_to_dbm(w) - dbm).abs() < 1e-12,
                "dBm round trip drifted at {dbm}"
            );
        }
        assert!((db_to_linear(3.0103) - 2.0).abs() < 1e-4);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn reference_points() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18, "0 dBm is 1 mW");
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12, "30 dBm is 1 W");
        assert!((energy_dbm_slots(1e-3) - 0.0).abs() < 1e-12);
    }
}
