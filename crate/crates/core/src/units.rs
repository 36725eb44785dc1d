//! dB / linear conversions.

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_lin(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    lin_to_db(w) + 30.0
}

/// Thermal noise power in watts over `bandwidth_hz` for a spectral density in dBm/Hz
/// and a receiver noise figure in dB.
pub fn noise_power_watts(psd_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(psd_dbm_hz + lin_to_db(bandwidth_hz) + noise_figure_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_noise_floor() {
        // -174 dBm/Hz over 360 kHz with a 2 dB noise figure.
        let n0 = noise_power_watts(-174.0, 360e3, 2.0);
        let expected_dbm = -174.0 + 10.0 * 360e3f64.log10() + 2.0;
        assert!((watts_to_dbm(n0) - expected_dbm).abs() < 1e-12);
        assert!((expected_dbm - (-116.4367)).abs() < 1e-3);
    }

    #[test]
    fn round_trips() {
        for x in [-30.0, 0.0, 7.5, 40.0] {
            assert!((lin_to_db(db_to_lin(x)) - x).abs() < 1e-12);
            assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() < 1e-12);
        }
    }
}
