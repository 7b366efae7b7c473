//! Network configuration, unit conversions and the content popularity model.

mod config;
mod popularity;

pub use config::{NetworkConfig, Tier, ETA_NATS_TO_BITS};
pub use popularity::PopularityModel;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_reference_points() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(43.0), 10f64.powf(1.3), max_relative = 1e-14);
        assert_relative_eq!(dbm_to_watts(43.0), 19.9526, max_relative = 1e-5);
        assert_relative_eq!(dbm_to_watts(23.0), 0.19953, max_relative = 1e-4);
        assert_relative_eq!(watts_to_dbm(dbm_to_watts(13.0)), 13.0, max_relative = 1e-14);
    }

    #[test]
    fn db_roundtrip() {
        assert_relative_eq!(db_to_linear(-10.0), 0.1, max_relative = 1e-15);
        assert_relative_eq!(linear_to_db(db_to_linear(-5.0)), -5.0, max_relative = 1e-14);
    }
}
