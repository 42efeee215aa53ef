//! Frame configuration and mobility helpers.
//!
//! An OTFS frame places `M` delay bins across a bandwidth of `M * delta_f`
//! and `N` Doppler bins across a duration of `N * T`, where the slot duration
//! `T` and subcarrier spacing `delta_f` satisfy `T * delta_f = 1`. Every
//! other module consumes a validated [`OtfsConfig`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the `T * delta_f = 1` constraint.
pub const TIME_FREQ_PRODUCT_TOL: f64 = 1e-12;

/// Propagation speed used by default in mobility calculations (m/s).
///
/// The round 3e8 value is the one commonly used in link-budget examples;
/// pass [`SI_SPEED_OF_LIGHT`] to `max_doppler_with_c` for the exact constant.
pub const NOMINAL_SPEED_OF_LIGHT: f64 = 3.0e8;

/// Exact speed of light in vacuum (m/s).
pub const SI_SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Frame geometry and sampling parameters for one OTFS frame.
///
/// Serialized form uses exactly these keys: `M`, `N`, `delta_f`, `T`,
/// `carrier_freq`, `cp_len`, `oversampling`. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtfsConfig {
    /// Number of delay bins / subcarriers.
    #[serde(rename = "M")]
    pub m: usize,
    /// Number of Doppler bins / time slots.
    #[serde(rename = "N")]
    pub n: usize,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Slot duration in seconds; must satisfy `T * delta_f = 1`.
    #[serde(rename = "T")]
    pub slot_duration: f64,
    /// Carrier frequency in Hz, used only by mobility calculators.
    #[serde(default)]
    pub carrier_freq: f64,
    /// Cyclic prefix length in samples at the oversampled rate.
    #[serde(default)]
    pub cp_len: usize,
    /// Oversampling factor Q relative to critical sampling (default 1).
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
}

fn default_oversampling() -> usize {
    1
}

impl OtfsConfig {
    /// Critically sampled configuration with no cyclic prefix.
    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        OtfsConfig {
            m,
            n,
            delta_f,
            slot_duration: 1.0 / delta_f,
            carrier_freq: 0.0,
            cp_len: 0,
            oversampling: 1,
        }
        .validate()
    }

    /// Checks every invariant and returns the configuration unchanged.
    ///
    /// Validation is idempotent; it never mutates or renormalizes fields.
    pub fn validate(self) -> Result<Self> {
        if self.m < 1 {
            return Err(Error::InvalidConfig("M must be >= 1".into()));
        }
        if self.n < 1 {
            return Err(Error::InvalidConfig("N must be >= 1".into()));
        }
        if self.delta_f <= 0.0 || !self.delta_f.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "delta_f must be positive and finite, got {}",
                self.delta_f
            )));
        }
        if self.slot_duration <= 0.0 || !self.slot_duration.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "T must be positive and finite, got {}",
                self.slot_duration
            )));
        }
        let product = self.slot_duration * self.delta_f;
        if (product - 1.0).abs() > TIME_FREQ_PRODUCT_TOL {
            return Err(Error::InvalidConfig(format!(
                "T * delta_f must equal 1 within {TIME_FREQ_PRODUCT_TOL:e}, got {product}"
            )));
        }
        if self.oversampling < 1 {
            return Err(Error::InvalidConfig("oversampling must be >= 1".into()));
        }
        if self.cp_len >= self.m * self.oversampling {
            return Err(Error::InvalidConfig(format!(
                "cp_len must lie in [0, M*Q) = [0, {}), got {}",
                self.m * self.oversampling,
                self.cp_len
            )));
        }
        if self.carrier_freq < 0.0 || !self.carrier_freq.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "carrier_freq must be non-negative and finite, got {}",
                self.carrier_freq
            )));
        }
        Ok(self)
    }

    /// Parses and validates a configuration from its JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: OtfsConfig = serde_json::from_str(text)?;
        cfg.validate()
    }

    /// Occupied bandwidth `M * delta_f` in Hz.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.delta_f
    }

    /// Frame duration `N * T` in seconds.
    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.slot_duration
    }

    /// Sample rate `M * Q * delta_f` in Hz.
    pub fn sample_rate(&self) -> f64 {
        (self.m * self.oversampling) as f64 * self.delta_f
    }

    /// Sample period `1 / (M * Q * delta_f)` in seconds.
    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate()
    }

    /// Samples per slot at the oversampled rate, `M * Q`.
    pub fn samples_per_slot(&self) -> usize {
        self.m * self.oversampling
    }

    /// Samples in one frame body (no cyclic prefix), `N * M * Q`.
    pub fn body_len(&self) -> usize {
        self.n * self.m * self.oversampling
    }

    /// Number of delay-Doppler grid points, `M * N`.
    pub fn grid_len(&self) -> usize {
        self.m * self.n
    }
}

// ----------------------------------------------------------------------
// Mobility helpers
// ----------------------------------------------------------------------

/// Maximum Doppler shift `f_c * v / c` in Hz for the default propagation
/// speed [`NOMINAL_SPEED_OF_LIGHT`].
///
/// `carrier_freq` is in Hz, `speed` in m/s. Linear in both arguments.
pub fn max_doppler(carrier_freq: f64, speed: f64) -> f64 {
    max_doppler_with_c(carrier_freq, speed, NOMINAL_SPEED_OF_LIGHT)
}

/// Maximum Doppler shift for an explicit propagation speed `c` in m/s.
pub fn max_doppler_with_c(carrier_freq: f64, speed: f64, c: f64) -> f64 {
    carrier_freq * speed / c
}

/// Channel coherence time `1 / (4 * nu_max)` in seconds.
///
/// Errors when `nu_max <= 0`.
pub fn coherence_time(max_doppler_hz: f64) -> Result<f64> {
    if max_doppler_hz <= 0.0 || !max_doppler_hz.is_finite() {
        return Err(Error::NonPositive {
            name: "max_doppler_hz",
            value: max_doppler_hz,
        });
    }
    Ok(1.0 / (4.0 * max_doppler_hz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lte_like() -> OtfsConfig {
        OtfsConfig {
            m: 32,
            n: 16,
            delta_f: 15e3,
            slot_duration: 1.0 / 15e3,
            carrier_freq: 3.5e9,
            cp_len: 4,
            oversampling: 1,
        }
    }

    #[test]
    fn test_valid_config_passes_and_is_idempotent() {
        let cfg = lte_like().validate().expect("valid config");
        let again = cfg.clone().validate().expect("idempotent");
        assert_eq!(cfg, again);
    }

    #[test]
    fn test_time_frequency_product_mismatch_is_rejected() {
        let mut cfg = lte_like();
        cfg.slot_duration = 1.1 / 15e3;
        let err = cfg.validate().unwrap_err();
        assert!(
            err.to_string().contains("T * delta_f"),
            "error should name the failing constraint: {err}"
        );
    }

    #[test]
    fn test_zero_dimensions_are_rejected() {
        let mut cfg = lte_like();
        cfg.m = 0;
        assert!(cfg.validate().is_err(), "M = 0 must fail");
        let mut cfg = lte_like();
        cfg.n = 0;
        assert!(cfg.validate().is_err(), "N = 0 must fail");
    }

    #[test]
    fn test_cp_length_bound() {
        let mut cfg = lte_like();
        cfg.cp_len = 32;
        assert!(cfg.validate().is_err(), "cp_len = M*Q must fail");
        let mut cfg = lte_like();
        cfg.cp_len = 31;
        assert!(cfg.validate().is_ok(), "cp_len = M*Q - 1 is allowed");
    }

    #[test]
    fn test_derived_quantities() {
        let cfg = lte_like().validate().unwrap();
        assert_eq!(cfg.bandwidth(), 480e3);
        let frame = cfg.frame_duration();
        assert!(
            (frame - 16.0 / 15e3).abs() < 1e-18,
            "frame duration {frame}"
        );
        // Time-bandwidth product equals the number of grid points when
        // T * delta_f = 1.
        let tb = cfg.bandwidth() * cfg.frame_duration();
        assert!(
            (tb - (cfg.m * cfg.n) as f64).abs() < 1e-9,
            "time-bandwidth product {tb} vs {}",
            cfg.m * cfg.n
        );
        assert_eq!(cfg.samples_per_slot(), 32);
        assert_eq!(cfg.body_len(), 512);
        assert!((cfg.sample_rate() - 480e3).abs() < 1e-9);
    }

    #[test]
    fn test_json_round_trip_and_unknown_key_rejection() {
        let text = r#"{"M":32,"N":16,"delta_f":15000.0,"T":6.666666666666667e-5,
                       "carrier_freq":3.5e9,"cp_len":4,"oversampling":1}"#;
        let cfg = OtfsConfig::from_json(text).expect("parse");
        assert_eq!(cfg.m, 32);
        assert_eq!(cfg.n, 16);

        let bad = r#"{"M":32,"N":16,"delta_f":15000.0,"T":6.666666666666667e-5,"bogus":1}"#;
        assert!(
            OtfsConfig::from_json(bad).is_err(),
            "unknown keys must be rejected"
        );
    }

    #[test]
    fn test_max_doppler_reproduces_500_kmh_class_example() {
        // 3.5 GHz carrier, 300 km/h: 972.22 Hz with the nominal c.
        let nu = max_doppler(3.5e9, 300.0 / 3.6);
        assert!(
            (nu - 972.2222222222221).abs() < 1e-9,
            "nu_max = {nu}, expected 972.2222.."
        );
        // Exact c gives a slightly larger shift.
        let nu_si = max_doppler_with_c(3.5e9, 300.0 / 3.6, SI_SPEED_OF_LIGHT);
        assert!(
            (nu_si - 972.8952776612766).abs() < 1e-9,
            "nu_max(SI) = {nu_si}"
        );
        // Linearity in carrier frequency.
        let nu2 = max_doppler(7.0e9, 300.0 / 3.6);
        assert!((nu2 - 2.0 * nu).abs() < 1e-9, "doubled carrier: {nu2}");
    }

    #[test]
    fn test_coherence_time_quarter_inverse_rule() {
        let t_c = coherence_time(972.2222222222221).unwrap();
        assert!(
            (t_c - 2.571428571428572e-4).abs() < 1e-12,
            "coherence time {t_c} s, expected about 257.14 us"
        );
        assert!(coherence_time(0.0).is_err(), "zero Doppler must error");
        assert!(coherence_time(-1.0).is_err(), "negative Doppler must error");
    }
}
