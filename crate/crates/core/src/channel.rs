//! Sampled linear time-varying multipath channel.
//!
//! A channel is a finite set of paths, each with a complex gain `h_i`, a
//! delay `tau_i` (seconds), and a Doppler shift `nu_i` (Hz). Acting on a
//! transmitted sample stream `s` it produces
//!
//! ```text
//! r[n] = sum_i h_i s[n - d_i] e^{j2pi nu_i (t_n - tau_i)}
//! ```
//!
//! where `d_i` is the delay in samples and `t_n` is the absolute time of
//! sample `n` (zero at the first body sample). The Doppler phase uses
//! `t - tau` exactly, which is what produces the `e^{-j2pi nu tau}`
//! factor carried by the delay-Doppler effective channel. Delays must be
//! integer multiples of the sample period here; fractional delays are the
//! job of the analytic effective-channel builder.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::config::OtfsConfig;
use crate::error::{Error, Result};
use crate::grid::TdSequence;

/// Tolerance for treating normalized delays/Dopplers as integers.
pub const INTEGER_TAP_TOL: f64 = 1e-9;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    /// Complex gain `h_i`.
    pub gain: Complex64,
    /// Delay `tau_i` in seconds, non-negative.
    pub delay: f64,
    /// Doppler shift `nu_i` in Hz (may be negative).
    pub doppler: f64,
}

/// A multipath channel with declared delay/Doppler bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSpecJson", into = "ChannelSpecJson")]
pub struct ChannelSpec {
    paths: Vec<PathSpec>,
    tau_max: f64,
    nu_max: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSpecJson {
    gain_re: f64,
    gain_im: f64,
    tau: f64,
    nu: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSpecJson {
    paths: Vec<PathSpecJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu_max: Option<f64>,
}

impl TryFrom<ChannelSpecJson> for ChannelSpec {
    type Error = Error;

    fn try_from(raw: ChannelSpecJson) -> Result<Self> {
        let paths = raw
            .paths
            .into_iter()
            .map(|p| PathSpec {
                gain: Complex64::new(p.gain_re, p.gain_im),
                delay: p.tau,
                doppler: p.nu,
            })
            .collect();
        ChannelSpec::new(paths, raw.tau_max, raw.nu_max)
    }
}

impl From<ChannelSpec> for ChannelSpecJson {
    fn from(ch: ChannelSpec) -> Self {
        ChannelSpecJson {
            paths: ch
                .paths
                .iter()
                .map(|p| PathSpecJson {
                    gain_re: p.gain.re,
                    gain_im: p.gain.im,
                    tau: p.delay,
                    nu: p.doppler,
                })
                .collect(),
            tau_max: Some(ch.tau_max),
            nu_max: Some(ch.nu_max),
        }
    }
}

impl ChannelSpec {
    /// Builds a channel, deriving `tau_max`/`nu_max` from the paths when
    /// not given. An empty path list is a valid (all-zero) channel.
    pub fn new(paths: Vec<PathSpec>, tau_max: Option<f64>, nu_max: Option<f64>) -> Result<Self> {
        let derived_tau = paths.iter().map(|p| p.delay).fold(0.0, f64::max);
        let derived_nu = paths.iter().map(|p| p.doppler.abs()).fold(0.0, f64::max);
        let tau_max = tau_max.unwrap_or(derived_tau);
        let nu_max = nu_max.unwrap_or(derived_nu);
        for (i, p) in paths.iter().enumerate() {
            if !p.gain.re.is_finite() || !p.gain.im.is_finite() {
                return Err(Error::PathOutOfRange {
                    path: i,
                    detail: format!("non-finite gain {}", p.gain),
                });
            }
            if !(0.0..=tau_max).contains(&p.delay) || !p.delay.is_finite() {
                return Err(Error::PathOutOfRange {
                    path: i,
                    detail: format!("delay {} outside [0, tau_max = {tau_max}]", p.delay),
                });
            }
            if p.doppler.abs() > nu_max || !p.doppler.is_finite() {
                return Err(Error::PathOutOfRange {
                    path: i,
                    detail: format!("doppler {} outside [-{nu_max}, {nu_max}]", p.doppler),
                });
            }
        }
        Ok(ChannelSpec {
            paths,
            tau_max,
            nu_max,
        })
    }

    /// Channel whose taps are given on the normalized delay-Doppler grid of
    /// `cfg`: each `(l, k, gain)` becomes `tau = l / (M delta_f)`,
    /// `nu = k / (N T)`. Fractional `l`/`k` are allowed.
    pub fn from_normalized_taps(cfg: &OtfsConfig, taps: &[(f64, f64, Complex64)]) -> Result<Self> {
        let paths = taps
            .iter()
            .map(|&(l, k, gain)| PathSpec {
                gain,
                delay: l / (cfg.m as f64 * cfg.delta_f),
                doppler: k / (cfg.n as f64 * cfg.slot_duration),
            })
            .collect();
        ChannelSpec::new(paths, None, None)
    }

    /// Named demo presets. `"evA-like-3path"` is a three-tap profile with
    /// EVA-inspired power decay (0, -1.5, -3.4 dB), on-grid delays 0..2 and
    /// Dopplers {0, +1, -1} bins; requires `M >= 3` and `N >= 2`.
    pub fn preset(name: &str, cfg: &OtfsConfig) -> Result<Self> {
        match name {
            "evA-like-3path" => {
                if cfg.m < 3 || cfg.n < 2 {
                    return Err(Error::InvalidConfig(
                        "evA-like-3path needs M >= 3 and N >= 2".into(),
                    ));
                }
                let amps = [1.0, 10f64.powf(-1.5 / 20.0), 10f64.powf(-3.4 / 20.0)];
                let total: f64 = amps.iter().map(|a| a * a).sum();
                let scale = 1.0 / total.sqrt();
                let phases = [0.0, TAU * 0.3, TAU * 0.65];
                let taps: Vec<(f64, f64, Complex64)> = [(0.0, 0.0), (1.0, 1.0), (2.0, -1.0)]
                    .iter()
                    .enumerate()
                    .map(|(i, &(l, k))| {
                        (l, k, Complex64::from_polar(amps[i] * scale, phases[i]))
                    })
                    .collect();
                ChannelSpec::from_normalized_taps(cfg, &taps)
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Parses the JSON form: `{"paths":[{"gain_re":..,"gain_im":..,"tau":..,
    /// "nu":..},...]}` with optional `tau_max`/`nu_max`. Unknown keys are
    /// rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Serializes to the JSON form accepted by [`ChannelSpec::from_json`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serialization cannot fail")
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_max
    }
}

/// A path expressed on the delay-Doppler grid of a particular frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPath {
    /// Complex gain `h_i`.
    pub gain: Complex64,
    /// Normalized delay `l_i = tau_i M delta_f` (delay bins, may be
    /// fractional).
    pub l: f64,
    /// Normalized Doppler `k_i = nu_i N T` (Doppler bins, may be fractional
    /// and negative).
    pub k: f64,
    /// Delay in samples at the oversampled rate, `tau_i M Q delta_f`.
    pub delay_samples: f64,
    /// True when the delay lands on the sample grid within tolerance.
    pub integer_delay: bool,
    /// True when the Doppler lands on the Doppler grid within tolerance.
    pub integer_doppler: bool,
}

/// Expresses every path of `ch` on the grid of `cfg`.
///
/// Errors when a normalized delay falls outside `[0, M)`.
pub fn normalize(ch: &ChannelSpec, cfg: &OtfsConfig) -> Result<Vec<NormalizedPath>> {
    ch.paths()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l = p.delay * cfg.m as f64 * cfg.delta_f;
            let k = p.doppler * cfg.n as f64 * cfg.slot_duration;
            if !(0.0..cfg.m as f64).contains(&l) {
                return Err(Error::PathOutOfRange {
                    path: i,
                    detail: format!("normalized delay {l} outside [0, M = {})", cfg.m),
                });
            }
            let delay_samples = l * cfg.oversampling as f64;
            Ok(NormalizedPath {
                gain: p.gain,
                l,
                k,
                delay_samples,
                integer_delay: (delay_samples - delay_samples.round()).abs() <= INTEGER_TAP_TOL,
                integer_doppler: (k - k.round()).abs() <= INTEGER_TAP_TOL,
            })
        })
        .collect()
}

/// Smallest cyclic prefix covering the channel's declared delay spread,
/// `ceil(tau_max M Q delta_f)` samples.
pub fn default_cp_len(ch: &ChannelSpec, cfg: &OtfsConfig) -> usize {
    let samples = ch.tau_max() * cfg.sample_rate();
    (samples - INTEGER_TAP_TOL).ceil().max(0.0) as usize
}

/// Passes a transmitted frame through the channel.
///
/// Requires every path delay to be an integer number of samples and the
/// sequence's cyclic prefix to cover the longest delay, so that the frame
/// body sees a cyclically extended transmit signal. Samples before the
/// start of the sequence are zero (the transmitter was silent). Output
/// length, sample rate, and prefix layout match the input.
pub fn apply_channel(
    s: &TdSequence,
    ch: &ChannelSpec,
    cfg: &OtfsConfig,
    frame_start_time: f64,
) -> Result<TdSequence> {
    let paths = normalize(ch, cfg)?;
    let mut taps = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        if !p.integer_delay {
            return Err(Error::FractionalSampleDelay {
                path: i,
                delay_samples: p.delay_samples,
                tol: INTEGER_TAP_TOL,
            });
        }
        let d = p.delay_samples.round() as usize;
        if d > s.cp.cp_len() {
            return Err(Error::CpTooShort {
                cp_len: s.cp.cp_len(),
                max_delay_samples: d,
            });
        }
        taps.push((d, ch.paths()[i].gain, ch.paths()[i].doppler, ch.paths()[i].delay));
    }
    let mut out = vec![Complex64::default(); s.samples.len()];
    for (d, gain, doppler, delay) in taps {
        for (idx, r) in out.iter_mut().enumerate() {
            if idx < d {
                continue;
            }
            let x = s.samples[idx - d];
            if x == Complex64::default() {
                continue;
            }
            let t = frame_start_time + s.sample_time(idx);
            let phase = TAU * doppler * (t - delay);
            *r += gain * x * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(TdSequence {
        samples: out,
        sample_rate: s.sample_rate,
        cp: s.cp,
    })
}

/// Adds circularly symmetric complex Gaussian noise of total variance
/// `sigma2` per sample, drawn from a ChaCha stream seeded with `seed`.
/// The same seed always reproduces the same noise; `sigma2 = 0` returns
/// the input unchanged.
pub fn add_awgn(s: &TdSequence, sigma2: f64, seed: u64) -> TdSequence {
    assert!(sigma2 >= 0.0, "noise variance must be non-negative");
    if sigma2 == 0.0 {
        return s.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (sigma2 / 2.0).sqrt()).expect("valid std dev");
    let samples = s
        .samples
        .iter()
        .map(|&x| x + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    TdSequence {
        samples,
        sample_rate: s.sample_rate,
        cp: s.cp,
    }
}
