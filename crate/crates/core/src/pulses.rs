//! Transmit/receive pulse shapes and their ambiguity functions.
//!
//! The pulse family is a unit-energy rectangle on `[0, T)` (causal) and a
//! raised-cosine-windowed rectangle `rc:<beta>` with roll-off
//! `beta in [0, 1]` on the same support; `rc:0` coincides with the
//! rectangle. The cross-ambiguity function
//!
//! ```text
//! A(tau, nu) = integral g_tx(t) g_rx*(t - tau) e^{-j2pi nu (t - tau)} dt
//! ```
//!
//! is evaluated in closed form for rectangular pulses and by composite
//! trapezoid quadrature otherwise. [`sampled_cross_ambiguity`] is the
//! sample-grid counterpart that matches the critically sampled modem
//! chains term for term; it converges to [`ambiguity`] as the oversampling
//! factor grows.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::config::OtfsConfig;
use crate::error::{Error, Result};
use crate::grid::DdGrid;
use crate::transforms::dzt;

/// Quadrature step divisor: the midpoint step is `duration / QUAD_DIVISOR`.
///
/// Fine enough that the quadrature error stays below 1e-10 for the Doppler
/// range `|nu| <= 2/T` exercised by the tests, and at least as fine as
/// `T / (64 M)` for every supported frame size `M <= 4096`.
pub const QUAD_DIVISOR: usize = 1 << 18;

/// Tolerance for treating a delay as an integer number of samples.
pub const INTEGER_SAMPLE_TOL: f64 = 1e-9;

/// Pulse shape selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Unit-energy rectangle, `1/sqrt(T)` on `[0, T)`.
    Rectangular,
    /// Rectangle windowed by a raised-cosine (Tukey) taper of roll-off
    /// `beta`, renormalized to unit energy.
    RaisedCosineRect { beta: f64 },
}

/// A real, causal, unit-energy pulse supported on `[0, duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    shape: PulseShape,
    duration: f64,
}

impl Pulse {
    /// Rectangular pulse of the given duration (seconds).
    pub fn rectangular(duration: f64) -> Self {
        Pulse {
            shape: PulseShape::Rectangular,
            duration,
        }
    }

    /// Raised-cosine-windowed rectangle with roll-off `beta in [0, 1]`.
    pub fn raised_cosine(duration: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(Error::UnknownPulse(format!("rc:{beta}")));
        }
        Ok(Pulse {
            shape: PulseShape::RaisedCosineRect { beta },
            duration,
        })
    }

    /// Parses a pulse descriptor: `"rect"` or `"rc:<beta>"`.
    pub fn parse(descriptor: &str, duration: f64) -> Result<Self> {
        if descriptor == "rect" {
            return Ok(Pulse::rectangular(duration));
        }
        if let Some(rest) = descriptor.strip_prefix("rc:") {
            let beta: f64 = rest
                .parse()
                .map_err(|_| Error::UnknownPulse(descriptor.to_string()))?;
            return Pulse::raised_cosine(duration, beta);
        }
        Err(Error::UnknownPulse(descriptor.to_string()))
    }

    /// Descriptor string round-tripping through [`Pulse::parse`].
    pub fn descriptor(&self) -> String {
        match self.shape {
            PulseShape::Rectangular => "rect".to_string(),
            PulseShape::RaisedCosineRect { beta } => format!("rc:{beta}"),
        }
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    /// Support length in seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// True for the plain rectangle (including `rc:0`).
    pub fn is_rectangular(&self) -> bool {
        match self.shape {
            PulseShape::Rectangular => true,
            PulseShape::RaisedCosineRect { beta } => beta == 0.0,
        }
    }

    /// Pulse amplitude at time `t` seconds; zero outside `[0, duration)`.
    pub fn amplitude(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.duration {
            return 0.0;
        }
        match self.shape {
            PulseShape::Rectangular => 1.0 / self.duration.sqrt(),
            PulseShape::RaisedCosineRect { beta } => {
                // Unit-energy Tukey-windowed rectangle: the taper occupies
                // beta*T/2 at each edge and the window energy is
                // T * (1 - 5 beta / 8).
                let scale = 1.0 / (self.duration * (1.0 - 0.625 * beta)).sqrt();
                let taper = 0.5 * beta * self.duration;
                let w = if taper == 0.0 {
                    1.0
                } else if t < taper {
                    0.5 * (1.0 + (std::f64::consts::PI * (t / taper - 1.0)).cos())
                } else if t > self.duration - taper {
                    let u = self.duration - t;
                    0.5 * (1.0 + (std::f64::consts::PI * (u / taper - 1.0)).cos())
                } else {
                    1.0
                };
                scale * w
            }
        }
    }
}

// ----------------------------------------------------------------------
// Sampling
// ----------------------------------------------------------------------

/// Normalization constant making the sampled energy `sum g^2 * ts` equal 1.
fn sampled_energy_norm(g: &Pulse, count: usize, ts: f64) -> f64 {
    let energy: f64 = (0..count)
        .map(|q| {
            let a = g.amplitude(q as f64 * ts);
            a * a * ts
        })
        .sum();
    1.0 / energy.sqrt()
}

/// Samples one slot of the pulse at the oversampled rate: `g(q T / (M Q))`
/// for `q = 0 .. M*Q`, rescaled so the discrete energy
/// `sum |.|^2 / (M Q delta_f)` equals 1 exactly.
pub fn sample_pulse(g: &Pulse, cfg: &OtfsConfig) -> Vec<f64> {
    let count = cfg.samples_per_slot();
    let ts = cfg.sample_period();
    let c = sampled_energy_norm(g, count, ts);
    (0..count).map(|q| c * g.amplitude(q as f64 * ts)).collect()
}

/// Dimensionless per-sample filter weights used by the modulator and
/// demodulator: [`sample_pulse`] scaled by `sqrt(T / M)`.
///
/// A rectangular pulse yields the constant `1/sqrt(M)` at every
/// oversampling factor, which makes the critically sampled chain unitary.
pub fn modem_weights(g: &Pulse, cfg: &OtfsConfig) -> Vec<f64> {
    let scale = (cfg.slot_duration / cfg.m as f64).sqrt();
    sample_pulse(g, cfg).into_iter().map(|v| v * scale).collect()
}

/// Zak-domain image of a pulse: the discrete Zak transform of its
/// MN-periodic extension sampled at the critical rate `M / T`, with the
/// samples carrying the same `sqrt(T / M)` scaling as [`modem_weights`] so
/// one period has unit energy.
///
/// Rectangular pulses give the constant grid `1/sqrt(M N)`.
pub fn pulse_dzt(g: &Pulse, cfg: &OtfsConfig) -> DdGrid {
    let m = cfg.m;
    let n = cfg.n;
    let ts = cfg.slot_duration / m as f64;
    let c = sampled_energy_norm(g, m, ts) * ts.sqrt();
    // One period of the periodic extension; the pulse support lies inside
    // [0, N T) so no wrap-around folding occurs for this family.
    let extended: Vec<Complex64> = (0..m * n)
        .map(|j| Complex64::new(c * g.amplitude(j as f64 * ts), 0.0))
        .collect();
    dzt(&extended, m, n)
}

// ----------------------------------------------------------------------
// Ambiguity functions
// ----------------------------------------------------------------------

/// Cross-ambiguity `A(tau, nu)` of the analog pulses.
///
/// Uses the exact closed form when both pulses are rectangular and
/// composite midpoint quadrature (step `duration / QUAD_DIVISOR`)
/// otherwise. Matched unit-energy pulses satisfy `A(0, 0) = 1` and
/// `|A| <= 1` everywhere.
pub fn ambiguity(g_tx: &Pulse, g_rx: &Pulse, tau: f64, nu: f64) -> Complex64 {
    // Substituting u = t - tau:
    //   A(tau, nu) = integral g_tx(u + tau) g_rx(u) e^{-j2pi nu u} du
    // with overlap u in [max(0, -tau), min(T_rx, T_tx - tau)].
    let lo = 0.0f64.max(-tau);
    let hi = g_rx.duration().min(g_tx.duration() - tau);
    if hi <= lo {
        return Complex64::default();
    }
    if g_tx.is_rectangular() && g_rx.is_rectangular() {
        let amp = 1.0 / (g_tx.duration() * g_rx.duration()).sqrt();
        return rect_segment_integral(lo, hi, nu) * amp;
    }
    ambiguity_by_quadrature(g_tx, g_rx, tau, nu)
}

/// Composite midpoint evaluation of the ambiguity integral; used by
/// [`ambiguity`] for non-rectangular pulses and by cross-validation tests.
///
/// The midpoint rule never evaluates the integrand at the overlap
/// boundaries, where the half-open pulse supports would truncate the
/// one-sided limit and bias the sum by `O(step)`.
pub(crate) fn ambiguity_by_quadrature(
    g_tx: &Pulse,
    g_rx: &Pulse,
    tau: f64,
    nu: f64,
) -> Complex64 {
    let lo = 0.0f64.max(-tau);
    let hi = g_rx.duration().min(g_tx.duration() - tau);
    if hi <= lo {
        return Complex64::default();
    }
    let step_target = g_tx.duration().min(g_rx.duration()) / QUAD_DIVISOR as f64;
    let steps = ((hi - lo) / step_target).ceil().max(1.0) as usize;
    let h = (hi - lo) / steps as f64;
    let mut acc = Complex64::default();
    for i in 0..steps {
        let u = lo + (i as f64 + 0.5) * h;
        let a = g_tx.amplitude(u + tau) * g_rx.amplitude(u);
        if a != 0.0 {
            acc += Complex64::from_polar(a, -TAU * nu * u);
        }
    }
    acc * h
}

/// Exact `integral_{lo}^{hi} e^{-j2pi nu u} du`.
fn rect_segment_integral(lo: f64, hi: f64, nu: f64) -> Complex64 {
    let len = hi - lo;
    if (nu * len).abs() < 1e-12 {
        // Essentially constant phase across the segment.
        return Complex64::from_polar(len, -std::f64::consts::PI * nu * (lo + hi));
    }
    let a = Complex64::from_polar(1.0, -TAU * nu * lo);
    let b = Complex64::from_polar(1.0, -TAU * nu * hi);
    (a - b) / Complex64::new(0.0, TAU * nu)
}

/// Sample-grid cross-ambiguity consistent with the discrete modem chains:
///
/// ```text
/// A_s(tau, nu) = ts * c_tx * c_rx * sum_q g_tx(q ts + tau) g_rx(q ts) e^{-j2pi nu q ts}
/// ```
///
/// where `ts` is the frame sample period, `q` runs over one slot, and
/// `c_tx`, `c_rx` are the [`sample_pulse`] energy normalizations. Delays
/// within [`INTEGER_SAMPLE_TOL`] of a whole number of samples are snapped
/// onto the grid so the sum reproduces the chain's filter taps exactly.
pub fn sampled_cross_ambiguity(
    g_tx: &Pulse,
    g_rx: &Pulse,
    tau: f64,
    nu: f64,
    cfg: &OtfsConfig,
) -> Complex64 {
    let ts = cfg.sample_period();
    let count = cfg.samples_per_slot();
    let c_tx = sampled_energy_norm(g_tx, count, ts);
    let c_rx = sampled_energy_norm(g_rx, count, ts);
    let d = tau / ts;
    let d_round = d.round();
    let mut acc = Complex64::default();
    if (d - d_round).abs() <= INTEGER_SAMPLE_TOL {
        let shift = d_round as i64;
        for q in 0..count as i64 {
            let tx_idx = q + shift;
            if tx_idx < 0 || tx_idx >= count as i64 {
                continue;
            }
            let a = g_tx.amplitude(tx_idx as f64 * ts) * g_rx.amplitude(q as f64 * ts);
            if a != 0.0 {
                acc += Complex64::from_polar(a, -TAU * nu * q as f64 * ts);
            }
        }
    } else {
        for q in 0..count {
            let u = q as f64 * ts;
            let a = g_tx.amplitude(u + tau) * g_rx.amplitude(u);
            if a != 0.0 {
                acc += Complex64::from_polar(a, -TAU * nu * u);
            }
        }
    }
    acc * (ts * c_tx * c_rx)
}
