//! OTFS baseband simulation library.
//!
//! Orthogonal time frequency space (OTFS) modulation multiplexes
//! information symbols on a delay-Doppler grid, where a doubly dispersive
//! (time-varying multipath) channel acts as a quasi-stationary 2D
//! convolution. This crate implements two transceiver realizations that
//! are numerically equivalent for rectangular filters at critical
//! sampling:
//!
//! * an SFFT-based chain: ISFFT to the time-frequency plane followed by a
//!   multicarrier (Heisenberg) modulator, with the matched filter bank and
//!   SFFT at the receiver;
//! * a discrete-Zak-transform chain that maps the delay-Doppler grid
//!   straight to the time domain.
//!
//! Around the modems sit a sampled linear time-varying channel with
//! deterministic AWGN, analytic effective-channel construction in the
//! delay-Doppler domain (including fractional Doppler/delay), an
//! independent CP-OFDM reference, Gray-mapped constellations with an MMSE
//! equalizer, and a reproducible experiment harness.
//!
//! ```
//! use otfs::config::OtfsConfig;
//! use otfs::modem::{sfft_modulate, sfft_demodulate, CpPolicy};
//! use otfs::pulses::Pulse;
//! use otfs::grid::DdGrid;
//! use num_complex::Complex64;
//!
//! let cfg = OtfsConfig::new(16, 8, 15e3).unwrap();
//! let pulse = Pulse::rectangular(cfg.slot_duration);
//! let x = DdGrid::impulse(16, 8, 3, 2);
//! let tx = sfft_modulate(&x, &pulse, &cfg, CpPolicy::WholeFrame).unwrap();
//! let y = sfft_demodulate(&tx, &pulse, &cfg).unwrap();
//! assert!(y.max_abs_diff(&x) < 1e-10);
//! ```

pub mod acceptance;
pub mod channel;
pub mod config;
pub mod detection;
pub mod effective;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod modem;
pub mod pulses;
pub mod transforms;

pub use error::{Error, Result};
