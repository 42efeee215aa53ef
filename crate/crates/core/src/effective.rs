//! Analytic delay-Doppler input-output models of the end-to-end link.
//!
//! After modulation, channel, and demodulation, the noiseless link is one
//! linear operator on the delay-Doppler grid:
//!
//! ```text
//! Y[l, k] = sum_{l', k'} H[l, k, l', k'] X[l', k']
//! ```
//!
//! This module constructs that operator three independent ways so they
//! can be checked against each other:
//!
//! * [`probe_operator`] extracts the ground truth by brute force — it
//!   feeds every unit impulse through the full simulated chain and
//!   records the responses as operator columns;
//! * [`build_analytic`] evaluates the general analytic model, a double
//!   sum of cross-ambiguity terms ([`sampling_function`]) weighted per
//!   path by `h_i e^{-j 2 pi nu_i tau_i}` — valid for any filters and
//!   fractional delay/Doppler;
//! * [`closed_form_io`] applies the special case for rectangular filters
//!   and on-grid paths: a 2D circular shift masked by the unit-modulus
//!   [`phase_rotation`].
//!
//! The ambiguity terms inside [`sampling_function`] are evaluated on the
//! receiver's sample grid ([`sampled_cross_ambiguity`]) rather than as
//! continuous-time integrals: the operator being modeled is the discrete
//! chain, and the continuous integral differs from the sample sum by a
//! first-order discretization bias that fractional Doppler exposes at
//! the percent level on small grids.
//!
//! Index conventions: grids are delay-major, so the flattened operator
//! indexes rows by `l N + k` and columns by `l' N + k'`, matching
//! [`DdGrid`]'s memory layout — applying the operator is a plain
//! matrix-vector product on grid data.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use crate::channel::{apply_channel, normalize, ChannelSpec};
use crate::config::OtfsConfig;
use crate::error::{Error, Result};
use crate::grid::{read_complex_matrix, write_complex_matrix, DdGrid};
use crate::modem::{demodulate, modulate, ModemArch};
use crate::pulses::{sampled_cross_ambiguity, Pulse};

/// Grid-size budget (`M N`) above which [`build_analytic`] logs a
/// warning: tensor assembly is quartic in the grid size, and probing the
/// simulated chain scales far better for large frames.
pub const ANALYTIC_BUDGET: usize = 256;

fn cis(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

// ----------------------------------------------------------------------
// Operator container
// ----------------------------------------------------------------------

/// Dense linear operator on a flattened `M x N` delay-Doppler grid.
///
/// Entry `(l, k, l', k')` of the four-index tensor lives at row
/// `l N + k`, column `l' N + k'` of an `MN x MN` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl EffectiveChannel {
    /// All-zero operator for an `m x n` grid.
    pub fn zeros(m: usize, n: usize) -> Self {
        EffectiveChannel {
            m,
            n,
            data: vec![Complex64::default(); (m * n) * (m * n)],
        }
    }

    /// Identity operator for an `m x n` grid.
    pub fn identity(m: usize, n: usize) -> Self {
        let mut h = Self::zeros(m, n);
        let size = m * n;
        for i in 0..size {
            h.data[i * size + i] = Complex64::new(1.0, 0.0);
        }
        h
    }

    /// Grid shape `(M, N)` the operator acts on.
    pub fn grid_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Flattened side length `M N`.
    pub fn size(&self) -> usize {
        self.m * self.n
    }

    /// Matrix entry at `(row, col)` of the flattened view.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.size() + col]
    }

    /// Tensor entry `H[l, k, l', k']`.
    pub fn h(&self, l: usize, k: usize, lp: usize, kp: usize) -> Complex64 {
        self.entry(l * self.n + k, lp * self.n + kp)
    }

    /// Mutable tensor entry `H[l, k, l', k']`.
    pub fn h_mut(&mut self, l: usize, k: usize, lp: usize, kp: usize) -> &mut Complex64 {
        let (row, col) = (l * self.n + k, lp * self.n + kp);
        let size = self.size();
        &mut self.data[row * size + col]
    }

    /// Row-major flattened matrix data.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Applies the operator: `Y[l,k] = sum H[l,k,l',k'] X[l',k']`.
    pub fn apply(&self, x: &DdGrid) -> Result<DdGrid> {
        if x.dims() != (self.m, self.n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} delay-Doppler grid", self.m, self.n),
                got: format!("{}x{}", x.rows(), x.cols()),
            });
        }
        let size = self.size();
        let xv = x.data();
        let mut y = vec![Complex64::default(); size];
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for (col, xc) in xv.iter().enumerate() {
                acc += self.data[row * size + col] * xc;
            }
            *out = acc;
        }
        DdGrid::from_data(self.m, self.n, y)
    }

    /// Frobenius norm of the flattened matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - other||_F / ||other||_F`; absolute norm when `other` is
    /// zero. Panics on shape mismatch.
    pub fn rel_frobenius_error(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.m, self.n),
            (other.m, other.n),
            "operator shapes differ"
        );
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let denom = other.frobenius_norm();
        if denom == 0.0 {
            diff
        } else {
            diff / denom
        }
    }

    /// Largest entry-wise deviation from `other`. Panics on shape
    /// mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.m, self.n),
            (other.m, other.n),
            "operator shapes differ"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Serializes the flattened matrix in the binary grid format.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        write_complex_matrix(w, self.size(), self.size(), &self.data)
    }

    /// Reads an operator back from the binary grid format; the grid
    /// shape `(m, n)` must multiply to the stored side length.
    pub fn read_from(r: &mut impl Read, m: usize, n: usize) -> Result<Self> {
        let (rows, cols, data) = read_complex_matrix(r)?;
        if rows != m * n || cols != m * n {
            return Err(Error::BadGridFile(format!(
                "expected {0}x{0} operator for a {m}x{n} grid, file holds {rows}x{cols}",
                m * n
            )));
        }
        Ok(EffectiveChannel { m, n, data })
    }
}

// ----------------------------------------------------------------------
// Probing oracle
// ----------------------------------------------------------------------

/// Extracts the exact end-to-end operator of the simulated chain by
/// probing: every unit-impulse grid is modulated, passed through the
/// channel (`None` for a direct wire), and demodulated; the responses
/// form the operator columns. Noise-free by construction.
pub fn probe_operator(
    arch: ModemArch,
    ch: Option<&ChannelSpec>,
    g_tx: &Pulse,
    g_rx: &Pulse,
    cfg: &OtfsConfig,
) -> Result<EffectiveChannel> {
    let (m, n) = (cfg.m, cfg.n);
    let size = m * n;
    let mut h = EffectiveChannel::zeros(m, n);
    for col in 0..size {
        let x = DdGrid::impulse(m, n, col / n, col % n);
        let s = modulate(arch, &x, g_tx, cfg)?;
        let r = match ch {
            Some(spec) => apply_channel(&s, spec, cfg, 0.0)?,
            None => s,
        };
        let y = demodulate(arch, &r, g_rx, cfg)?;
        for (row, v) in y.data().iter().enumerate() {
            h.data[row * size + col] = *v;
        }
    }
    Ok(h)
}

// ----------------------------------------------------------------------
// General analytic model
// ----------------------------------------------------------------------

/// Per-path precomputation for the analytic sampling function.
///
/// The double sum over subcarrier pairs `(m, m')` only sees the path
/// through the cross-ambiguity at subcarrier offset `mu = m - m'`, so
/// each path needs just `2M - 1` ambiguity values per term:
///
/// ```text
/// main[mu] = A_s(-tau_i,     mu df - nu_i)    (body of the frame)
/// wrap[mu] = A_s(T - tau_i,  mu df - nu_i)    (tail wrapped by the CP)
/// ```
///
/// From those, the `(m, m')` sums collapse to per-`(l, l')` tables and
/// the slot sum to a per-`(k, k')` table, making tensor assembly O(1)
/// per entry.
struct PathTables {
    n: usize,
    /// `sum_{m, m'} main[m - m'] e^{+j 2 pi (m l - m'(l' + l_i)) / M}`.
    u_main: Vec<Complex64>,
    /// Same contraction of the wrapped-tail terms.
    u_wrap: Vec<Complex64>,
    /// `sum_n e^{-j 2 pi n (k - k' - k_i) / N}` per `(k, k')`.
    s_slot: Vec<Complex64>,
    /// `1 / (N M)` model normalization.
    scale: f64,
}

impl PathTables {
    fn new(l_i: f64, k_i: f64, g_tx: &Pulse, g_rx: &Pulse, cfg: &OtfsConfig) -> Self {
        let (m, n) = (cfg.m, cfg.n);
        let tau = l_i * cfg.slot_duration / m as f64;
        let nu = k_i / (n as f64 * cfg.slot_duration);
        let df = cfg.delta_f;

        // Ambiguity tables over subcarrier offsets mu = m - m'.
        let mut main = vec![Complex64::default(); 2 * m - 1];
        let mut wrap = vec![Complex64::default(); 2 * m - 1];
        for mu in -(m as i64 - 1)..=(m as i64 - 1) {
            let f = mu as f64 * df - nu;
            let idx = (mu + m as i64 - 1) as usize;
            main[idx] = sampled_cross_ambiguity(g_tx, g_rx, -tau, f, cfg);
            wrap[idx] = sampled_cross_ambiguity(g_tx, g_rx, cfg.slot_duration - tau, f, cfg);
        }

        // Split l_i and k_i into integer and fractional parts so phase
        // arguments stay small and exactly reduced for on-grid paths.
        let li_floor = l_i.floor();
        let li_frac = l_i - li_floor;
        let li_int = li_floor as i64;
        let ki_floor = k_i.floor();
        let ki_frac = k_i - ki_floor;
        let ki_int = ki_floor as i64;

        let contract = |table: &[Complex64]| -> Vec<Complex64> {
            let mut u = vec![Complex64::default(); m * m];
            for l in 0..m as i64 {
                for lp in 0..m as i64 {
                    let mut acc = Complex64::default();
                    for mm in 0..m as i64 {
                        for mp in 0..m as i64 {
                            let turns = (mm * l - mp * (lp + li_int)).rem_euclid(m as i64);
                            let angle =
                                TAU * (turns as f64 - mp as f64 * li_frac) / m as f64;
                            acc += table[(mm - mp + m as i64 - 1) as usize] * cis(angle);
                        }
                    }
                    u[(l * m as i64 + lp) as usize] = acc;
                }
            }
            u
        };
        let u_main = contract(&main);
        let u_wrap = contract(&wrap);

        let mut s_slot = vec![Complex64::default(); n * n];
        for k in 0..n as i64 {
            for kp in 0..n as i64 {
                let delta = k - kp - ki_int;
                let mut acc = Complex64::default();
                for nn in 0..n as i64 {
                    let turns = (nn * delta).rem_euclid(n as i64);
                    let angle = -TAU * (turns as f64 - nn as f64 * ki_frac) / n as f64;
                    acc += cis(angle);
                }
                s_slot[(k * n as i64 + kp) as usize] = acc;
            }
        }

        PathTables {
            n,
            u_main,
            u_wrap,
            s_slot,
            scale: 1.0 / (n * m) as f64,
        }
    }

    /// Sampling-function value `w(l, k, l', k')` for this path.
    fn w(&self, l: usize, k: usize, lp: usize, kp: usize) -> Complex64 {
        let m = self.u_main.len().isqrt();
        let spread = self.u_main[l * m + lp]
            + cis(-TAU * kp as f64 / self.n as f64) * self.u_wrap[l * m + lp];
        self.s_slot[k * self.n + kp] * spread * self.scale
    }
}

/// Evaluates the analytic sampling function `w(l, k, l', k', l_i, k_i)`
/// for one tensor entry: the normalized double sum over slots and
/// subcarrier pairs of two cross-ambiguity terms — the in-frame response
/// at delay `-tau_i` plus the cyclic-prefix wraparound at `T - tau_i`
/// weighted by `e^{-j 2 pi k' / N}` — under the printed phase factors
/// `e^{-j 2 pi n (k - k' - k_i) / N} e^{+j 2 pi (m l - m' l' - m' l_i) / M}`.
///
/// The subcarrier pair sum runs over all `(m, m')` in both terms:
/// restricting the in-frame term to `m' != m` would annihilate the
/// identity channel, which probing the simulated chain rules out.
///
/// `l_i` and `k_i` may be fractional. Off-grid delays vary smoothly
/// between sample boundaries and jump only where the sampled chain
/// itself would reassign a boundary sample: the half-open pulse support
/// puts a delay sitting exactly on a sample instant with the in-frame
/// term, so the model is continuous from below at integer `l_i`.
///
/// Cost is O(M^2 + N + M Q) per call after the per-offset ambiguity
/// table; use [`build_analytic`] for whole tensors — it shares the
/// contraction across entries.
#[allow(clippy::too_many_arguments)]
pub fn sampling_function(
    l: usize,
    k: usize,
    lp: usize,
    kp: usize,
    l_i: f64,
    k_i: f64,
    g_tx: &Pulse,
    g_rx: &Pulse,
    cfg: &OtfsConfig,
) -> Complex64 {
    PathTables::new(l_i, k_i, g_tx, g_rx, cfg).w(l, k, lp, kp)
}

/// Builds the effective operator from the analytic model:
///
/// ```text
/// H[l, k, l', k'] = sum_i h_i w(l, k, l', k', l_i, k_i) e^{-j 2 pi nu_i tau_i}
/// ```
///
/// Handles fractional delay and Doppler and arbitrary filters. Logs a
/// warning above the [`ANALYTIC_BUDGET`] grid size — probing scales
/// better for large frames.
pub fn build_analytic(
    ch: &ChannelSpec,
    g_tx: &Pulse,
    g_rx: &Pulse,
    cfg: &OtfsConfig,
) -> Result<EffectiveChannel> {
    let (m, n) = (cfg.m, cfg.n);
    if m * n > ANALYTIC_BUDGET {
        log::warn!(
            "analytic tensor at M N = {} exceeds the {} budget; consider probe_operator",
            m * n,
            ANALYTIC_BUDGET
        );
    }
    let mut h = EffectiveChannel::zeros(m, n);
    for path in normalize(ch, cfg)? {
        let tables = PathTables::new(path.l, path.k, g_tx, g_rx, cfg);
        // e^{-j 2 pi nu_i tau_i} on the Doppler-delay product, expressed
        // in grid units: nu_i tau_i = k_i l_i / (M N).
        let weight = path.gain * cis(-TAU * path.k * path.l / (m * n) as f64);
        for l in 0..m {
            for k in 0..n {
                for lp in 0..m {
                    for kp in 0..n {
                        *h.h_mut(l, k, lp, kp) += weight * tables.w(l, k, lp, kp);
                    }
                }
            }
        }
    }
    Ok(h)
}

// ----------------------------------------------------------------------
// Integer/rectangular closed form
// ----------------------------------------------------------------------

/// Unit-modulus phase mask of the on-grid circular-shift model:
///
/// ```text
/// alpha = e^{+j 2 pi (l - l_i)_M k_i / (M N)}                          l >= l_i
/// alpha = e^{+j 2 pi [(l - l_i)_M k_i - k_i M - (k - k_i)_N M] / (M N)}  l < l_i
/// ```
///
/// The lower branch carries the extra Doppler wind-up a path picks up
/// when its delayed copy wraps around the frame boundary.
///
/// `l_i` must lie in `[0, M)`; `k_i` may be any integer (negative for
/// approaching scatterers).
pub fn phase_rotation(l: usize, k: usize, l_i: i64, k_i: i64, cfg: &OtfsConfig) -> Complex64 {
    let (m, n) = (cfg.m as i64, cfg.n as i64);
    assert!(
        (0..m).contains(&l_i),
        "delay tap {l_i} outside [0, {m})"
    );
    let shifted = (l as i64 - l_i).rem_euclid(m);
    let turns = if l as i64 >= l_i {
        shifted * k_i
    } else {
        shifted * k_i - k_i * m - (k as i64 - k_i).rem_euclid(n) * m
    };
    cis(TAU * turns.rem_euclid(m * n) as f64 / (m * n) as f64)
}

/// Applies the closed-form input-output map for rectangular filters and
/// on-grid paths: each path circularly shifts the grid by its delay and
/// Doppler taps and applies the [`phase_rotation`] mask,
///
/// ```text
/// Y[l, k] = sum_i h_i X[(l - l_i)_M, (k - k_i)_N] alpha[l, k, l_i, k_i]
/// ```
///
/// Errors when any path falls off the integer grid.
pub fn closed_form_io(x: &DdGrid, ch: &ChannelSpec, cfg: &OtfsConfig) -> Result<DdGrid> {
    let (m, n) = (cfg.m, cfg.n);
    if x.dims() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{m}x{n} delay-Doppler grid"),
            got: format!("{}x{}", x.rows(), x.cols()),
        });
    }
    let taps = integer_taps(ch, cfg)?;
    let mut y = DdGrid::zeros(m, n);
    for (gain, l_i, k_i) in taps {
        for l in 0..m {
            for k in 0..n {
                let src_l = (l as i64 - l_i).rem_euclid(m as i64) as usize;
                let src_k = (k as i64 - k_i).rem_euclid(n as i64) as usize;
                y[(l, k)] +=
                    gain * x[(src_l, src_k)] * phase_rotation(l, k, l_i, k_i, cfg);
            }
        }
    }
    Ok(y)
}

/// The linear operator implied by [`closed_form_io`]: one shifted,
/// phase-masked diagonal per path.
pub fn closed_form_operator(ch: &ChannelSpec, cfg: &OtfsConfig) -> Result<EffectiveChannel> {
    let (m, n) = (cfg.m, cfg.n);
    let taps = integer_taps(ch, cfg)?;
    let mut h = EffectiveChannel::zeros(m, n);
    for (gain, l_i, k_i) in taps {
        for l in 0..m {
            for k in 0..n {
                let lp = (l as i64 - l_i).rem_euclid(m as i64) as usize;
                let kp = (k as i64 - k_i).rem_euclid(n as i64) as usize;
                *h.h_mut(l, k, lp, kp) += gain * phase_rotation(l, k, l_i, k_i, cfg);
            }
        }
    }
    Ok(h)
}

/// Normalizes and validates that every path sits on the integer grid.
fn integer_taps(ch: &ChannelSpec, cfg: &OtfsConfig) -> Result<Vec<(Complex64, i64, i64)>> {
    normalize(ch, cfg)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            if !p.integer_delay || !p.integer_doppler {
                return Err(Error::FractionalTap {
                    path: i,
                    l_i: p.l,
                    k_i: p.k,
                });
            }
            Ok((p.gain, p.l.round() as i64, p.k.round() as i64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(m: usize, n: usize, cp: usize) -> OtfsConfig {
        let mut c = OtfsConfig::new(m, n, 15e3).unwrap();
        c.cp_len = cp;
        c.validate().unwrap()
    }

    fn rect(cfg: &OtfsConfig) -> Pulse {
        Pulse::rectangular(cfg.slot_duration)
    }

    fn random_grid(m: usize, n: usize, seed: u64) -> DdGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DdGrid::from_fn(m, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    /// Three on-grid taps with distinct delays, Dopplers, and phases.
    fn three_tap_channel(c: &OtfsConfig) -> ChannelSpec {
        ChannelSpec::from_normalized_taps(
            c,
            &[
                (0.0, 0.0, Complex64::new(1.0, 0.0)),
                (1.0, 1.0, Complex64::from_polar(0.5, TAU * 0.15)),
                (2.0, -1.0, Complex64::from_polar(0.25, -TAU * 0.1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn test_probe_without_channel_is_identity() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        for arch in [ModemArch::Sfft, ModemArch::Dzt] {
            let h = probe_operator(arch, None, &g, &g, &c).unwrap();
            let err = h.max_abs_diff(&EffectiveChannel::identity(8, 4));
            assert!(err < 1e-10, "{arch}: deviation from identity {err:e}");
        }
    }

    #[test]
    fn test_probed_operator_reproduces_chain_by_superposition() {
        let c = cfg(8, 4, 3);
        let g = rect(&c);
        let ch = three_tap_channel(&c);
        let h = probe_operator(ModemArch::Sfft, Some(&ch), &g, &g, &c).unwrap();
        let x = random_grid(8, 4, 41);
        let via_matrix = h.apply(&x).unwrap();
        let s = crate::modem::sfft_modulate(&x, &g, &c, crate::modem::CpPolicy::WholeFrame)
            .unwrap();
        let r = apply_channel(&s, &ch, &c, 0.0).unwrap();
        let via_chain = crate::modem::sfft_demodulate(&r, &g, &c).unwrap();
        let err = via_matrix.max_abs_diff(&via_chain);
        assert!(err < 1e-10, "superposition mismatch {err:e}");
    }

    #[test]
    fn test_analytic_identity_path_is_kronecker_delta() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        let ch = ChannelSpec::from_normalized_taps(&c, &[(0.0, 0.0, Complex64::new(1.0, 0.0))])
            .unwrap();
        let h = build_analytic(&ch, &g, &g, &c).unwrap();
        let err = h.max_abs_diff(&EffectiveChannel::identity(8, 4));
        assert!(err < 1e-9, "identity-channel tensor error {err:e}");
    }

    #[test]
    fn test_sampling_function_agrees_with_built_tensor() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        // A single fractional path; the tensor weight divides out exactly.
        let (l_i, k_i) = (1.0, 0.5);
        let ch = ChannelSpec::from_normalized_taps(&c, &[(l_i, k_i, Complex64::new(1.0, 0.0))])
            .unwrap();
        let h = build_analytic(&ch, &g, &g, &c).unwrap();
        let weight = cis(-TAU * k_i * l_i / 32.0);
        for (l, k, lp, kp) in [(0, 0, 0, 0), (3, 2, 1, 3), (7, 1, 5, 0), (2, 3, 2, 3)] {
            let w = sampling_function(l, k, lp, kp, l_i, k_i, &g, &g, &c);
            let d = (h.h(l, k, lp, kp) - weight * w).norm();
            assert!(d < 1e-12, "entry ({l},{k},{lp},{kp}) differs by {d:e}");
        }
    }

    #[test]
    fn test_analytic_matches_probe_for_integer_taps() {
        let c = cfg(8, 4, 3);
        let g = rect(&c);
        let ch = three_tap_channel(&c);
        let probed = probe_operator(ModemArch::Sfft, Some(&ch), &g, &g, &c).unwrap();
        let analytic = build_analytic(&ch, &g, &g, &c).unwrap();
        let err = analytic.rel_frobenius_error(&probed);
        assert!(err < 1e-9, "integer-tap relative Frobenius error {err:e}");
    }

    #[test]
    fn test_analytic_matches_probe_for_fractional_doppler() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        let ch = ChannelSpec::from_normalized_taps(
            &c,
            &[(1.0, 0.5, Complex64::from_polar(0.9, 0.4))],
        )
        .unwrap();
        let probed = probe_operator(ModemArch::Sfft, Some(&ch), &g, &g, &c).unwrap();
        let analytic = build_analytic(&ch, &g, &g, &c).unwrap();
        let err = analytic.rel_frobenius_error(&probed);
        assert!(err < 1e-9, "fractional-Doppler relative error {err:e}");
    }

    #[test]
    fn test_closed_form_operator_closes_the_triangle() {
        // Third side of analytic / probe / closed-form agreement.
        let c = cfg(8, 4, 3);
        let g = rect(&c);
        let ch = three_tap_channel(&c);
        let closed = closed_form_operator(&ch, &c).unwrap();
        let probed = probe_operator(ModemArch::Dzt, Some(&ch), &g, &g, &c).unwrap();
        let err = closed.rel_frobenius_error(&probed);
        assert!(err < 1e-9, "closed-form vs probe error {err:e}");
    }

    #[test]
    fn test_phase_rotation_worked_examples() {
        let c = cfg(4, 4, 0);
        for l in 0..4 {
            for k in 0..4 {
                let a = phase_rotation(l, k, 0, 0, &c);
                assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-15, "zero tap");
            }
        }
        // l = 2, l_i = 1, k_i = 1: top branch, (l - l_i) k_i / (M N) = 1/16.
        let a = phase_rotation(2, 3, 1, 1, &c);
        let expect = cis(TAU / 16.0);
        assert!((a - expect).norm() < 1e-15, "top branch value {a}");
        // Unit modulus everywhere, including the wraparound branch.
        for l in 0..4 {
            for k in 0..4 {
                let a = phase_rotation(l, k, 2, -1, &c);
                assert!((a.norm() - 1.0).abs() < 1e-15, "|alpha| at ({l},{k})");
            }
        }
    }

    #[test]
    fn test_closed_form_identity_and_single_delay_shift() {
        let c = cfg(8, 4, 2);
        let x = random_grid(8, 4, 5);
        let ident =
            ChannelSpec::from_normalized_taps(&c, &[(0.0, 0.0, Complex64::new(1.0, 0.0))])
                .unwrap();
        let y = closed_form_io(&x, &ident, &c).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-15, "identity path must pass through");

        // Pure one-bin delay: plain shift for l >= 1, and a Doppler-index
        // phase on the wrapped row.
        let shift =
            ChannelSpec::from_normalized_taps(&c, &[(1.0, 0.0, Complex64::new(1.0, 0.0))])
                .unwrap();
        let y = closed_form_io(&x, &shift, &c).unwrap();
        for l in 1..8 {
            for k in 0..4 {
                let d = (y[(l, k)] - x[(l - 1, k)]).norm();
                assert!(d < 1e-15, "interior shift at ({l},{k}): {d:e}");
            }
        }
        for k in 0..4 {
            let expect = x[(7, k)] * cis(-TAU * k as f64 / 4.0);
            let d = (y[(0, k)] - expect).norm();
            assert!(d < 1e-15, "wrapped row at k={k}: {d:e}");
        }
    }

    #[test]
    fn test_closed_form_rejects_fractional_taps() {
        let c = cfg(8, 4, 2);
        let x = random_grid(8, 4, 6);
        let ch = ChannelSpec::from_normalized_taps(&c, &[(1.0, 0.5, Complex64::new(1.0, 0.0))])
            .unwrap();
        match closed_form_io(&x, &ch, &c) {
            Err(Error::FractionalTap { path, k_i, .. }) => {
                assert_eq!(path, 0);
                assert!((k_i - 0.5).abs() < 1e-12);
            }
            other => panic!("expected FractionalTap, got {other:?}"),
        }
    }

    #[test]
    fn test_closed_form_matches_both_simulated_chains() {
        let c = cfg(16, 8, 3);
        let g = rect(&c);
        let ch = three_tap_channel(&c);
        let x = random_grid(16, 8, 77);
        let y_model = closed_form_io(&x, &ch, &c).unwrap();
        for arch in [ModemArch::Sfft, ModemArch::Dzt] {
            let s = modulate(arch, &x, &g, &c).unwrap();
            let r = apply_channel(&s, &ch, &c, 0.0).unwrap();
            let y = demodulate(arch, &r, &g, &c).unwrap();
            let err = y.max_abs_diff(&y_model);
            assert!(err < 1e-9, "{arch}: closed form vs chain {err:e}");
        }
    }

    #[test]
    fn test_delay_shift_commutes_with_single_path_channel() {
        // For one path, delay-shifting the input by j delay bins equals
        // delay-shifting the output by j and adjusting the phase mask:
        // Y'[l,k] = Y[(l-j)_M, k] alpha[l,k] / alpha[(l-j)_M, k].
        let c = cfg(8, 4, 3);
        let ch = ChannelSpec::from_normalized_taps(
            &c,
            &[(1.0, 2.0, Complex64::from_polar(0.8, 0.3))],
        )
        .unwrap();
        let x = random_grid(8, 4, 91);
        let j = 3usize;
        let shifted = DdGrid::from_fn(8, 4, |l, k| x[((l + 8 - j) % 8, k)]);
        let y = closed_form_io(&x, &ch, &c).unwrap();
        let y_shifted = closed_form_io(&shifted, &ch, &c).unwrap();
        for l in 0..8 {
            for k in 0..4 {
                let a_here = phase_rotation(l, k, 1, 2, &c);
                let a_there = phase_rotation((l + 8 - j) % 8, k, 1, 2, &c);
                let expect = y[((l + 8 - j) % 8, k)] * a_here / a_there;
                let d = (y_shifted[(l, k)] - expect).norm();
                assert!(d < 1e-12, "commutation at ({l},{k}): {d:e}");
            }
        }
    }

    #[test]
    fn test_fractional_doppler_leaks_across_bins() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        let frac = ChannelSpec::from_normalized_taps(
            &c,
            &[(1.0, 0.5, Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let inter = ChannelSpec::from_normalized_taps(
            &c,
            &[(1.0, 1.0, Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let count_above = |h: &EffectiveChannel, col: usize| {
            (0..h.size())
                .filter(|&row| h.entry(row, col).norm() > 1e-3)
                .count()
        };
        let h_frac = probe_operator(ModemArch::Sfft, Some(&frac), &g, &g, &c).unwrap();
        let h_int = probe_operator(ModemArch::Sfft, Some(&inter), &g, &g, &c).unwrap();
        for col in [0usize, 5, 17] {
            let leaked = count_above(&h_frac, col);
            assert!(
                leaked > 1,
                "fractional Doppler column {col} holds {leaked} significant entries"
            );
            assert_eq!(
                count_above(&h_int, col),
                1,
                "integer Doppler column {col} must stay concentrated"
            );
        }
    }

    #[test]
    fn test_unit_modulus_path_gives_unitary_operator() {
        // One full-strength scatterer only delays and rotates energy, even
        // off the Doppler grid.
        let c = cfg(8, 4, 3);
        let g = rect(&c);
        let ch = ChannelSpec::from_normalized_taps(
            &c,
            &[(2.0, 0.7, Complex64::from_polar(1.0, 1.1))],
        )
        .unwrap();
        let h = probe_operator(ModemArch::Sfft, Some(&ch), &g, &g, &c).unwrap();
        for seed in 0..5u64 {
            let x = random_grid(8, 4, 300 + seed);
            let y = h.apply(&x).unwrap();
            let ratio = y.norm() / x.norm();
            assert!(
                (ratio - 1.0).abs() < 1e-9,
                "seed {seed}: norm ratio {ratio}"
            );
        }
    }

    #[test]
    fn test_analytic_delay_dependence_is_piecewise_smooth() {
        let c = cfg(8, 4, 3);
        let g = rect(&c);
        let at = |l_i: f64| {
            let ch = ChannelSpec::from_normalized_taps(
                &c,
                &[(l_i, 1.0, Complex64::new(1.0, 0.0))],
            )
            .unwrap();
            build_analytic(&ch, &g, &g, &c).unwrap()
        };
        // Continuous from below at a sample boundary: a delay sitting
        // exactly on a sample instant belongs with the in-frame term.
        let drift = at(3.0 - 1e-7).rel_frobenius_error(&at(3.0));
        assert!(drift < 1e-5, "operator drifted {drift:e} for a 1e-7 nudge");
        // Crossing the boundary from above reassigns one boundary sample
        // to the wraparound term — a genuine jump of the sampled chain.
        let jump = at(3.0 + 1e-7).rel_frobenius_error(&at(3.0));
        assert!(jump > 1e-2, "expected a boundary jump, saw {jump:e}");
        // A mid-cell delay still yields a bounded, nonzero operator (the
        // regime the sampled-time channel itself cannot reach).
        let norm = at(1.5).frobenius_norm();
        assert!(norm.is_finite() && norm > 1.0, "fractional-delay norm {norm}");
    }

    #[test]
    fn test_zero_path_channel_builds_zero_tensor() {
        let c = cfg(8, 4, 2);
        let g = rect(&c);
        let ch = ChannelSpec::new(Vec::new(), None, None).unwrap();
        let h = build_analytic(&ch, &g, &g, &c).unwrap();
        assert_eq!(h.frobenius_norm(), 0.0, "no paths, no response");
    }

    #[test]
    fn test_operator_round_trips_through_binary_format() {
        let c = cfg(4, 2, 1);
        let g = rect(&c);
        let ch = ChannelSpec::from_normalized_taps(
            &c,
            &[(1.0, 1.0, Complex64::new(0.6, -0.2))],
        )
        .unwrap();
        let h = probe_operator(ModemArch::Sfft, Some(&ch), &g, &g, &c).unwrap();
        let mut buf = Vec::new();
        h.write_to(&mut buf).unwrap();
        let back = EffectiveChannel::read_from(&mut buf.as_slice(), 4, 2).unwrap();
        assert_eq!(h, back);
        // Shape metadata must be validated on the way in.
        assert!(EffectiveChannel::read_from(&mut buf.as_slice(), 2, 4).is_ok());
        assert!(matches!(
            EffectiveChannel::read_from(&mut buf.as_slice(), 4, 4),
            Err(Error::BadGridFile(_))
        ));
    }
}
