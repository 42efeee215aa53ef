//! Symbol mapping and linear equalization for end-to-end link
//! experiments.
//!
//! The delay-Doppler grid carries one constellation symbol per bin, so a
//! frame of `M N` bins moves `M N * bits_per_symbol` bits. Detection is
//! deliberately baseline: hard-decision demapping and a regularized
//! linear minimum-mean-square-error solve on the flattened effective
//! channel,
//!
//! ```text
//! x^ = (H^H H + sigma^2 I)^-1 H^H y
//! ```
//!
//! enough to close the loop for bit-error-rate sweeps without any claim
//! of detector optimality.

use num_complex::Complex64;

use crate::effective::EffectiveChannel;
use crate::error::{Error, Result};
use crate::grid::DdGrid;

/// Largest flattened dimension `M N` the dense MMSE solve accepts; the
/// normal-equation factorization is cubic in it.
pub const MMSE_SIZE_BOUND: usize = 1024;

// ----------------------------------------------------------------------
// Constellations
// ----------------------------------------------------------------------

/// Gray-labeled constellation with unit average energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Constellation {
    #[serde(rename = "bpsk")]
    Bpsk,
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

/// Per-dimension Gray code of the 16-point square constellation:
/// adjacent amplitude levels differ in exactly one bit.
fn gray_level(b0: bool, b1: bool) -> f64 {
    match (b0, b1) {
        (false, false) => -3.0,
        (false, true) => -1.0,
        (true, true) => 1.0,
        (true, false) => 3.0,
    }
}

impl Constellation {
    /// Parses the names used in experiment specs and on the command line.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bpsk" => Ok(Constellation::Bpsk),
            "qpsk" => Ok(Constellation::Qpsk),
            "16qam" => Ok(Constellation::Qam16),
            other => Err(Error::InvalidSpec(format!(
                "unknown constellation '{other}' (expected bpsk, qpsk, or 16qam)"
            ))),
        }
    }

    /// Spec/CLI name of the constellation.
    pub fn name(&self) -> &'static str {
        match self {
            Constellation::Bpsk => "bpsk",
            Constellation::Qpsk => "qpsk",
            Constellation::Qam16 => "16qam",
        }
    }

    /// Bits carried per symbol.
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
        }
    }

    /// Maps `bits_per_symbol` bits onto one unit-average-energy symbol.
    pub fn map_symbol(&self, bits: &[bool]) -> Complex64 {
        match self {
            Constellation::Bpsk => Complex64::new(if bits[0] { -1.0 } else { 1.0 }, 0.0),
            Constellation::Qpsk => Complex64::new(
                if bits[0] { -1.0 } else { 1.0 },
                if bits[1] { -1.0 } else { 1.0 },
            ) / 2.0_f64.sqrt(),
            Constellation::Qam16 => Complex64::new(
                gray_level(bits[0], bits[1]),
                gray_level(bits[2], bits[3]),
            ) / 10.0_f64.sqrt(),
        }
    }

    /// All `2^bits_per_symbol` symbols with their bit labels, in label
    /// order (index bits read most-significant first).
    pub fn points(&self) -> Vec<(Vec<bool>, Complex64)> {
        let bps = self.bits_per_symbol();
        (0..1usize << bps)
            .map(|label| {
                let bits: Vec<bool> =
                    (0..bps).map(|i| (label >> (bps - 1 - i)) & 1 == 1).collect();
                let sym = self.map_symbol(&bits);
                (bits, sym)
            })
            .collect()
    }

    /// Hard-decision demapping of one received value: the bit label of
    /// the nearest constellation point.
    pub fn demap_symbol(&self, z: Complex64) -> Vec<bool> {
        self.points()
            .into_iter()
            .min_by(|(_, a), (_, b)| {
                (z - a)
                    .norm_sqr()
                    .partial_cmp(&(z - b).norm_sqr())
                    .expect("finite distances")
            })
            .expect("non-empty constellation")
            .0
    }
}

/// Fills an `m x n` delay-Doppler grid with Gray-mapped symbols,
/// consuming the bit stream delay-major (all Doppler bins of delay row 0
/// first). Errors unless exactly `m n * bits_per_symbol` bits arrive.
pub fn map_bits(bits: &[bool], map: Constellation, m: usize, n: usize) -> Result<DdGrid> {
    let bps = map.bits_per_symbol();
    let expected = m * n * bps;
    if bits.len() != expected {
        return Err(Error::BitCountMismatch {
            expected,
            got: bits.len(),
        });
    }
    let data: Vec<Complex64> = bits.chunks_exact(bps).map(|c| map.map_symbol(c)).collect();
    DdGrid::from_data(m, n, data)
}

/// Hard-decision demapping of a whole grid back to the bit stream, in
/// the same delay-major order as [`map_bits`].
pub fn demap_symbols(grid: &DdGrid, map: Constellation) -> Vec<bool> {
    grid.data()
        .iter()
        .flat_map(|&z| map.demap_symbol(z))
        .collect()
}

// ----------------------------------------------------------------------
// Linear MMSE equalizer
// ----------------------------------------------------------------------

/// Precomputed regularized linear MMSE equalizer.
///
/// Holds `H^H` and a Hermitian factorization of the normal matrix
/// `H^H H + sigma^2 I`, so that equalizing a frame costs one
/// matrix-vector product and two triangular solves. Build it once per
/// (channel, noise level) and reuse it across frames; that is the shape
/// of every BER sweep.
pub struct MmseEqualizer {
    m: usize,
    n: usize,
    h_adjoint: nalgebra::DMatrix<Complex64>,
    factor: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
}

impl MmseEqualizer {
    /// Factors the normal equations for `h` at noise variance `sigma2`.
    ///
    /// Errors when the flattened dimension exceeds [`MMSE_SIZE_BOUND`],
    /// when `sigma2` is negative or non-finite, or when the regularized
    /// system is not positive definite (`sigma2 = 0` with a
    /// rank-deficient channel).
    pub fn new(h: &EffectiveChannel, sigma2: f64) -> Result<Self> {
        if sigma2 < 0.0 || !sigma2.is_finite() {
            return Err(Error::NonPositive {
                name: "noise variance",
                value: sigma2,
            });
        }
        let size = h.size();
        if size > MMSE_SIZE_BOUND {
            return Err(Error::EqualizerTooLarge {
                got: size,
                bound: MMSE_SIZE_BOUND,
            });
        }
        let h_mat = nalgebra::DMatrix::from_row_slice(size, size, h.as_slice());
        let h_adjoint = h_mat.adjoint();
        let mut normal = &h_adjoint * h_mat;
        for i in 0..size {
            normal[(i, i)] += Complex64::new(sigma2, 0.0);
        }
        let factor = normal.cholesky().ok_or(Error::SingularSystem)?;
        let (m, n) = h.grid_dims();
        Ok(MmseEqualizer { m, n, h_adjoint, factor })
    }

    /// Equalizes one received grid: `x^ = (H^H H + sigma^2 I)^-1 H^H y`.
    pub fn equalize(&self, y: &DdGrid) -> Result<DdGrid> {
        if y.dims() != (self.m, self.n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} delay-Doppler grid", self.m, self.n),
                got: format!("{}x{}", y.rows(), y.cols()),
            });
        }
        let y_vec = nalgebra::DVector::from_column_slice(y.data());
        let x = self.factor.solve(&(&self.h_adjoint * y_vec));
        DdGrid::from_data(self.m, self.n, x.iter().copied().collect())
    }
}

/// One-shot regularized linear MMSE estimate of the transmitted grid;
/// builds a throwaway [`MmseEqualizer`]. Prefer the struct when
/// equalizing many frames against the same channel and noise level.
pub fn mmse_equalize(
    y: &DdGrid,
    h: &EffectiveChannel,
    sigma2: f64,
) -> Result<DdGrid> {
    MmseEqualizer::new(h, sigma2)?.equalize(y)
}

// ----------------------------------------------------------------------
// Bit statistics
// ----------------------------------------------------------------------

/// Exact Hamming statistics between two bit streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitErrorStats {
    pub errors: usize,
    pub total: usize,
}

impl BitErrorStats {
    /// Error ratio; 0 over an empty stream.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }
}

/// Counts bit errors between equal-length transmit and receive streams.
pub fn ber_count(tx: &[bool], rx: &[bool]) -> Result<BitErrorStats> {
    if tx.len() != rx.len() {
        return Err(Error::BitCountMismatch {
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(BitErrorStats {
        errors,
        total: tx.len(),
    })
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / 2.0_f64.sqrt())
}

/// Theoretical QPSK (and BPSK) bit error rate over AWGN at the given
/// Eb/N0 in dB: `Q(sqrt(2 Eb/N0))`.
pub fn qpsk_awgn_ber(ebn0_db: f64) -> f64 {
    let rho = 10.0_f64.powf(ebn0_db / 10.0);
    q_function((2.0 * rho).sqrt())
}

/// Per-component complex noise variance that realizes a target Eb/N0 for
/// unit-energy symbols: `sigma^2 = 1 / (bits_per_symbol * 10^(dB/10))`.
pub fn noise_variance_for_ebn0(ebn0_db: f64, map: Constellation) -> f64 {
    1.0 / (map.bits_per_symbol() as f64 * 10.0_f64.powf(ebn0_db / 10.0))
}
