//! Complex grid and sequence containers.
//!
//! [`DdGrid`] holds delay-Doppler symbols `X[l, k]` (delay-major), [`TfGrid`]
//! holds time-frequency samples `X[m, n]` (subcarrier-major), and
//! [`TdSequence`] holds a sampled time-domain frame together with its cyclic
//! prefix layout. Grids serialize to a compact binary format with a 16-byte
//! header followed by row-major little-endian (re, im) f64 pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Magic bytes identifying the binary grid format, version 1.
pub const GRID_MAGIC: [u8; 8] = *b"OTFSGRD1";

macro_rules! complex_grid {
    ($name:ident, $rows_doc:literal, $cols_doc:literal) => {
        /// Two-dimensional complex grid stored row-major.
        ///
        #[doc = concat!("Rows index ", $rows_doc, ", columns index ", $cols_doc, ".")]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            rows: usize,
            cols: usize,
            data: Vec<Complex64>,
        }

        impl $name {
            /// All-zero grid.
            pub fn zeros(rows: usize, cols: usize) -> Self {
                Self {
                    rows,
                    cols,
                    data: vec![Complex64::new(0.0, 0.0); rows * cols],
                }
            }

            /// Grid built from a function of (row, col).
            pub fn from_fn(
                rows: usize,
                cols: usize,
                mut f: impl FnMut(usize, usize) -> Complex64,
            ) -> Self {
                let mut g = Self::zeros(rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        g.data[r * cols + c] = f(r, c);
                    }
                }
                g
            }

            /// Grid that is 1 at (row, col) and 0 elsewhere.
            pub fn impulse(rows: usize, cols: usize, row: usize, col: usize) -> Self {
                let mut g = Self::zeros(rows, cols);
                g[(row, col)] = Complex64::new(1.0, 0.0);
                g
            }

            /// Wraps an existing row-major buffer of length `rows * cols`.
            pub fn from_data(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
                if data.len() != rows * cols {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{rows}x{cols} = {} entries", rows * cols),
                        got: format!("{} entries", data.len()),
                    });
                }
                Ok(Self { rows, cols, data })
            }

            pub fn rows(&self) -> usize {
                self.rows
            }

            pub fn cols(&self) -> usize {
                self.cols
            }

            /// (rows, cols) pair.
            pub fn dims(&self) -> (usize, usize) {
                (self.rows, self.cols)
            }

            /// Row-major backing slice.
            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            /// Consumes the grid, returning the row-major buffer.
            pub fn into_data(self) -> Vec<Complex64> {
                self.data
            }

            /// One full row as a slice.
            pub fn row(&self, r: usize) -> &[Complex64] {
                &self.data[r * self.cols..(r + 1) * self.cols]
            }

            /// Frobenius norm (square root of total energy).
            pub fn norm(&self) -> f64 {
                self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            }

            /// Largest entry-wise absolute difference against another grid.
            /// Panics on dimension mismatch; intended for test assertions.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                assert_eq!(self.dims(), other.dims(), "grid dimensions differ");
                self.data
                    .iter()
                    .zip(&other.data)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            }

            /// True when every entry is finite.
            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            /// Writes the grid in the binary format.
            pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
                write_complex_matrix(w, self.rows, self.cols, &self.data)
            }

            /// Reads a grid in the binary format, validating header and values.
            pub fn read_from(r: &mut impl Read) -> Result<Self> {
                let (rows, cols, data) = read_complex_matrix(r)?;
                Self::from_data(rows, cols, data)
            }
        }

        impl std::ops::Index<(usize, usize)> for $name {
            type Output = Complex64;
            fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
                &self.data[r * self.cols + c]
            }
        }

        impl std::ops::IndexMut<(usize, usize)> for $name {
            fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
                &mut self.data[r * self.cols + c]
            }
        }
    };
}

complex_grid!(DdGrid, "delay bins l in 0..M", "Doppler bins k in 0..N");
complex_grid!(TfGrid, "subcarriers m in 0..M", "time slots n in 0..N");

// ----------------------------------------------------------------------
// Binary grid serialization
// ----------------------------------------------------------------------

/// Writes a row-major complex matrix: 8 magic bytes, rows and cols as
/// little-endian u32, then (re, im) little-endian f64 pairs.
pub fn write_complex_matrix(
    w: &mut impl Write,
    rows: usize,
    cols: usize,
    data: &[Complex64],
) -> Result<()> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{rows}x{cols}"),
            got: format!("{} entries", data.len()),
        });
    }
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::BadGridFile("dimensions exceed u32".into()));
    }
    w.write_all(&GRID_MAGIC)?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(data.len() * 16);
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a matrix written by [`write_complex_matrix`].
///
/// Rejects bad magic, truncated payloads, and non-finite entries.
pub fn read_complex_matrix(r: &mut impl Read) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| Error::BadGridFile("file shorter than 16-byte header".into()))?;
    if header[..8] != GRID_MAGIC {
        return Err(Error::BadGridFile(format!(
            "bad magic {:?}, expected {:?}",
            &header[..8],
            GRID_MAGIC
        )));
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::BadGridFile("dimension overflow".into()))?;
    let mut payload = vec![0u8; count * 16];
    r.read_exact(&mut payload)
        .map_err(|_| Error::BadGridFile(format!("truncated payload, expected {count} entries")))?;
    let mut data = Vec::with_capacity(count);
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::BadGridFile("non-finite entry".into()));
        }
        data.push(Complex64::new(re, im));
    }
    Ok((rows, cols, data))
}

// ----------------------------------------------------------------------
// Time-domain sequence
// ----------------------------------------------------------------------

/// Cyclic prefix layout of a transmitted frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpLayout {
    /// One prefix of `cp_len` samples copied from the frame tail, prepended
    /// to the whole N-slot frame.
    WholeFrame { cp_len: usize },
    /// OFDM-style prefix of `cp_len` samples prepended to every slot of
    /// `symbol_len` samples.
    PerSymbol { cp_len: usize, symbol_len: usize },
}

impl CpLayout {
    /// Prefix length in samples (per frame or per symbol).
    pub fn cp_len(&self) -> usize {
        match *self {
            CpLayout::WholeFrame { cp_len } => cp_len,
            CpLayout::PerSymbol { cp_len, .. } => cp_len,
        }
    }
}

/// Sampled time-domain frame: cyclic prefix samples followed by (or
/// interleaved with) the frame body, at `sample_rate` Hz.
///
/// Time is continuous across the sequence and its origin sits at the first
/// body sample: sample `i` occurs at `(i - cp_len) / sample_rate` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TdSequence {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub cp: CpLayout,
}

impl TdSequence {
    /// Wraps a body (no prefix yet) and prepends a whole-frame cyclic prefix
    /// of `cp_len` samples copied from the body tail.
    pub fn with_whole_frame_cp(body: Vec<Complex64>, cp_len: usize, sample_rate: f64) -> Self {
        assert!(cp_len <= body.len(), "cp longer than body");
        let mut samples = Vec::with_capacity(cp_len + body.len());
        samples.extend_from_slice(&body[body.len() - cp_len..]);
        samples.extend_from_slice(&body);
        TdSequence {
            samples,
            sample_rate,
            cp: CpLayout::WholeFrame { cp_len },
        }
    }

    /// Wraps a body (no prefixes yet) and prepends an OFDM-style cyclic
    /// prefix of `cp_len` samples, copied from the symbol tail, to every
    /// `symbol_len`-sample slot of the body.
    pub fn with_per_symbol_cp(
        body: Vec<Complex64>,
        cp_len: usize,
        symbol_len: usize,
        sample_rate: f64,
    ) -> Self {
        assert!(symbol_len > 0, "empty symbols");
        assert_eq!(
            body.len() % symbol_len,
            0,
            "body not a whole number of symbols"
        );
        assert!(cp_len <= symbol_len, "cp longer than symbol");
        let mut samples = Vec::with_capacity((body.len() / symbol_len) * (cp_len + symbol_len));
        for sym in body.chunks_exact(symbol_len) {
            samples.extend_from_slice(&sym[symbol_len - cp_len..]);
            samples.extend_from_slice(sym);
        }
        TdSequence {
            samples,
            sample_rate,
            cp: CpLayout::PerSymbol { cp_len, symbol_len },
        }
    }

    /// Body samples with every cyclic prefix stripped.
    pub fn body(&self) -> Vec<Complex64> {
        match self.cp {
            CpLayout::WholeFrame { cp_len } => self.samples[cp_len..].to_vec(),
            CpLayout::PerSymbol { cp_len, symbol_len } => {
                let stride = cp_len + symbol_len;
                assert_eq!(
                    self.samples.len() % stride,
                    0,
                    "sequence length not a whole number of prefixed symbols"
                );
                self.samples
                    .chunks_exact(stride)
                    .flat_map(|sym| sym[cp_len..].iter().copied())
                    .collect()
            }
        }
    }

    /// Body length in samples.
    pub fn body_len(&self) -> usize {
        match self.cp {
            CpLayout::WholeFrame { cp_len } => self.samples.len() - cp_len,
            CpLayout::PerSymbol { cp_len, symbol_len } => {
                let stride = cp_len + symbol_len;
                (self.samples.len() / stride) * symbol_len
            }
        }
    }

    /// Absolute time of sample `idx` in seconds; 0 at the first body sample.
    pub fn sample_time(&self, idx: usize) -> f64 {
        (idx as f64 - self.cp.cp_len() as f64) / self.sample_rate
    }

    /// Total signal energy, `sum |s[i]|^2`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}
