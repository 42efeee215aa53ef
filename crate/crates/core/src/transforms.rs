//! Unitary transforms connecting the delay-Doppler, time-frequency, and
//! time domains.
//!
//! The inverse symplectic finite Fourier transform (ISFFT) maps a
//! delay-Doppler grid to time-frequency samples,
//!
//! ```text
//! X_TF[m, n] = (1/sqrt(N M)) sum_k sum_l X_DD[l, k] e^{j2pi(n k / N - m l / M)}
//! ```
//!
//! and the SFFT is its inverse (conjugate kernel). The discrete Zak
//! transform (DZT) maps a length-MN sequence to an M x N grid,
//!
//! ```text
//! DZ_x[l, k] = (1/sqrt(N)) sum_n x[l + n M] e^{-j2pi n k / N}
//! ```
//!
//! with the IDZT as its inverse. All four are unitary; no FFT-library
//! scaling convention leaks through this module's API.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{DdGrid, TfGrid};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(len)
        } else {
            p.plan_fft_inverse(len)
        }
    })
}

/// In-place unnormalized DFT, `X[k] = sum_j x[j] e^{-j2pi jk/n}`.
pub(crate) fn dft_unscaled_in_place(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        plan(buf.len(), true).process(buf);
    }
}

/// In-place unnormalized inverse DFT, `x[j] = sum_k X[k] e^{+j2pi jk/n}`.
pub(crate) fn idft_unscaled_in_place(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

/// Unitary DFT: `X[k] = (1/sqrt(n)) sum_j x[j] e^{-j2pi jk/n}`.
pub fn unitary_dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    dft_unscaled_in_place(&mut buf);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Unitary inverse DFT: `x[j] = (1/sqrt(n)) sum_k X[k] e^{+j2pi jk/n}`.
pub fn unitary_idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    idft_unscaled_in_place(&mut buf);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Inverse symplectic finite Fourier transform, delay-Doppler to
/// time-frequency. Output has the same M x N shape.
pub fn isfft(x_dd: &DdGrid) -> TfGrid {
    let (m, n) = x_dd.dims();
    // Inverse DFT along Doppler (k -> n) for each delay row, then forward
    // DFT along delay (l -> m) for each slot column.
    let mut mid = DdGrid::zeros(m, n);
    for l in 0..m {
        let row = unitary_idft(x_dd.row(l));
        mid.data_mut()[l * n..(l + 1) * n].copy_from_slice(&row);
    }
    let mut out = TfGrid::zeros(m, n);
    let mut col = vec![Complex64::default(); m];
    for slot in 0..n {
        for l in 0..m {
            col[l] = mid[(l, slot)];
        }
        let spec = unitary_dft(&col);
        for (mm, v) in spec.iter().enumerate() {
            out[(mm, slot)] = *v;
        }
    }
    out
}

/// Symplectic finite Fourier transform, time-frequency to delay-Doppler.
/// Exact inverse of [`isfft`].
pub fn sfft(y_tf: &TfGrid) -> DdGrid {
    let (m, n) = y_tf.dims();
    // Inverse DFT along subcarrier (m -> l) per slot, then forward DFT
    // along slot (n -> k) per delay row.
    let mut mid = DdGrid::zeros(m, n);
    let mut col = vec![Complex64::default(); m];
    for slot in 0..n {
        for mm in 0..m {
            col[mm] = y_tf[(mm, slot)];
        }
        let delay = unitary_idft(&col);
        for (l, v) in delay.iter().enumerate() {
            mid[(l, slot)] = *v;
        }
    }
    let mut out = DdGrid::zeros(m, n);
    for l in 0..m {
        let row = unitary_dft(mid.row(l));
        out.data_mut()[l * n..(l + 1) * n].copy_from_slice(&row);
    }
    out
}

/// Discrete Zak transform of a length `m * n` sequence onto an M x N
/// delay-Doppler grid: `DZ[l, k] = (1/sqrt(n)) sum_i x[l + i m] e^{-j2pi i k / n}`.
///
/// Panics if `x.len() != m * n`.
pub fn dzt(x: &[Complex64], m: usize, n: usize) -> DdGrid {
    assert_eq!(x.len(), m * n, "sequence length must equal m * n");
    let mut out = DdGrid::zeros(m, n);
    let mut row = vec![Complex64::default(); n];
    for l in 0..m {
        for i in 0..n {
            row[i] = x[l + i * m];
        }
        let spec = unitary_dft(&row);
        out.data_mut()[l * n..(l + 1) * n].copy_from_slice(&spec);
    }
    out
}

/// Inverse discrete Zak transform: `x[l + i m] = (1/sqrt(n)) sum_k Z[l, k] e^{+j2pi i k / n}`.
pub fn idzt(z: &DdGrid) -> Vec<Complex64> {
    let (m, n) = z.dims();
    let mut x = vec![Complex64::default(); m * n];
    for l in 0..m {
        let row = unitary_idft(z.row(l));
        for (i, v) in row.iter().enumerate() {
            x[l + i * m] = *v;
        }
    }
    x
}
