//! Symplectic finite Fourier transform pair.
//!
//! ```text
//! ISFFT:  X[n, m] = sum_k sum_l x[k, l] exp(+j2pi (nk/N - ml/M))
//! SFFT:   x[k, l] = 1/(NM) sum_n sum_m X[n, m] exp(-j2pi (nk/N - ml/M))
//! ```
//!
//! The forward ISFFT is unnormalized so the pair is an exact inverse, which
//! gives `sum |X|^2 = NM * sum |x|^2`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symbols::{Domain, SymbolGrid};

/// Transforms every column of a row-major `rows x cols` buffer in place.
pub(crate) fn fft_columns(
    fft: &dyn Fft<f64>,
    data: &mut [Complex64],
    rows: usize,
    cols: usize,
    scratch: &mut Vec<Complex64>,
) {
    scratch.resize(rows, Complex64::new(0.0, 0.0));
    for c in 0..cols {
        for r in 0..rows {
            scratch[r] = data[r * cols + c];
        }
        fft.process(scratch);
        for r in 0..rows {
            data[r * cols + c] = scratch[r];
        }
    }
}

/// Planned transforms for one `N x M` grid size.
#[derive(Clone)]
pub struct SymplecticFft {
    rows: usize,
    cols: usize,
    fwd_rows: Arc<dyn Fft<f64>>,
    inv_rows: Arc<dyn Fft<f64>>,
    fwd_cols: Arc<dyn Fft<f64>>,
    inv_cols: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SymplecticFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticFft")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl SymplecticFft {
    /// `rows = N` (Doppler / symbol index), `cols = M` (delay / subcarrier).
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            fwd_rows: planner.plan_fft_forward(rows),
            inv_rows: planner.plan_fft_inverse(rows),
            fwd_cols: planner.plan_fft_forward(cols),
            inv_cols: planner.plan_fft_inverse(cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rows * self.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{len} entries"),
            });
        }
        Ok(())
    }

    /// Delay-Doppler `x[k, l]` to time-frequency `X[n, m]`, in place.
    pub fn isfft_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        let mut scratch = Vec::new();
        // exp(+j2pi nk/N) along the Doppler axis
        fft_columns(&*self.inv_rows, data, self.rows, self.cols, &mut scratch);
        // exp(-j2pi ml/M) along the delay axis
        for row in data.chunks_exact_mut(self.cols) {
            self.fwd_cols.process(row);
        }
        Ok(())
    }

    /// Time-frequency `X[n, m]` to delay-Doppler `x[k, l]`, in place.
    pub fn sfft_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        let mut scratch = Vec::new();
        fft_columns(&*self.fwd_rows, data, self.rows, self.cols, &mut scratch);
        for row in data.chunks_exact_mut(self.cols) {
            self.inv_cols.process(row);
        }
        let scale = 1.0 / (self.rows * self.cols) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    pub(crate) fn inverse_rows(&self) -> &dyn Fft<f64> {
        &*self.inv_rows
    }

    pub(crate) fn forward_cols(&self) -> &dyn Fft<f64> {
        &*self.fwd_cols
    }
}

pub fn isfft(grid: &SymbolGrid) -> Result<SymbolGrid> {
    grid.expect_domain(Domain::DelayDoppler)?;
    let plan = SymplecticFft::new(grid.rows(), grid.cols());
    let mut out = grid.clone();
    plan.isfft_in_place(out.as_mut_slice())?;
    Ok(out.with_domain(Domain::TimeFrequency))
}

pub fn sfft(grid: &SymbolGrid) -> Result<SymbolGrid> {
    grid.expect_domain(Domain::TimeFrequency)?;
    let plan = SymplecticFft::new(grid.rows(), grid.cols());
    let mut out = grid.clone();
    plan.sfft_in_place(out.as_mut_slice())?;
    Ok(out.with_domain(Domain::DelayDoppler))
}
