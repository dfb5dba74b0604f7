//! Two-dimensional periodograms over an [`EstimationGrid`].
//!
//! Both OFDM and FMCW reduce to
//! `Z(nu, tau) = sum_r sum_c v[r, c] exp(-j2pi nu r T_s) exp(s j2pi c delta_f tau)`
//! with `s = +1` for OFDM and `s = -1` for the FMCW beat signal.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::EstimationGrid;
use crate::sfft::fft_columns;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DelaySign {
    Positive,
    Negative,
}

impl DelaySign {
    fn value(self) -> f64 {
        match self {
            DelaySign::Positive => 1.0,
            DelaySign::Negative => -1.0,
        }
    }
}

/// Zero-padded transforms of lengths `N'` and `M'`. Only valid when the
/// grid's steps are `1 / (N' T_s)` and `1 / (M' delta_f)` for the same
/// `T_s` and `delta_f` as the data.
pub(crate) fn zero_padded(
    v: &[Complex64],
    rows: usize,
    cols: usize,
    grid: &EstimationGrid,
    sign: DelaySign,
) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let (n_pad, m_pad) = (grid.doppler_len(), grid.delay_len());
    let mut planner = FftPlanner::new();
    let row_fft = match sign {
        DelaySign::Positive => planner.plan_fft_inverse(m_pad),
        DelaySign::Negative => planner.plan_fft_forward(m_pad),
    };
    let col_fft = planner.plan_fft_forward(n_pad);

    let used_cols = grid.delay_bins().min(m_pad);
    let mut tmp = vec![zero; n_pad * used_cols];
    let mut row = vec![zero; m_pad];
    for r in 0..rows {
        row.fill(zero);
        row[..cols].copy_from_slice(&v[r * cols..(r + 1) * cols]);
        row_fft.process(&mut row);
        tmp[r * used_cols..(r + 1) * used_cols].copy_from_slice(&row[..used_cols]);
    }
    let mut scratch = Vec::new();
    fft_columns(&*col_fft, &mut tmp, n_pad, used_cols, &mut scratch);

    let mut out = Vec::with_capacity(grid.len());
    for d in 0..grid.delay_bins() {
        let c = d % m_pad;
        for j in 0..grid.doppler_bins() {
            let k = grid.doppler_index(j).rem_euclid(n_pad as i64) as usize;
            out.push(tmp[k * used_cols + c]);
        }
    }
    out
}

/// Separable direct evaluation at arbitrary grid values.
pub(crate) fn direct(
    v: &[Complex64],
    rows: usize,
    cols: usize,
    slow_period: f64,
    spacing: f64,
    grid: &EstimationGrid,
    sign: DelaySign,
) -> Vec<Complex64> {
    use std::f64::consts::TAU;
    let delays: Vec<f64> = grid.delays().collect();
    let dopplers: Vec<f64> = grid.dopplers().collect();
    // u[d][r] = sum_c v[r, c] exp(s j2pi c delta_f tau_d)
    let mut u = vec![Complex64::new(0.0, 0.0); delays.len() * rows];
    for (d, &tau) in delays.iter().enumerate() {
        let step = Complex64::from_polar(1.0, sign.value() * TAU * spacing * tau);
        for r in 0..rows {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut ph = Complex64::new(1.0, 0.0);
            for c in 0..cols {
                acc += v[r * cols + c] * ph;
                ph *= step;
            }
            u[d * rows + r] = acc;
        }
    }
    let mut out = Vec::with_capacity(grid.len());
    for d in 0..delays.len() {
        for &nu in &dopplers {
            let step = Complex64::from_polar(1.0, -TAU * nu * slow_period);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut ph = Complex64::new(1.0, 0.0);
            for r in 0..rows {
                acc += u[d * rows + r] * ph;
                ph *= step;
            }
            out.push(acc);
        }
    }
    out
}

pub(crate) fn same_axes(grid: &EstimationGrid, slow_period: f64, spacing: f64) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
    close(grid.slow_period(), slow_period) && close(grid.spacing(), spacing)
}

/// True when the zero-padded path applies and the grid window is not tiny
/// next to the padded plane. A narrow window on a very fine grid (say 100 x
/// 100 bins out of 16384 x 16384) is far cheaper by direct summation.
pub(crate) fn prefer_fft(
    grid: &EstimationGrid,
    rows: usize,
    cols: usize,
    slow_period: f64,
    spacing: f64,
) -> bool {
    if !same_axes(grid, slow_period, spacing) {
        return false;
    }
    let padded = grid.doppler_len() * grid.delay_len();
    padded <= grid.delay_bins() * rows * (cols + grid.doppler_bins())
}
