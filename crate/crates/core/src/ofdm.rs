//! OFDM radar: observation model, 2D periodogram ML estimator and bounds.
//!
//! After removing the known data phases the radar receiver observes
//!
//! ```text
//! z[n, m] = A[n, m] h exp(j2pi n T_o nu) exp(-j2pi m delta_f tau) + w[n, m]
//! ```
//!
//! with `A = |x|`. Inter-carrier interference is neglected, which needs
//! `|nu| << delta_f`; synthesis warns above `0.05 delta_f`.

use std::f64::consts::TAU;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimate::RadarEstimate;
use crate::fisher::{fisher_information, invert_fisher, CrlbReport, CrlbSource};
use crate::frame::{FrameConfig, Target};
use crate::grid::EstimationGrid;
use crate::seed::add_noise;
use crate::spectrum::{self, DelaySign};
use crate::symbols::{Domain, SymbolGrid};

/// Doppler above this fraction of `delta_f` makes the ICI-free model doubtful.
pub const ICI_WARN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmObservation {
    cfg: FrameConfig,
    z: Vec<Complex64>,
    amplitudes: Vec<f64>,
}

impl OfdmObservation {
    pub fn new(cfg: FrameConfig, z: Vec<Complex64>, amplitudes: Vec<f64>) -> Result<Self> {
        let len = cfg.grid_len();
        if z.len() != len || amplitudes.len() != len {
            return Err(Error::DimensionMismatch {
                expected: format!("{len} samples"),
                got: format!("{} samples, {} amplitudes", z.len(), amplitudes.len()),
            });
        }
        if amplitudes.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::InvalidArgument(
                "amplitudes must be non-negative".into(),
            ));
        }
        Ok(Self { cfg, z, amplitudes })
    }

    pub fn cfg(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.z
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    fn weighted(&self) -> Vec<Complex64> {
        self.z
            .iter()
            .zip(&self.amplitudes)
            .map(|(z, a)| z * a)
            .collect()
    }
}

/// Noiseless `z[n, m]` for a single path.
fn echo(cfg: &FrameConfig, amplitudes: &[f64], target: &Target) -> Vec<Complex64> {
    let (n_sym, m_sub) = (cfg.symbols(), cfg.subcarriers());
    let slow = Complex64::from_polar(1.0, TAU * cfg.ofdm_symbol_duration() * target.doppler);
    let fast = Complex64::from_polar(1.0, -TAU * cfg.subcarrier_spacing() * target.delay);
    let mut out = Vec::with_capacity(n_sym * m_sub);
    let mut row_ph = target.gain;
    for n in 0..n_sym {
        let mut ph = row_ph;
        for m in 0..m_sub {
            out.push(ph * amplitudes[n * m_sub + m]);
            ph *= fast;
        }
        row_ph *= slow;
    }
    out
}

pub fn synthesize_observation(
    cfg: &FrameConfig,
    symbols: &SymbolGrid,
    target: &Target,
    noise_sigma: f64,
    seed: u64,
) -> Result<OfdmObservation> {
    symbols.expect_domain(Domain::TimeFrequency)?;
    symbols.expect_shape(cfg)?;
    target.check_admissible(cfg)?;
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sigma {noise_sigma}")));
    }
    if target.doppler.abs() > ICI_WARN_FRACTION * cfg.subcarrier_spacing() {
        log::warn!(
            "Doppler {:.1} Hz exceeds {}% of the subcarrier spacing; ICI-free OFDM model is approximate",
            target.doppler,
            ICI_WARN_FRACTION * 100.0
        );
    }
    let amplitudes = symbols.amplitudes();
    let mut z = echo(cfg, &amplitudes, target);
    add_noise(&mut z, noise_sigma, seed);
    OfdmObservation::new(*cfg, z, amplitudes)
}

/// Complex `Z(nu, tau)` over a grid, delay-major.
#[derive(Debug, Clone)]
pub struct Periodogram {
    grid: EstimationGrid,
    values: Vec<Complex64>,
}

impl Periodogram {
    pub fn grid(&self) -> &EstimationGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, delay_bin: usize, doppler_bin: usize) -> Complex64 {
        self.values[self.grid.flat(delay_bin, doppler_bin)]
    }

    /// `|Z|^2`.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// `Z(nu, tau) = sum_m sum_n z A exp(-j2pi nu n T_o) exp(j2pi m delta_f tau)`.
///
/// Uses zero-padded FFTs when the grid was built on `T_o` and this frame's
/// subcarrier spacing; falls back to a direct sum otherwise.
pub fn periodogram(obs: &OfdmObservation, grid: &EstimationGrid) -> Result<Periodogram> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let cfg = &obs.cfg;
    let v = obs.weighted();
    let values = if spectrum::prefer_fft(
        grid,
        cfg.symbols(),
        cfg.subcarriers(),
        cfg.ofdm_symbol_duration(),
        cfg.subcarrier_spacing(),
    ) {
        spectrum::zero_padded(
            &v,
            cfg.symbols(),
            cfg.subcarriers(),
            grid,
            DelaySign::Positive,
        )
    } else {
        spectrum::direct(
            &v,
            cfg.symbols(),
            cfg.subcarriers(),
            cfg.ofdm_symbol_duration(),
            cfg.subcarrier_spacing(),
            grid,
            DelaySign::Positive,
        )
    };
    Ok(Periodogram {
        grid: grid.clone(),
        values,
    })
}

/// Same quantity as [`periodogram`], always by direct summation.
pub fn periodogram_direct(obs: &OfdmObservation, grid: &EstimationGrid) -> Result<Periodogram> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let cfg = &obs.cfg;
    let values = spectrum::direct(
        &obs.weighted(),
        cfg.symbols(),
        cfg.subcarriers(),
        cfg.ofdm_symbol_duration(),
        cfg.subcarrier_spacing(),
        grid,
        DelaySign::Positive,
    );
    Ok(Periodogram {
        grid: grid.clone(),
        values,
    })
}

/// Grid-search ML estimate of `(h, tau, nu)`.
///
/// `(nu, tau)` maximize `|Z|^2` over the grid and `h = Z / sum A^2` there.
pub fn ml_estimate(obs: &OfdmObservation, grid: &EstimationGrid) -> Result<RadarEstimate> {
    let energy: f64 = obs.amplitudes.iter().map(|a| a * a).sum();
    if energy == 0.0 {
        return Err(Error::DegenerateStatistic);
    }
    let pg = periodogram(obs, grid)?;
    let power = pg.power();
    let (d, j) = grid.argmax(&power).ok_or(Error::DegenerateStatistic)?;
    let z = pg.value(d, j);
    Ok(RadarEstimate::at_bin(
        grid,
        d,
        j,
        z / energy,
        None,
        power[grid.flat(d, j)],
    ))
}

/// Large-`N, M` bound with unit noise and `|h|^2 P_avg = snr`, for a slow-time
/// period `slow_period` (T_o for OFDM).
pub fn closed_form_bound(
    symbols: usize,
    subcarriers: usize,
    snr: f64,
    slow_period: f64,
    spacing: f64,
    carrier: f64,
) -> Result<CrlbReport> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::NonPositiveSnr(snr));
    }
    let (n, m) = (symbols as f64, subcarriers as f64);
    let common = snr * TAU * TAU * m * n;
    let var_f = 6.0 / (common * (n * n - 1.0));
    let var_t = 6.0 / (common * (m * m - 1.0));
    Ok(CrlbReport::from_normalized(
        var_f,
        var_t,
        slow_period,
        spacing,
        carrier,
        CrlbSource::ClosedForm,
    ))
}

/// Closed-form CRLB on `f = T_o nu` and `t = delta_f tau`.
pub fn crlb_closed_form(cfg: &FrameConfig, snr_rad: f64) -> Result<CrlbReport> {
    closed_form_bound(
        cfg.symbols(),
        cfg.subcarriers(),
        snr_rad,
        cfg.ofdm_symbol_duration(),
        cfg.subcarrier_spacing(),
        cfg.carrier(),
    )
}

/// `theta = (alpha, phi, f, t)` with `h = alpha exp(j phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmParams {
    pub alpha: f64,
    pub phase: f64,
    pub f: f64,
    pub t: f64,
}

/// `s[n, m] = A alpha exp(j phi) exp(j2pi n f) exp(-j2pi m t)`.
pub fn signal(cfg: &FrameConfig, amplitudes: &[f64], theta: &OfdmParams) -> Vec<Complex64> {
    let m_sub = cfg.subcarriers();
    (0..cfg.grid_len())
        .map(|idx| {
            let (n, m) = ((idx / m_sub) as f64, (idx % m_sub) as f64);
            let ph = theta.phase + TAU * (n * theta.f - m * theta.t);
            Complex64::from_polar(amplitudes[idx] * theta.alpha, ph)
        })
        .collect()
}

/// Analytic `ds/dtheta` in the order `(alpha, phi, f, t)`.
pub fn signal_derivatives(
    cfg: &FrameConfig,
    amplitudes: &[f64],
    theta: &OfdmParams,
) -> [Vec<Complex64>; 4] {
    let s = signal(cfg, amplitudes, theta);
    let m_sub = cfg.subcarriers();
    let j = Complex64::new(0.0, 1.0);
    let d_alpha = s.iter().map(|v| v / theta.alpha).collect();
    let d_phase = s.iter().map(|v| j * v).collect();
    let d_f = s
        .iter()
        .enumerate()
        .map(|(i, v)| j * TAU * (i / m_sub) as f64 * v)
        .collect();
    let d_t = s
        .iter()
        .enumerate()
        .map(|(i, v)| -j * TAU * (i % m_sub) as f64 * v)
        .collect();
    [d_alpha, d_phase, d_f, d_t]
}

/// 4x4 Fisher matrix of `theta = (alpha, phi, f, t)` under unit-variance noise.
pub fn fisher_matrix_numeric(
    cfg: &FrameConfig,
    amplitudes: &[f64],
    theta: &OfdmParams,
) -> Result<Matrix4<f64>> {
    if amplitudes.len() != cfg.grid_len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} amplitudes", cfg.grid_len()),
            got: format!("{}", amplitudes.len()),
        });
    }
    if !(theta.alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {}",
            theta.alpha
        )));
    }
    let [a, b, c, d] = signal_derivatives(cfg, amplitudes, theta);
    Ok(fisher_information([&a, &b, &c, &d], 1.0))
}

/// Diagonal of the inverse numeric Fisher matrix.
pub fn crlb_numeric(
    cfg: &FrameConfig,
    amplitudes: &[f64],
    theta: &OfdmParams,
) -> Result<CrlbReport> {
    let inv = invert_fisher(&fisher_matrix_numeric(cfg, amplitudes, theta)?)?;
    Ok(CrlbReport::from_normalized(
        inv[(2, 2)],
        inv[(3, 3)],
        cfg.ofdm_symbol_duration(),
        cfg.subcarrier_spacing(),
        cfg.carrier(),
        CrlbSource::NumericFisher,
    ))
}
