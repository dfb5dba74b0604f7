//! Sawtooth FMCW baseline with the same bandwidth and frame time as the
//! multicarrier frames.
//!
//! `N` chirps of duration `T_c` without idle time, each sampled `M` times
//! after dechirping. A target at `(tau, nu)` produces the beat samples
//!
//! ```text
//! b[q, i] = sqrt(P_avg) h exp(j2pi (S/f_s) tau i) exp(j2pi nu q T_c) + w[q, i]
//! ```
//!
//! with slope `S = B / T_c` and sample rate `f_s = M / T_c`. The ratio
//! `S/f_s = B/M` plays the role of the subcarrier spacing, so the estimator
//! reuses the two-dimensional periodogram machinery.

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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmcwConfig {
    carrier: f64,
    bandwidth: f64,
    chirp_duration: f64,
    chirps: usize,
    samples: usize,
    p_avg: f64,
}

impl FmcwConfig {
    pub fn new(
        carrier: f64,
        bandwidth: f64,
        chirp_duration: f64,
        chirps: usize,
        samples: usize,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(carrier) && positive(bandwidth) && positive(chirp_duration)) {
            return Err(Error::InvalidFrame(
                "carrier, bandwidth and chirp duration must be positive".into(),
            ));
        }
        if chirps < 2 || samples < 2 {
            return Err(Error::InvalidFrame(format!(
                "need at least 2 chirps and 2 samples, got {chirps} x {samples}"
            )));
        }
        Ok(Self {
            carrier,
            bandwidth,
            chirp_duration,
            chirps,
            samples,
            p_avg: 1.0,
        })
    }

    /// Chirps of length `T`, `M` samples each, `N` chirps: the OTFS frame's
    /// bandwidth and duration `N T`.
    pub fn matched(cfg: &FrameConfig) -> Self {
        Self {
            carrier: cfg.carrier(),
            bandwidth: cfg.bandwidth(),
            chirp_duration: cfg.symbol_duration(),
            chirps: cfg.symbols(),
            samples: cfg.subcarriers(),
            p_avg: cfg.p_avg(),
        }
    }

    pub fn with_p_avg(mut self, p_avg: f64) -> Result<Self> {
        if !(p_avg.is_finite() && p_avg > 0.0) {
            return Err(Error::InvalidFrame(format!(
                "P_avg must be positive, got {p_avg}"
            )));
        }
        self.p_avg = p_avg;
        Ok(self)
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn chirp_duration(&self) -> f64 {
        self.chirp_duration
    }

    pub fn chirps(&self) -> usize {
        self.chirps
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn p_avg(&self) -> f64 {
        self.p_avg
    }

    pub fn slope(&self) -> f64 {
        self.bandwidth / self.chirp_duration
    }

    pub fn sample_rate(&self) -> f64 {
        self.samples as f64 / self.chirp_duration
    }

    pub fn frame_duration(&self) -> f64 {
        self.chirps as f64 * self.chirp_duration
    }

    /// Beat-phase increment per sample and per second of delay, `S / f_s`.
    pub fn beat_spacing(&self) -> f64 {
        self.slope() / self.sample_rate()
    }

    /// Grid with transform lengths `N' x M'` over one beat period.
    pub fn grid(&self, doppler_len: usize, delay_len: usize) -> Result<EstimationGrid> {
        EstimationGrid::from_axes(
            self.chirp_duration,
            self.beat_spacing(),
            self.carrier,
            (self.chirps, self.samples),
            doppler_len,
            delay_len,
        )
    }

    pub fn oversampled_grid(
        &self,
        doppler_factor: usize,
        delay_factor: usize,
    ) -> Result<EstimationGrid> {
        self.grid(doppler_factor * self.chirps, delay_factor * self.samples)
    }

    fn check_target(&self, delay: f64, doppler: f64) -> Result<()> {
        if !(delay.is_finite() && doppler.is_finite()) {
            return Err(Error::Inadmissible(
                "delay and Doppler must be finite".into(),
            ));
        }
        if !(0.0..self.chirp_duration).contains(&delay) {
            return Err(Error::Inadmissible(format!(
                "delay {delay:e} s outside the chirp duration {:e} s",
                self.chirp_duration
            )));
        }
        Ok(())
    }
}

/// Dechirped samples, row-major `chirps x samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct FmcwBeat {
    cfg: FmcwConfig,
    samples: Vec<Complex64>,
}

impl FmcwBeat {
    pub fn new(cfg: FmcwConfig, samples: Vec<Complex64>) -> Result<Self> {
        let len = cfg.chirps * cfg.samples;
        if samples.len() != len {
            return Err(Error::DimensionMismatch {
                expected: format!("{len} samples"),
                got: format!("{}", samples.len()),
            });
        }
        Ok(Self { cfg, samples })
    }

    pub fn cfg(&self) -> &FmcwConfig {
        &self.cfg
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn get(&self, chirp: usize, sample: usize) -> Complex64 {
        self.samples[chirp * self.cfg.samples + sample]
    }
}

fn beat(cfg: &FmcwConfig, gain: Complex64, delay: f64, doppler: f64) -> Vec<Complex64> {
    let fast = Complex64::from_polar(1.0, TAU * cfg.beat_spacing() * delay);
    let slow = Complex64::from_polar(1.0, TAU * doppler * cfg.chirp_duration);
    let mut out = Vec::with_capacity(cfg.chirps * cfg.samples);
    let mut row = gain * cfg.p_avg.sqrt();
    for _ in 0..cfg.chirps {
        let mut v = row;
        for _ in 0..cfg.samples {
            out.push(v);
            v *= fast;
        }
        row *= slow;
    }
    out
}

pub fn synthesize_beat_signal(
    cfg: &FmcwConfig,
    target: &Target,
    noise_sigma: f64,
    seed: u64,
) -> Result<FmcwBeat> {
    cfg.check_target(target.delay, target.doppler)?;
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sigma {noise_sigma}")));
    }
    let mut samples = beat(cfg, target.gain, target.delay, target.doppler);
    add_noise(&mut samples, noise_sigma, seed);
    FmcwBeat::new(*cfg, samples)
}

/// `Z(nu, tau) = sum_q sum_i b[q, i] exp(-j2pi nu q T_c) exp(-j2pi (S/f_s) tau i)`.
pub fn periodogram(beat: &FmcwBeat, grid: &EstimationGrid) -> Result<Vec<Complex64>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let c = &beat.cfg;
    Ok(
        if spectrum::prefer_fft(
            grid,
            c.chirps,
            c.samples,
            c.chirp_duration,
            c.beat_spacing(),
        ) {
            spectrum::zero_padded(
                &beat.samples,
                c.chirps,
                c.samples,
                grid,
                DelaySign::Negative,
            )
        } else {
            spectrum::direct(
                &beat.samples,
                c.chirps,
                c.samples,
                c.chirp_duration,
                c.beat_spacing(),
                grid,
                DelaySign::Negative,
            )
        },
    )
}

/// Periodogram argmax; `h = Z / (N M sqrt(P_avg))` at the peak.
pub fn ml_estimate_fmcw(beat: &FmcwBeat, grid: &EstimationGrid) -> Result<RadarEstimate> {
    let z = periodogram(beat, grid)?;
    let power: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
    let (d, j) = grid.argmax(&power).ok_or(Error::DegenerateStatistic)?;
    let idx = grid.flat(d, j);
    let c = &beat.cfg;
    let gain = z[idx] / ((c.chirps * c.samples) as f64 * c.p_avg.sqrt());
    Ok(RadarEstimate::at_bin(grid, d, j, gain, None, power[idx]))
}

/// Fisher matrix over `(alpha, phi, nu, tau)` at `|h|^2 P_avg = snr_rad`.
pub fn fisher_matrix_fmcw(cfg: &FmcwConfig, target: &Target, snr_rad: f64) -> Result<Matrix4<f64>> {
    if !(snr_rad > 0.0 && snr_rad.is_finite()) {
        return Err(Error::NonPositiveSnr(snr_rad));
    }
    cfg.check_target(target.delay, target.doppler)?;
    let alpha = (snr_rad / cfg.p_avg).sqrt();
    let phase = target.gain.arg();
    let s = beat(
        cfg,
        Complex64::from_polar(alpha, phase),
        target.delay,
        target.doppler,
    );
    let m = cfg.samples;
    let j = Complex64::new(0.0, 1.0);
    let d_alpha: Vec<Complex64> = s.iter().map(|v| v / alpha).collect();
    let d_phase: Vec<Complex64> = s.iter().map(|v| j * v).collect();
    let d_nu: Vec<Complex64> = s
        .iter()
        .enumerate()
        .map(|(k, v)| j * TAU * cfg.chirp_duration * (k / m) as f64 * v)
        .collect();
    let d_tau: Vec<Complex64> = s
        .iter()
        .enumerate()
        .map(|(k, v)| j * TAU * cfg.beat_spacing() * (k % m) as f64 * v)
        .collect();
    Ok(fisher_information([&d_alpha, &d_phase, &d_nu, &d_tau], 1.0))
}

pub fn crlb_fmcw(cfg: &FmcwConfig, target: &Target, snr_rad: f64) -> Result<CrlbReport> {
    let inv = invert_fisher(&fisher_matrix_fmcw(cfg, target, snr_rad)?)?;
    Ok(CrlbReport::from_physical(
        inv[(2, 2)],
        inv[(3, 3)],
        cfg.chirp_duration,
        cfg.beat_spacing(),
        cfg.carrier,
        CrlbSource::NumericFisher,
    ))
}
