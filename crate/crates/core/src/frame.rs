//! Frame geometry and the single-path target model.
//!
//! A frame is an `N x M` grid: `N` symbols in slow time, `M` subcarriers
//! spaced `delta_f = B / M` apart. The symbol duration is `T = 1 / delta_f`
//! and OFDM adds a cyclic prefix of `C` samples, `T_cp = C T / M`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slack used when rounding quantities that should land on an integer.
pub(crate) const INTEGER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    carrier: f64,
    bandwidth: f64,
    subcarriers: usize,
    symbols: usize,
    cp_samples: usize,
    p_avg: f64,
}

impl FrameConfig {
    /// Builds a frame from carrier, bandwidth, grid size and the cyclic
    /// prefix as a fraction of the symbol duration.
    ///
    /// A fraction that does not land on a whole number of samples is rounded
    /// up to the next sample.
    pub fn new(
        carrier: f64,
        bandwidth: f64,
        subcarriers: usize,
        symbols: usize,
        cp_fraction: f64,
    ) -> Result<Self> {
        if !(cp_fraction.is_finite() && (0.0..1.0).contains(&cp_fraction)) {
            return Err(Error::InvalidFrame(format!(
                "cp_fraction must lie in [0, 1), got {cp_fraction}"
            )));
        }
        let cp_samples = (cp_fraction * subcarriers as f64 - INTEGER_SLACK)
            .ceil()
            .max(0.0);
        Self::with_cp_samples(
            carrier,
            bandwidth,
            subcarriers,
            symbols,
            cp_samples as usize,
        )
    }

    /// Chooses the cyclic prefix as `C = ceil(tau_max / (T / M))` samples.
    pub fn from_max_delay(
        carrier: f64,
        bandwidth: f64,
        subcarriers: usize,
        symbols: usize,
        max_delay: f64,
    ) -> Result<Self> {
        if !(max_delay.is_finite() && max_delay >= 0.0) {
            return Err(Error::InvalidFrame(format!(
                "maximum delay must be non-negative, got {max_delay}"
            )));
        }
        let sample = 1.0 / bandwidth;
        let cp_samples = (max_delay / sample - INTEGER_SLACK).ceil().max(0.0) as usize;
        Self::with_cp_samples(carrier, bandwidth, subcarriers, symbols, cp_samples)
    }

    pub fn with_cp_samples(
        carrier: f64,
        bandwidth: f64,
        subcarriers: usize,
        symbols: usize,
        cp_samples: usize,
    ) -> Result<Self> {
        if !(carrier.is_finite() && carrier > 0.0) {
            return Err(Error::InvalidFrame(format!(
                "carrier must be positive, got {carrier}"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidFrame(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if subcarriers < 2 || symbols < 2 {
            return Err(Error::InvalidFrame(format!(
                "need at least 2 subcarriers and 2 symbols, got M = {subcarriers}, N = {symbols}"
            )));
        }
        if cp_samples >= subcarriers {
            return Err(Error::InvalidFrame(format!(
                "cyclic prefix of {cp_samples} samples is not shorter than the symbol"
            )));
        }
        Ok(Self {
            carrier,
            bandwidth,
            subcarriers,
            symbols,
            cp_samples,
            p_avg: 1.0,
        })
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

    /// Same subcarrier spacing and carrier, different grid size, no CP.
    pub fn resized(&self, subcarriers: usize, symbols: usize) -> Result<Self> {
        let bandwidth = self.subcarrier_spacing() * subcarriers as f64;
        Self::with_cp_samples(self.carrier, bandwidth, subcarriers, symbols, 0)?
            .with_p_avg(self.p_avg)
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `M`.
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// `N`.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// `N * M`.
    pub fn grid_len(&self) -> usize {
        self.symbols * self.subcarriers
    }

    pub fn p_avg(&self) -> f64 {
        self.p_avg
    }

    /// `delta_f = B / M`.
    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth / self.subcarriers as f64
    }

    /// `T = 1 / delta_f`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing()
    }

    /// `T / M`.
    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth
    }

    /// Cyclic prefix length `C` in samples.
    pub fn cp_samples(&self) -> usize {
        self.cp_samples
    }

    pub fn cp_duration(&self) -> f64 {
        self.cp_samples as f64 * self.sample_period()
    }

    /// `T_o = T + T_cp`.
    pub fn ofdm_symbol_duration(&self) -> f64 {
        self.symbol_duration() + self.cp_duration()
    }

    pub fn ofdm_frame_duration(&self) -> f64 {
        self.symbols as f64 * self.ofdm_symbol_duration()
    }

    pub fn otfs_frame_duration(&self) -> f64 {
        self.symbols as f64 * self.symbol_duration()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier
    }

    /// Largest range whose echo stays inside the cyclic prefix.
    pub fn max_range_ofdm(&self) -> f64 {
        range_from_delay(self.cp_duration())
    }

    /// Largest range with a round-trip delay below one symbol.
    pub fn max_range_otfs(&self) -> f64 {
        range_from_delay(self.symbol_duration())
    }

    pub fn doppler_from_velocity(&self, velocity: f64) -> f64 {
        2.0 * velocity * self.carrier / SPEED_OF_LIGHT
    }

    pub fn velocity_from_doppler(&self, doppler: f64) -> f64 {
        doppler * SPEED_OF_LIGHT / (2.0 * self.carrier)
    }
}

/// Round-trip delay of a reflector at `range`.
pub fn delay_from_range(range: f64) -> f64 {
    2.0 * range / SPEED_OF_LIGHT
}

pub fn range_from_delay(delay: f64) -> f64 {
    delay * SPEED_OF_LIGHT / 2.0
}

pub fn kmh_to_mps(v: f64) -> f64 {
    v / 3.6
}

/// One propagation path, seen both as `(h, tau, nu)` and as `(r, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
    pub range: f64,
    pub velocity: f64,
}

impl Target {
    pub fn from_kinematics(
        range: f64,
        velocity: f64,
        gain: Complex64,
        cfg: &FrameConfig,
    ) -> Result<Self> {
        let target = Self {
            gain,
            delay: delay_from_range(range),
            doppler: cfg.doppler_from_velocity(velocity),
            range,
            velocity,
        };
        target.check_admissible(cfg)?;
        Ok(target)
    }

    pub fn from_delay_doppler(
        delay: f64,
        doppler: f64,
        gain: Complex64,
        cfg: &FrameConfig,
    ) -> Result<Self> {
        let target = Self {
            gain,
            delay,
            doppler,
            range: range_from_delay(delay),
            velocity: cfg.velocity_from_doppler(doppler),
        };
        target.check_admissible(cfg)?;
        Ok(target)
    }

    pub fn with_gain(mut self, gain: Complex64) -> Self {
        self.gain = gain;
        self
    }

    pub fn check_admissible(&self, cfg: &FrameConfig) -> Result<()> {
        check_admissible(self.delay, self.doppler, cfg)
    }
}

/// `0 <= tau < T` and `|nu| < delta_f`.
pub fn check_admissible(delay: f64, doppler: f64, cfg: &FrameConfig) -> Result<()> {
    if !(delay.is_finite() && doppler.is_finite()) {
        return Err(Error::Inadmissible(
            "delay and Doppler must be finite".into(),
        ));
    }
    let period = cfg.symbol_duration();
    if delay < 0.0 || delay >= period {
        return Err(Error::Inadmissible(format!(
            "delay {delay:e} s outside [0, {period:e}) s"
        )));
    }
    let spacing = cfg.subcarrier_spacing();
    if doppler.abs() >= spacing {
        return Err(Error::Inadmissible(format!(
            "|Doppler| {:e} Hz not below the subcarrier spacing {spacing:e} Hz",
            doppler.abs()
        )));
    }
    Ok(())
}
