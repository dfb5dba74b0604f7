//! Discretized delay/Doppler search set.
//!
//! Delay bins sit at `i / (M' delta_f)` for `i = 0, 1, ...` and Doppler bins
//! at `j / (N' T_s)` for signed integer `j`, where `T_s` is the slow-time
//! period of the waveform (`T_o` for OFDM, `T` for OTFS and FMCW). `N'` and
//! `M'` are also the zero-padded transform lengths of the fast periodogram.

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, INTEGER_SLACK};

/// Which period sets the Doppler step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlowTime {
    /// `T_o = T + T_cp`.
    OfdmSymbol,
    /// `T`.
    Symbol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationGrid {
    slow_period: f64,
    spacing: f64,
    carrier: f64,
    doppler_len: usize,
    delay_len: usize,
    delay_bins: usize,
    doppler_first: i64,
    doppler_bins: usize,
}

impl EstimationGrid {
    /// Grid covering `[0, max_delay) x [-max_doppler, max_doppler]`.
    ///
    /// `doppler_len = N'` and `delay_len = M'` must be at least `N` and `M`.
    pub fn new(
        cfg: &FrameConfig,
        slow: SlowTime,
        doppler_len: usize,
        delay_len: usize,
        max_delay: f64,
        max_doppler: f64,
    ) -> Result<Self> {
        let mut grid = Self::unambiguous(cfg, slow, doppler_len, delay_len)?;
        if !(max_delay.is_finite() && max_delay >= 0.0) {
            return Err(Error::InvalidArgument(format!("max delay {max_delay}")));
        }
        if !(max_doppler.is_finite() && max_doppler >= 0.0) {
            return Err(Error::InvalidArgument(format!("max Doppler {max_doppler}")));
        }
        grid.delay_bins = ((max_delay / grid.delay_step() - INTEGER_SLACK).ceil() as usize).max(1);
        let half = (max_doppler / grid.doppler_step() + INTEGER_SLACK).floor() as i64;
        grid.doppler_first = -half;
        grid.doppler_bins = (2 * half + 1) as usize;
        Ok(grid)
    }

    /// One full period in both axes: delays `[0, T)` and `N'` Doppler bins
    /// centred on zero.
    pub fn unambiguous(
        cfg: &FrameConfig,
        slow: SlowTime,
        doppler_len: usize,
        delay_len: usize,
    ) -> Result<Self> {
        let slow_period = match slow {
            SlowTime::OfdmSymbol => cfg.ofdm_symbol_duration(),
            SlowTime::Symbol => cfg.symbol_duration(),
        };
        Self::from_axes(
            slow_period,
            cfg.subcarrier_spacing(),
            cfg.carrier(),
            (cfg.symbols(), cfg.subcarriers()),
            doppler_len,
            delay_len,
        )
    }

    /// Oversampling factors instead of transform lengths.
    pub fn oversampled(
        cfg: &FrameConfig,
        slow: SlowTime,
        doppler_factor: usize,
        delay_factor: usize,
    ) -> Result<Self> {
        Self::unambiguous(
            cfg,
            slow,
            doppler_factor * cfg.symbols(),
            delay_factor * cfg.subcarriers(),
        )
    }

    pub(crate) fn from_axes(
        slow_period: f64,
        spacing: f64,
        carrier: f64,
        (rows, cols): (usize, usize),
        doppler_len: usize,
        delay_len: usize,
    ) -> Result<Self> {
        if doppler_len < rows || delay_len < cols {
            return Err(Error::Undersampled(format!(
                "need N' >= {rows} and M' >= {cols}, got N' = {doppler_len}, M' = {delay_len}"
            )));
        }
        let half = (doppler_len / 2) as i64;
        Ok(Self {
            slow_period,
            spacing,
            carrier,
            doppler_len,
            delay_len,
            delay_bins: delay_len,
            doppler_first: -half,
            doppler_bins: doppler_len,
        })
    }

    pub fn delay_step(&self) -> f64 {
        1.0 / (self.delay_len as f64 * self.spacing)
    }

    pub fn doppler_step(&self) -> f64 {
        1.0 / (self.doppler_len as f64 * self.slow_period)
    }

    pub fn delay_bins(&self) -> usize {
        self.delay_bins
    }

    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    pub fn len(&self) -> usize {
        self.delay_bins * self.doppler_bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `N'`.
    pub fn doppler_len(&self) -> usize {
        self.doppler_len
    }

    /// `M'`.
    pub fn delay_len(&self) -> usize {
        self.delay_len
    }

    pub fn slow_period(&self) -> f64 {
        self.slow_period
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn delay(&self, bin: usize) -> f64 {
        bin as f64 / (self.delay_len as f64 * self.spacing)
    }

    /// Signed integer Doppler index of axis position `bin`.
    pub fn doppler_index(&self, bin: usize) -> i64 {
        self.doppler_first + bin as i64
    }

    pub fn doppler(&self, bin: usize) -> f64 {
        self.doppler_index(bin) as f64 / (self.doppler_len as f64 * self.slow_period)
    }

    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.delay_bins).map(|i| self.delay(i))
    }

    pub fn dopplers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.doppler_bins).map(|j| self.doppler(j))
    }

    /// Flat index of `(delay bin, Doppler bin)`; delay-major.
    pub fn flat(&self, delay_bin: usize, doppler_bin: usize) -> usize {
        delay_bin * self.doppler_bins + doppler_bin
    }

    /// First maximum in delay-major order, so ties go to the smallest delay
    /// index and then the smallest Doppler index. NaN entries are skipped.
    pub fn argmax(&self, values: &[f64]) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((i, v)),
            }
        }
        best.map(|(i, _)| (i / self.doppler_bins, i % self.doppler_bins))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one() -> FrameConfig {
        FrameConfig::new(5.89e9, 10e6, 64, 50, 0.25).unwrap()
    }

    #[test]
    fn table_one_delay_step() {
        let cfg = table_one();
        let g = EstimationGrid::new(&cfg, SlowTime::OfdmSymbol, 50, 64, cfg.cp_duration(), 10e3)
            .unwrap();
        // 1 / (64 * 156.25 kHz)
        assert!((g.delay_step() - 0.1e-6).abs() < 1e-18);
        assert!((g.doppler_step() - 1.0 / (50.0 * 8e-6)).abs() < 1e-9);
        assert_eq!(g.delay_bins(), 16);
        // floor(10 kHz / 2.5 kHz) = 4 bins each side
        assert_eq!(g.doppler_bins(), 9);
        assert!((g.doppler(0) + 10e3).abs() < 1e-9);
    }

    #[test]
    fn oversampling_scales_step() {
        let cfg = table_one();
        let a = EstimationGrid::unambiguous(&cfg, SlowTime::OfdmSymbol, 50, 64).unwrap();
        let b = EstimationGrid::unambiguous(&cfg, SlowTime::OfdmSymbol, 200, 64).unwrap();
        assert!((a.doppler_step() / b.doppler_step() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_delay_range_keeps_one_bin() {
        let cfg = table_one();
        let g = EstimationGrid::new(&cfg, SlowTime::Symbol, 50, 64, 0.0, 0.0).unwrap();
        assert_eq!(g.delay_bins(), 1);
        assert_eq!(g.doppler_bins(), 1);
        assert_eq!(g.delay(0), 0.0);
        assert!(!g.is_empty());
    }

    #[test]
    fn undersampling_rejected() {
        let cfg = table_one();
        assert!(matches!(
            EstimationGrid::unambiguous(&cfg, SlowTime::Symbol, 49, 64),
            Err(Error::Undersampled(_))
        ));
        assert!(EstimationGrid::unambiguous(&cfg, SlowTime::Symbol, 50, 63).is_err());
    }

    #[test]
    fn axes_cover_requested_region() {
        let cfg = table_one();
        let tau_max = 1.23e-6;
        let nu_max = 7.7e3;
        let g = EstimationGrid::new(&cfg, SlowTime::OfdmSymbol, 100, 128, tau_max, nu_max).unwrap();
        let last_delay = g.delay(g.delay_bins() - 1);
        assert!(last_delay < tau_max && last_delay + g.delay_step() >= tau_max);
        assert!(g.dopplers().all(|nu| nu.abs() <= nu_max));
        assert!(g.doppler(0) - g.doppler_step() < -nu_max);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let cfg = table_one();
        let g = EstimationGrid::new(&cfg, SlowTime::Symbol, 50, 64, 0.25e-6, 3.2e3).unwrap();
        assert_eq!((g.delay_bins(), g.doppler_bins()), (3, 3));
        let v = [0.0, 1.0, 0.0, 1.0, f64::NAN, 1.0, 0.0, 0.0, 0.0];
        assert_eq!(g.argmax(&v), Some((0, 1)));
        assert_eq!(g.argmax(&[f64::NAN; 9]), None);
    }
}
