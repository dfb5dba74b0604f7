//! Data symbol grids and constellations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::frame::FrameConfig;
use crate::seed::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Qpsk,
    Qam16,
    /// Unit-modulus symbols with uniformly random phase.
    ConstantEnvelope,
}

impl Constellation {
    pub fn name(&self) -> &'static str {
        match self {
            Constellation::Qpsk => "qpsk",
            Constellation::Qam16 => "16qam",
            Constellation::ConstantEnvelope => "constant-envelope",
        }
    }

    pub fn is_constant_modulus(&self) -> bool {
        !matches!(self, Constellation::Qam16)
    }

    /// Draws one symbol with unit average power.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            Constellation::Qpsk => {
                let q: u32 = rng.random_range(0..4);
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (2 * q + 1) as f64)
            }
            Constellation::Qam16 => {
                const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
                let i = LEVELS[rng.random_range(0..4)];
                let q = LEVELS[rng.random_range(0..4)];
                Complex64::new(i, q) / 10f64.sqrt()
            }
            Constellation::ConstantEnvelope => {
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(1.0, phase)
            }
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            "16qam" | "qam16" | "16-qam" => Ok(Constellation::Qam16),
            "constant-envelope" | "constant" | "ce" => Ok(Constellation::ConstantEnvelope),
            other => Err(Error::UnknownConstellation(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `x[n, m]`: symbol index by subcarrier (OFDM, and OTFS after ISFFT).
    TimeFrequency,
    /// `x[k, l]`: Doppler index by delay index (OTFS).
    DelayDoppler,
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::TimeFrequency => "time-frequency",
            Domain::DelayDoppler => "delay-Doppler",
        }
    }
}

/// `N x M` complex grid, row-major with flat index `row * M + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    domain: Domain,
}

impl SymbolGrid {
    pub fn from_vec(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
        domain: Domain,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            domain,
        })
    }

    pub fn zeros(rows: usize, cols: usize, domain: Domain) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
            domain,
        }
    }

    /// Uniform random symbols of `constellation`, scaled to `cfg.p_avg()`.
    pub fn random(
        cfg: &FrameConfig,
        constellation: Constellation,
        domain: Domain,
        seed: u64,
    ) -> Self {
        let mut rng = stream_rng(seed, Stream::Symbols);
        let amp = cfg.p_avg().sqrt();
        let data = (0..cfg.grid_len())
            .map(|_| constellation.draw(&mut rng) * amp)
            .collect();
        Self {
            rows: cfg.symbols(),
            cols: cfg.subcarriers(),
            data,
            domain,
        }
    }

    /// Every symbol equal to `sqrt(P_avg)`.
    pub fn constant(cfg: &FrameConfig, domain: Domain) -> Self {
        Self {
            rows: cfg.symbols(),
            cols: cfg.subcarriers(),
            data: vec![Complex64::new(cfg.p_avg().sqrt(), 0.0); cfg.grid_len()],
            domain,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.norm()).collect()
    }

    /// `(1 / NM) sum |x|^2`.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub(crate) fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain.name(),
                got: self.domain.name(),
            });
        }
        Ok(())
    }

    pub fn expect_shape(&self, cfg: &FrameConfig) -> Result<()> {
        if self.rows != cfg.symbols() || self.cols != cfg.subcarriers() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", cfg.symbols(), cfg.subcarriers()),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        Ok(())
    }
}
