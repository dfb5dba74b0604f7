//! Experiment description, read from a flat TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::frame::{kmh_to_mps, FrameConfig, Target};
use crate::link::RateGeometry;
use crate::otfs::PsiMode;
use crate::symbols::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Waveform {
    Fmcw,
    Ofdm,
    Otfs,
}

impl Waveform {
    pub const ALL: [Waveform; 3] = [Waveform::Ofdm, Waveform::Otfs, Waveform::Fmcw];

    pub fn name(&self) -> &'static str {
        match self {
            Waveform::Fmcw => "fmcw",
            Waveform::Ofdm => "ofdm",
            Waveform::Otfs => "otfs",
        }
    }

    /// Stable index mixed into per-trial seeds.
    pub fn seed_tag(&self) -> u64 {
        match self {
            Waveform::Ofdm => 0,
            Waveform::Otfs => 1,
            Waveform::Fmcw => 2,
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ofdm" => Ok(Waveform::Ofdm),
            "otfs" => Ok(Waveform::Otfs),
            "fmcw" => Ok(Waveform::Fmcw),
            other => Err(Error::InvalidArgument(format!(
                "waveforms: unknown waveform '{other}' (expected ofdm, otfs or fmcw)"
            ))),
        }
    }
}

fn default_constellation() -> String {
    "qpsk".into()
}

fn default_reduced_n() -> usize {
    8
}

fn default_reduced_m() -> usize {
    16
}

fn default_rate_geometry() -> String {
    "one-way".into()
}

fn default_rate_psi_mode() -> String {
    "exact".into()
}

/// Keys as they appear in the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    fc_hz: f64,
    bandwidth_hz: f64,
    m_subcarriers: usize,
    n_symbols: usize,
    cp_fraction: f64,
    range_m: f64,
    velocity_kmh: f64,
    rcs_m2: f64,
    antenna_gain: f64,
    waveforms: Vec<String>,
    snr_sweep_db: [f64; 3],
    trials: usize,
    oversample_n: usize,
    oversample_m: usize,
    seed: u64,
    output_csv: PathBuf,
    #[serde(default = "default_constellation")]
    constellation: String,
    #[serde(default)]
    noiseless: bool,
    #[serde(default)]
    snap_to_grid: bool,
    #[serde(default = "default_reduced_n")]
    reduced_n_symbols: usize,
    #[serde(default = "default_reduced_m")]
    reduced_m_subcarriers: usize,
    #[serde(default = "default_rate_geometry")]
    rate_geometry: String,
    #[serde(default = "default_rate_psi_mode")]
    rate_psi_mode: String,
}

/// Validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub frame: FrameConfig,
    /// OTFS and FMCW frame used for the Monte Carlo search.
    pub reduced_frame: FrameConfig,
    pub range: f64,
    pub velocity: f64,
    pub rcs: f64,
    pub antenna_gain: f64,
    pub waveforms: Vec<Waveform>,
    /// `[start, stop, step]` of the radar SNR in dB.
    pub snr_sweep_db: [f64; 3],
    pub trials: usize,
    pub oversample_n: usize,
    pub oversample_m: usize,
    pub seed: u64,
    pub output_csv: PathBuf,
    pub constellation: Constellation,
    /// Skip the noise draw; SNR axes still set the transmit power.
    pub noiseless: bool,
    /// Move the target to the nearest point of each waveform's grid.
    pub snap_to_grid: bool,
    pub rate_geometry: RateGeometry,
    pub rate_psi_mode: PsiMode,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config: {}", e.message())))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidArgument(msg) => {
                Error::InvalidArgument(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    fn from_raw(raw: RawSpec) -> Result<Self> {
        let frame = FrameConfig::new(
            raw.fc_hz,
            raw.bandwidth_hz,
            raw.m_subcarriers,
            raw.n_symbols,
            raw.cp_fraction,
        )?;
        let reduced_frame = frame.resized(raw.reduced_m_subcarriers, raw.reduced_n_symbols)?;
        let waveforms = raw
            .waveforms
            .iter()
            .map(|w| w.parse())
            .collect::<Result<Vec<Waveform>>>()?;
        if waveforms.is_empty() {
            return Err(Error::InvalidArgument("waveforms: list is empty".into()));
        }
        if raw.trials == 0 {
            return Err(Error::InvalidArgument("trials: must be at least 1".into()));
        }
        if raw.oversample_n == 0 || raw.oversample_m == 0 {
            return Err(Error::InvalidArgument(
                "oversample_n, oversample_m: must be at least 1".into(),
            ));
        }
        let [start, stop, step] = raw.snr_sweep_db;
        if !(start.is_finite() && stop.is_finite() && step.is_finite())
            || step <= 0.0
            || stop < start
        {
            return Err(Error::InvalidArgument(format!(
                "snr_sweep_db: need finite start <= stop and step > 0, got {:?}",
                raw.snr_sweep_db
            )));
        }
        for (key, v) in [
            ("rcs_m2", raw.rcs_m2),
            ("antenna_gain", raw.antenna_gain),
            ("range_m", raw.range_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{key}: must be positive, got {v}"
                )));
            }
        }
        let constellation: Constellation = raw.constellation.parse().map_err(|_| {
            Error::InvalidArgument(format!("constellation: unknown '{}'", raw.constellation))
        })?;
        let rate_geometry = raw.rate_geometry.parse().map_err(|_| {
            Error::InvalidArgument(format!("rate_geometry: unknown '{}'", raw.rate_geometry))
        })?;
        let rate_psi_mode = raw.rate_psi_mode.parse().map_err(|_| {
            Error::InvalidArgument(format!("rate_psi_mode: unknown '{}'", raw.rate_psi_mode))
        })?;
        let spec = Self {
            frame,
            reduced_frame,
            range: raw.range_m,
            velocity: kmh_to_mps(raw.velocity_kmh),
            rcs: raw.rcs_m2,
            antenna_gain: raw.antenna_gain,
            waveforms,
            snr_sweep_db: raw.snr_sweep_db,
            trials: raw.trials,
            oversample_n: raw.oversample_n,
            oversample_m: raw.oversample_m,
            seed: raw.seed,
            output_csv: raw.output_csv,
            constellation,
            noiseless: raw.noiseless,
            snap_to_grid: raw.snap_to_grid,
            rate_geometry,
            rate_psi_mode,
        };
        for &w in &spec.waveforms {
            spec.target(w)?;
        }
        Ok(spec)
    }

    /// Radar SNR points in dB, `start, start + step, ...` up to `stop`.
    pub fn snr_points_db(&self) -> Vec<f64> {
        let [start, stop, step] = self.snr_sweep_db;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    }

    /// Frame a waveform is simulated on.
    pub fn frame_for(&self, waveform: Waveform) -> &FrameConfig {
        match waveform {
            Waveform::Ofdm => &self.frame,
            Waveform::Otfs | Waveform::Fmcw => &self.reduced_frame,
        }
    }

    /// True target (unit gain) checked against the waveform's frame.
    pub fn target(&self, waveform: Waveform) -> Result<Target> {
        let cfg = self.frame_for(waveform);
        Target::from_kinematics(
            self.range,
            self.velocity,
            num_complex::Complex64::new(1.0, 0.0),
            cfg,
        )
        .map_err(|e| Error::InvalidArgument(format!("range_m/velocity_kmh for {waveform}: {e}")))
    }
}
