//! Monte Carlo sweep over the radar SNR.
//!
//! The transmit power is swept and both SNRs follow from the link budget,
//! so each row pairs a radar accuracy with the rate achieved at the same
//! power. Every trial draws from its own seed, derived from the master seed,
//! the waveform, the SNR index and the trial index, and per-point sums run
//! in trial order, so results do not depend on the number of workers.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentSpec, Waveform};
use crate::error::{Error, Result};
use crate::estimate::RadarEstimate;
use crate::fisher::CrlbReport;
use crate::fmcw::{self, FmcwConfig};
use crate::frame::{FrameConfig, Target};
use crate::grid::{EstimationGrid, SlowTime};
use crate::link::{compute_link_budget, rate_ofdm, ForwardChannel};
use crate::ofdm;
use crate::otfs::{self, PsiMode};
use crate::seed::{derive_seed, stream_rng, Stream};
use crate::symbols::{Domain, SymbolGrid};

/// Seed path component reserved for the symbols behind the numeric bounds.
const BOUND_SYMBOLS_TAG: u64 = u64::MAX;

/// One `(waveform, SNR)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub waveform: Waveform,
    pub snr_rad_db: f64,
    pub snr_com_db: f64,
    pub rmse_range: f64,
    pub rmse_velocity: f64,
    pub crlb_range: f64,
    pub crlb_velocity: f64,
    pub rate: f64,
    pub trials: usize,
    pub seed: u64,
    pub error: Option<String>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn linear_to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// Everything fixed for one waveform across the sweep.
struct Setup {
    waveform: Waveform,
    frame: FrameConfig,
    grid: EstimationGrid,
    fmcw: FmcwConfig,
    truth: Target,
    radar_gain: f64,
    com_gain: f64,
    otfs_psi: Option<nalgebra::DMatrix<Complex64>>,
}

fn nearest_bin(value: f64, first: f64, step: f64, bins: usize) -> usize {
    (((value - first) / step).round().max(0.0) as usize).min(bins - 1)
}

impl Setup {
    fn new(spec: &ExperimentSpec, waveform: Waveform) -> Result<Self> {
        let frame = *spec.frame_for(waveform);
        let fmcw = FmcwConfig::matched(&frame);
        let grid = match waveform {
            Waveform::Ofdm => EstimationGrid::oversampled(
                &frame,
                SlowTime::OfdmSymbol,
                spec.oversample_n,
                spec.oversample_m,
            )?,
            Waveform::Otfs => EstimationGrid::oversampled(
                &frame,
                SlowTime::Symbol,
                spec.oversample_n,
                spec.oversample_m,
            )?,
            Waveform::Fmcw => fmcw.oversampled_grid(spec.oversample_n, spec.oversample_m)?,
        };
        let mut truth = spec.target(waveform)?;
        if spec.snap_to_grid {
            let d = nearest_bin(truth.delay, 0.0, grid.delay_step(), grid.delay_bins());
            let j = nearest_bin(
                truth.doppler,
                grid.doppler(0),
                grid.doppler_step(),
                grid.doppler_bins(),
            );
            truth = Target::from_delay_doppler(grid.delay(d), grid.doppler(j), truth.gain, &frame)?;
        }
        let unit = compute_link_budget(
            frame.carrier(),
            spec.rcs,
            spec.antenna_gain,
            spec.range,
            1.0,
        )?;
        let otfs_psi = match waveform {
            Waveform::Otfs => {
                let link = ForwardChannel::from_target(&truth, unit.com_gain, spec.rate_geometry);
                Some(
                    otfs::build_psi(&frame, link.delay, link.doppler, spec.rate_psi_mode)?
                        .into_entries(),
                )
            }
            _ => None,
        };
        Ok(Self {
            waveform,
            frame,
            grid,
            fmcw,
            truth,
            radar_gain: unit.radar_gain,
            com_gain: unit.com_gain,
            otfs_psi,
        })
    }

    /// Frame at the transmit power giving radar SNR `snr_rad`.
    fn powered(&self, snr_rad: f64) -> Result<(FrameConfig, FmcwConfig, f64)> {
        let p_avg = snr_rad / self.radar_gain;
        Ok((
            self.frame.with_p_avg(p_avg)?,
            self.fmcw.with_p_avg(p_avg)?,
            self.com_gain * p_avg,
        ))
    }

    fn bound(&self, spec: &ExperimentSpec, snr_rad: f64) -> Result<CrlbReport> {
        let (frame, fmcw, _) = self.powered(snr_rad)?;
        match self.waveform {
            Waveform::Ofdm => ofdm::crlb_closed_form(&frame, snr_rad),
            Waveform::Otfs => {
                let seed = derive_seed(spec.seed, &[self.waveform.seed_tag(), BOUND_SYMBOLS_TAG]);
                let x = SymbolGrid::random(&frame, spec.constellation, Domain::DelayDoppler, seed);
                otfs::crlb_numeric_otfs(&frame, &x, &self.truth, snr_rad)
            }
            Waveform::Fmcw => fmcw::crlb_fmcw(&fmcw, &self.truth, snr_rad),
        }
    }

    fn rate(&self, snr_com: f64) -> Result<f64> {
        match (self.waveform, &self.otfs_psi) {
            (Waveform::Ofdm, _) => rate_ofdm(&self.frame, snr_com),
            (Waveform::Otfs, Some(psi)) => crate::link::rate_otfs(&self.frame, snr_com, psi),
            // radar-only waveform
            _ => Ok(0.0),
        }
    }

    /// Squared range and velocity errors of one trial.
    fn trial(&self, spec: &ExperimentSpec, snr_rad: f64, seed: u64) -> Result<(f64, f64)> {
        let (frame, fmcw, _) = self.powered(snr_rad)?;
        let phase = stream_rng(seed, Stream::Phase).random_range(0.0..TAU);
        let target = self
            .truth
            .with_gain(Complex64::from_polar(self.radar_gain.sqrt(), phase));
        let sigma = if spec.noiseless { 0.0 } else { 1.0 };
        let est: RadarEstimate = match self.waveform {
            Waveform::Ofdm => {
                let x = SymbolGrid::random(&frame, spec.constellation, Domain::TimeFrequency, seed);
                let obs = ofdm::synthesize_observation(&frame, &x, &target, sigma, seed)?;
                ofdm::ml_estimate(&obs, &self.grid)?
            }
            Waveform::Otfs => {
                let x = SymbolGrid::random(&frame, spec.constellation, Domain::DelayDoppler, seed);
                let obs = otfs::synthesize_observation_otfs(
                    &frame,
                    &x,
                    &target,
                    PsiMode::Approx,
                    sigma,
                    seed,
                )?;
                otfs::ml_estimate_otfs(&obs, &self.grid, PsiMode::Approx)?
            }
            Waveform::Fmcw => {
                let beat = fmcw::synthesize_beat_signal(&fmcw, &target, sigma, seed)?;
                fmcw::ml_estimate_fmcw(&beat, &self.grid)?
            }
        };
        Ok((
            (est.range - self.truth.range).powi(2),
            (est.velocity - self.truth.velocity).powi(2),
        ))
    }
}

fn failed_row(
    waveform: Waveform,
    snr_rad_db: f64,
    snr_com_db: f64,
    spec: &ExperimentSpec,
    e: &Error,
) -> ResultRow {
    ResultRow {
        waveform,
        snr_rad_db,
        snr_com_db,
        rmse_range: f64::NAN,
        rmse_velocity: f64::NAN,
        crlb_range: f64::NAN,
        crlb_velocity: f64::NAN,
        rate: f64::NAN,
        trials: spec.trials,
        seed: spec.seed,
        error: Some(e.to_string()),
    }
}

fn point(
    spec: &ExperimentSpec,
    setup: &Setup,
    snr_idx: usize,
    snr_rad_db: f64,
    monte_carlo: bool,
) -> Result<ResultRow> {
    let snr_rad = db_to_linear(snr_rad_db);
    let (_, _, snr_com) = setup.powered(snr_rad)?;
    let bound = setup.bound(spec, snr_rad)?;
    let rate = setup.rate(snr_com)?;
    let (rmse_range, rmse_velocity) = if monte_carlo {
        let errors: Vec<(f64, f64)> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_seed(
                    spec.seed,
                    &[setup.waveform.seed_tag(), snr_idx as u64, trial as u64],
                );
                setup.trial(spec, snr_rad, seed)
            })
            .collect::<Result<_>>()?;
        let (mut sr, mut sv) = (0.0, 0.0);
        for (r, v) in &errors {
            sr += r;
            sv += v;
        }
        let n = spec.trials as f64;
        ((sr / n).sqrt(), (sv / n).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ResultRow {
        waveform: setup.waveform,
        snr_rad_db,
        snr_com_db: linear_to_db(snr_com),
        rmse_range,
        rmse_velocity,
        crlb_range: bound.std_range(),
        crlb_velocity: bound.std_velocity(),
        rate,
        trials: if monte_carlo { spec.trials } else { 0 },
        seed: spec.seed,
        error: None,
    })
}

fn sweep(spec: &ExperimentSpec, monte_carlo: bool) -> Vec<ResultRow> {
    let points = spec.snr_points_db();
    let mut rows = Vec::new();
    for &waveform in &spec.waveforms {
        let setup = Setup::new(spec, waveform);
        for (idx, &db) in points.iter().enumerate() {
            let row = setup
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|s| point(spec, s, idx, db, monte_carlo))
                .unwrap_or_else(|e| {
                    log::warn!("{waveform} at {db} dB failed: {e}");
                    let snr_com_db = linear_to_db(db_to_linear(db) * com_over_rad(spec, waveform));
                    failed_row(waveform, db, snr_com_db, spec, &e)
                });
            rows.push(row);
        }
    }
    sort_rows(&mut rows);
    rows
}

fn com_over_rad(spec: &ExperimentSpec, waveform: Waveform) -> f64 {
    compute_link_budget(
        spec.frame_for(waveform).carrier(),
        spec.rcs,
        spec.antenna_gain,
        spec.range,
        1.0,
    )
    .map(|b| b.com_gain / b.radar_gain)
    .unwrap_or(f64::NAN)
}

/// Orders rows by waveform name, then radar SNR.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.waveform
            .name()
            .cmp(b.waveform.name())
            .then(a.snr_rad_db.total_cmp(&b.snr_rad_db))
    });
}

/// Full Monte Carlo sweep on the current rayon pool. Failures are reported
/// per row instead of aborting the sweep.
pub fn run_experiment(spec: &ExperimentSpec) -> Vec<ResultRow> {
    sweep(spec, true)
}

/// [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(
    spec: &ExperimentSpec,
    workers: usize,
) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    Ok(pool.install(|| run_experiment(spec)))
}

/// Bounds and rates only; RMSE fields are NaN and `trials` is 0.
pub fn bounds_only(spec: &ExperimentSpec) -> Vec<ResultRow> {
    sweep(spec, false)
}
