//! Browser bindings: OFDM periodogram heatmap, range/velocity bounds and
//! achievable rates for a Table I style frame. The `*_impl` functions are
//! plain Rust so they can be tested natively.

use jrc_core::fmcw::{crlb_fmcw, FmcwConfig};
use jrc_core::frame::{kmh_to_mps, Target};
use jrc_core::grid::{EstimationGrid, SlowTime};
use jrc_core::link::{rate_ofdm, rate_otfs, ForwardChannel, RateGeometry};
use jrc_core::ofdm::{closed_form_bound, ml_estimate, periodogram, synthesize_observation};
use jrc_core::otfs::{build_psi, crlb_numeric_otfs, PsiMode};
use jrc_core::symbols::{Constellation, Domain, SymbolGrid};
use jrc_core::FrameConfig;
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

const CARRIER: f64 = 5.89e9;
const BANDWIDTH: f64 = 10e6;
const CP_FRACTION: f64 = 0.25;
/// Largest frame the rate and OTFS bound panels accept; keeps the dense
/// `NM x NM` work interactive.
const DENSE_CELLS: usize = 256;

fn frame(symbols: usize, subcarriers: usize, cp: f64) -> Result<FrameConfig, String> {
    FrameConfig::new(CARRIER, BANDWIDTH, subcarriers, symbols, cp).map_err(|e| e.to_string())
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `|Z|^2` over delay (rows) by Doppler (columns), normalized to its peak,
/// with the argmax.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Heatmap {
    delay_bins: usize,
    doppler_bins: usize,
    power: Vec<f64>,
    max_range: f64,
    max_velocity: f64,
    est_range: f64,
    est_velocity: f64,
}

#[wasm_bindgen]
impl Heatmap {
    #[wasm_bindgen(getter)]
    pub fn delay_bins(&self) -> usize {
        self.delay_bins
    }

    #[wasm_bindgen(getter)]
    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    /// Row-major `delay_bins x doppler_bins`, in dB relative to the peak.
    #[wasm_bindgen(getter)]
    pub fn power_db(&self) -> Vec<f64> {
        self.power.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    /// Velocity axis spans `[-max_velocity, max_velocity]`.
    #[wasm_bindgen(getter)]
    pub fn max_velocity(&self) -> f64 {
        self.max_velocity
    }

    #[wasm_bindgen(getter)]
    pub fn est_range(&self) -> f64 {
        self.est_range
    }

    #[wasm_bindgen(getter)]
    pub fn est_velocity(&self) -> f64 {
        self.est_velocity
    }
}

pub fn ofdm_heatmap_impl(
    range: f64,
    velocity_kmh: f64,
    snr_db: f64,
    oversample: usize,
    seed: u64,
) -> Result<Heatmap, String> {
    let cfg = frame(50, 64, CP_FRACTION)?;
    if !(1..=16).contains(&oversample) {
        return Err(format!("oversampling must be 1..16, got {oversample}"));
    }
    let gain = Complex64::new(linear(snr_db).sqrt(), 0.0);
    let target = Target::from_kinematics(range, kmh_to_mps(velocity_kmh), gain, &cfg)
        .map_err(|e| e.to_string())?;
    // Show the CP-limited delays and a Doppler window around the target.
    let max_doppler = (4.0 * target.doppler.abs()).max(5e3);
    let grid = EstimationGrid::new(
        &cfg,
        SlowTime::OfdmSymbol,
        oversample * cfg.symbols(),
        oversample * cfg.subcarriers(),
        cfg.cp_duration(),
        max_doppler,
    )
    .map_err(|e| e.to_string())?;
    let x = SymbolGrid::random(&cfg, Constellation::Qpsk, Domain::TimeFrequency, seed);
    let obs = synthesize_observation(&cfg, &x, &target, 1.0, seed).map_err(|e| e.to_string())?;
    let power = periodogram(&obs, &grid).map_err(|e| e.to_string())?.power();
    let peak = power.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let est = ml_estimate(&obs, &grid).map_err(|e| e.to_string())?;
    Ok(Heatmap {
        delay_bins: grid.delay_bins(),
        doppler_bins: grid.doppler_bins(),
        power: power.iter().map(|p| db(p.max(1e-30) / peak)).collect(),
        max_range: jrc_core::frame::range_from_delay(cfg.cp_duration()),
        max_velocity: cfg.velocity_from_doppler(grid.doppler(grid.doppler_bins() - 1)),
        est_range: est.range,
        est_velocity: est.velocity,
    })
}

/// Noisy OFDM observation of one target and its periodogram.
#[wasm_bindgen]
pub fn ofdm_heatmap(
    range: f64,
    velocity_kmh: f64,
    snr_db: f64,
    oversample: usize,
    seed: u32,
) -> Result<Heatmap, JsError> {
    ofdm_heatmap_impl(range, velocity_kmh, snr_db, oversample, seed.into())
        .map_err(|e| JsError::new(&e))
}

fn sweep(start_db: f64, stop_db: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=200).contains(&points)
        || stop_db.partial_cmp(&start_db) != Some(std::cmp::Ordering::Greater)
    {
        return Err(format!(
            "bad sweep {start_db}..{stop_db} dB with {points} points"
        ));
    }
    let step = (stop_db - start_db) / (points - 1) as f64;
    Ok((0..points).map(|i| start_db + i as f64 * step).collect())
}

fn check_dense(symbols: usize, subcarriers: usize) -> Result<(), String> {
    if symbols * subcarriers > DENSE_CELLS {
        return Err(format!(
            "frame {symbols} x {subcarriers} too large for the browser; keep N M <= {DENSE_CELLS}"
        ));
    }
    Ok(())
}

/// Per SNR point: `[snr_db, ofdm_range, ofdm_velocity, otfs_range,
/// otfs_velocity, fmcw_range, fmcw_velocity]`, square-root bounds in m and
/// m/s. All three use the same `N x M` time-bandwidth resource without CP.
pub fn crlb_curves_impl(
    symbols: usize,
    subcarriers: usize,
    start_db: f64,
    stop_db: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    check_dense(symbols, subcarriers)?;
    let cfg = frame(symbols, subcarriers, 0.0)?;
    let target = Target::from_kinematics(20.0, kmh_to_mps(80.0), Complex64::new(1.0, 0.0), &cfg)
        .map_err(|e| e.to_string())?;
    let x = SymbolGrid::random(&cfg, Constellation::Qpsk, Domain::DelayDoppler, 1);
    let fmcw = FmcwConfig::matched(&cfg);
    let mut out = Vec::with_capacity(7 * points);
    for snr_db in sweep(start_db, stop_db, points)? {
        let snr = linear(snr_db);
        let ofdm = closed_form_bound(
            symbols,
            subcarriers,
            snr,
            cfg.symbol_duration(),
            cfg.subcarrier_spacing(),
            CARRIER,
        )
        .map_err(|e| e.to_string())?;
        let otfs = crlb_numeric_otfs(&cfg, &x, &target, snr).map_err(|e| e.to_string())?;
        let fm = crlb_fmcw(&fmcw, &target, snr).map_err(|e| e.to_string())?;
        out.extend([
            snr_db,
            ofdm.std_range(),
            ofdm.std_velocity(),
            otfs.std_range(),
            otfs.std_velocity(),
            fm.std_range(),
            fm.std_velocity(),
        ]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn crlb_curves(
    symbols: usize,
    subcarriers: usize,
    start_db: f64,
    stop_db: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    crlb_curves_impl(symbols, subcarriers, start_db, stop_db, points).map_err(|e| JsError::new(&e))
}

/// Per SNR point: `[snr_db, ofdm_rate, otfs_rate]` in bits/s/Hz. OTFS goes
/// through the one-way channel of a target at `range` and `velocity_kmh`.
pub fn rate_curves_impl(
    symbols: usize,
    subcarriers: usize,
    range: f64,
    velocity_kmh: f64,
    start_db: f64,
    stop_db: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    check_dense(symbols, subcarriers)?;
    let cfg = frame(symbols, subcarriers, CP_FRACTION)?;
    let target = Target::from_kinematics(
        range,
        kmh_to_mps(velocity_kmh),
        Complex64::new(1.0, 0.0),
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let channel = ForwardChannel::from_target(&target, 1.0, RateGeometry::OneWay);
    let psi = build_psi(&cfg, channel.delay, channel.doppler, PsiMode::Exact)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * points);
    for snr_db in sweep(start_db, stop_db, points)? {
        let snr = linear(snr_db);
        let ofdm = rate_ofdm(&cfg, snr).map_err(|e| e.to_string())?;
        let otfs = rate_otfs(&cfg, snr, psi.entries()).map_err(|e| e.to_string())?;
        out.extend([snr_db, ofdm, otfs]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn rate_curves(
    symbols: usize,
    subcarriers: usize,
    range: f64,
    velocity_kmh: f64,
    start_db: f64,
    stop_db: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    rate_curves_impl(
        symbols,
        subcarriers,
        range,
        velocity_kmh,
        start_db,
        stop_db,
        points,
    )
    .map_err(|e| JsError::new(&e))
}
