//! Link budget and achievable rates.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, Target, SPEED_OF_LIGHT};
use crate::otfs::{build_psi, PsiMode};

/// Free-space gains of the radar round trip and the one-way data link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub wavelength: f64,
    pub rcs: f64,
    pub antenna_gain: f64,
    pub distance: f64,
    /// `|h0|^2 = lambda^2 sigma G^2 / ((4 pi)^3 r^4)`.
    pub radar_gain: f64,
    /// `|g0|^2 = lambda^2 G^2 / ((4 pi)^2 r^2)`.
    pub com_gain: f64,
    pub p_avg: f64,
    pub snr_rad: f64,
    pub snr_com: f64,
}

pub fn compute_link_budget(
    carrier: f64,
    rcs: f64,
    antenna_gain: f64,
    distance: f64,
    p_avg: f64,
) -> Result<LinkBudget> {
    for (name, v) in [
        ("carrier", carrier),
        ("rcs", rcs),
        ("antenna gain", antenna_gain),
        ("distance", distance),
        ("P_avg", p_avg),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let wavelength = SPEED_OF_LIGHT / carrier;
    let four_pi = 4.0 * PI;
    let radar_gain =
        wavelength.powi(2) * rcs * antenna_gain.powi(2) / (four_pi.powi(3) * distance.powi(4));
    let com_gain = wavelength.powi(2) * antenna_gain.powi(2) / (four_pi.powi(2) * distance.powi(2));
    Ok(LinkBudget {
        wavelength,
        rcs,
        antenna_gain,
        distance,
        radar_gain,
        com_gain,
        p_avg,
        snr_rad: radar_gain * p_avg,
        snr_com: com_gain * p_avg,
    })
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "SNR must be non-negative, got {snr}"
        )));
    }
    Ok(())
}

/// `T / (T + T_cp) log2(1 + SNR)`.
pub fn rate_ofdm(cfg: &FrameConfig, snr_com: f64) -> Result<f64> {
    check_snr(snr_com)?;
    let efficiency = cfg.symbol_duration() / cfg.ofdm_symbol_duration();
    Ok(efficiency * snr_com.ln_1p() / std::f64::consts::LN_2)
}

/// `log2 det(I + SNR Psi Psi^H) / (NM)` from the Cholesky factor of the
/// Hermitian positive-definite argument.
pub fn rate_otfs(cfg: &FrameConfig, snr_com: f64, psi: &DMatrix<Complex64>) -> Result<f64> {
    check_snr(snr_com)?;
    let len = cfg.grid_len();
    if psi.nrows() != len || psi.ncols() != len {
        return Err(Error::DimensionMismatch {
            expected: format!("{len}x{len}"),
            got: format!("{}x{}", psi.nrows(), psi.ncols()),
        });
    }
    if psi.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("Psi"));
    }
    if snr_com == 0.0 {
        return Ok(0.0);
    }
    let mut gram = psi * psi.adjoint() * Complex64::new(snr_com, 0.0);
    for i in 0..len {
        gram[(i, i)] += 1.0;
    }
    let chol = Cholesky::new(gram).ok_or(Error::NonFinite("I + SNR Psi Psi^H"))?;
    let l = chol.l_dirty();
    let log2det: f64 = (0..len).map(|i| 2.0 * l[(i, i)].re.log2()).sum();
    Ok(log2det / len as f64)
}

/// Which delay and Doppler shape the data link's `Psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateGeometry {
    /// Receiver at the target: half the round-trip delay and Doppler.
    OneWay,
    /// Same shifts as the radar echo.
    RoundTrip,
}

impl std::str::FromStr for RateGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one-way" | "oneway" => Ok(RateGeometry::OneWay),
            "round-trip" | "roundtrip" => Ok(RateGeometry::RoundTrip),
            other => Err(Error::InvalidArgument(format!(
                "unknown rate geometry '{other}'"
            ))),
        }
    }
}

/// Forward data channel `g0 exp(j pi nu0 t) delta(tau - tau0/2)` for a
/// receiver co-located with the radar target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardChannel {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
}

impl ForwardChannel {
    pub fn from_target(target: &Target, com_gain: f64, geometry: RateGeometry) -> Self {
        let div = match geometry {
            RateGeometry::OneWay => 2.0,
            RateGeometry::RoundTrip => 1.0,
        };
        Self {
            gain: Complex64::new(com_gain.sqrt(), 0.0),
            delay: target.delay / div,
            doppler: target.doppler / div,
        }
    }

    /// OTFS rate through this channel's `Psi`.
    pub fn otfs_rate(&self, cfg: &FrameConfig, snr_com: f64, mode: PsiMode) -> Result<f64> {
        let psi = build_psi(cfg, self.delay, self.doppler, mode)?;
        rate_otfs(cfg, snr_com, psi.entries())
    }
}
