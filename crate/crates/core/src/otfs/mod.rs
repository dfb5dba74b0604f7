//! OTFS radar: delay-Doppler observation model, generalized-likelihood ML
//! estimation and numeric bounds.
//!
//! The transmitter sends a delay-Doppler frame `x` and observes
//! `y = sum_p h'_p Psi(tau_p, nu_p) x + w`, where `h' = h exp(j2pi nu tau)`.

mod ambiguity;
mod crlb;
mod estimate;
mod operator;
mod psi;

pub use ambiguity::{cross_ambiguity_rect, delay_tap, PsiMode};
pub use crlb::{crlb_numeric_otfs, fisher_matrix_otfs};
pub use estimate::{ml_estimate_otfs, ml_estimate_otfs_dense, statistic_map, statistic_map_dense};
pub use operator::PsiOperator;
pub use psi::{build_psi, dirichlet, psi_derivatives, CrossTalkMatrix, DENSE_LIMIT};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, Target};
use crate::seed::add_noise;
use crate::symbols::{Domain, SymbolGrid};

/// Gain seen by the delay-Doppler model, `h exp(j2pi nu tau)`.
pub fn gain_prime(target: &Target) -> Complex64 {
    target.gain * Complex64::from_polar(1.0, TAU * target.doppler * target.delay)
}

/// Received delay-Doppler frame next to the known transmitted one.
#[derive(Debug, Clone, PartialEq)]
pub struct OtfsObservation {
    cfg: FrameConfig,
    x: SymbolGrid,
    y: Vec<Complex64>,
}

impl OtfsObservation {
    pub fn new(cfg: FrameConfig, x: SymbolGrid, y: Vec<Complex64>) -> Result<Self> {
        x.expect_domain(Domain::DelayDoppler)?;
        x.expect_shape(&cfg)?;
        if y.len() != cfg.grid_len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} samples", cfg.grid_len()),
                got: format!("{}", y.len()),
            });
        }
        Ok(Self { cfg, x, y })
    }

    pub fn cfg(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn symbols(&self) -> &SymbolGrid {
        &self.x
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.y
    }
}

/// `y = h' Psi x + w` for a single target.
pub fn synthesize_observation_otfs(
    cfg: &FrameConfig,
    x: &SymbolGrid,
    target: &Target,
    mode: PsiMode,
    noise_sigma: f64,
    seed: u64,
) -> Result<OtfsObservation> {
    synthesize_multi_target(
        cfg,
        x,
        std::slice::from_ref(target),
        mode,
        noise_sigma,
        seed,
    )
}

/// Superposition of several paths plus noise.
pub fn synthesize_multi_target(
    cfg: &FrameConfig,
    x: &SymbolGrid,
    targets: &[Target],
    mode: PsiMode,
    noise_sigma: f64,
    seed: u64,
) -> Result<OtfsObservation> {
    x.expect_domain(Domain::DelayDoppler)?;
    x.expect_shape(cfg)?;
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sigma {noise_sigma}")));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); cfg.grid_len()];
    for target in targets {
        target.check_admissible(cfg)?;
        let gain = gain_prime(target);
        let echo =
            PsiOperator::new(cfg, target.delay, target.doppler, mode)?.apply(x.as_slice())?;
        for (acc, v) in y.iter_mut().zip(echo) {
            *acc += gain * v;
        }
    }
    add_noise(&mut y, noise_sigma, seed);
    OtfsObservation::new(*cfg, x.clone(), y)
}
