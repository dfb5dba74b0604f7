//! Numeric Cramér-Rao bound for the delay-Doppler model
//! `s = alpha exp(j phi) Psi(tau, nu) x` with unit-variance noise.

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::ambiguity::PsiMode;
use super::gain_prime;
use super::operator::PsiOperator;
use crate::error::{Error, Result};
use crate::fisher::{fisher_information, invert_fisher, CrlbReport, CrlbSource};
use crate::frame::{FrameConfig, Target};
use crate::symbols::{Domain, SymbolGrid};

/// Fisher matrix over `(alpha, phi, nu, tau)` for `h' = alpha exp(j phi)`.
///
/// The gain magnitude is set so that `|h|^2 P_avg = snr_rad`; the target's
/// gain only contributes its phase.
pub fn fisher_matrix_otfs(
    cfg: &FrameConfig,
    x: &SymbolGrid,
    target: &Target,
    snr_rad: f64,
) -> Result<Matrix4<f64>> {
    if !(snr_rad > 0.0 && snr_rad.is_finite()) {
        return Err(Error::NonPositiveSnr(snr_rad));
    }
    x.expect_domain(Domain::DelayDoppler)?;
    x.expect_shape(cfg)?;
    target.check_admissible(cfg)?;
    let alpha = (snr_rad / cfg.p_avg()).sqrt();
    let phase = gain_prime(target).arg();
    let h = Complex64::from_polar(alpha, phase);

    let op = PsiOperator::new(cfg, target.delay, target.doppler, PsiMode::Approx)?;
    let u = op.apply(x.as_slice())?;
    let d_alpha: Vec<Complex64> = u
        .iter()
        .map(|v| v * Complex64::from_polar(1.0, phase))
        .collect();
    let d_phase: Vec<Complex64> = u.iter().map(|v| Complex64::new(0.0, 1.0) * h * v).collect();
    let d_nu: Vec<Complex64> = op
        .apply_doppler_derivative(x.as_slice())?
        .into_iter()
        .map(|v| h * v)
        .collect();
    let d_tau: Vec<Complex64> = op
        .apply_delay_derivative(x.as_slice())?
        .into_iter()
        .map(|v| h * v)
        .collect();
    Ok(fisher_information([&d_alpha, &d_phase, &d_nu, &d_tau], 1.0))
}

/// Diagonal of the inverse Fisher matrix, with `f = T nu` and
/// `t = delta_f tau`.
pub fn crlb_numeric_otfs(
    cfg: &FrameConfig,
    x: &SymbolGrid,
    target: &Target,
    snr_rad: f64,
) -> Result<CrlbReport> {
    let inv = invert_fisher(&fisher_matrix_otfs(cfg, x, target, snr_rad)?)?;
    Ok(CrlbReport::from_physical(
        inv[(2, 2)],
        inv[(3, 3)],
        cfg.symbol_duration(),
        cfg.subcarrier_spacing(),
        cfg.carrier(),
        CrlbSource::NumericFisher,
    ))
}
