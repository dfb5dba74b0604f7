//! Fisher information and Cramér-Rao bounds shared by all waveforms.
//!
//! For an observation `s(theta) + w` with `w ~ CN(0, sigma^2 I)` the Fisher
//! matrix is `I_ij = (2 / sigma^2) Re{ sum (ds/dtheta_i)^* (ds/dtheta_j) }`.
//! The symbol amplitudes live inside `s`, so constant-envelope symbols of
//! power `P_avg` reproduce the `2 P_avg Re{..}` form for unit-amplitude `s`.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::SPEED_OF_LIGHT;

/// Eigenvalue ratio below which the Fisher matrix is treated as singular.
const SINGULAR_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrlbSource {
    ClosedForm,
    NumericFisher,
}

impl CrlbSource {
    pub fn name(&self) -> &'static str {
        match self {
            CrlbSource::ClosedForm => "closed-form",
            CrlbSource::NumericFisher => "numeric-fisher",
        }
    }
}

/// Variance bounds in normalized and physical units.
///
/// `f = T_s nu` and `t = delta_f tau`, with `T_s` the waveform's slow-time
/// period. All other fields are exact rescalings of these two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbReport {
    pub var_f: f64,
    pub var_t: f64,
    pub var_doppler: f64,
    pub var_delay: f64,
    pub var_velocity: f64,
    pub var_range: f64,
    pub source: CrlbSource,
}

impl CrlbReport {
    pub fn from_normalized(
        var_f: f64,
        var_t: f64,
        slow_period: f64,
        spacing: f64,
        carrier: f64,
        source: CrlbSource,
    ) -> Self {
        let var_doppler = var_f / (slow_period * slow_period);
        let var_delay = var_t / (spacing * spacing);
        Self::assemble(var_f, var_t, var_doppler, var_delay, carrier, source)
    }

    pub fn from_physical(
        var_doppler: f64,
        var_delay: f64,
        slow_period: f64,
        spacing: f64,
        carrier: f64,
        source: CrlbSource,
    ) -> Self {
        let var_f = var_doppler * slow_period * slow_period;
        let var_t = var_delay * spacing * spacing;
        Self::assemble(var_f, var_t, var_doppler, var_delay, carrier, source)
    }

    fn assemble(
        var_f: f64,
        var_t: f64,
        var_doppler: f64,
        var_delay: f64,
        carrier: f64,
        source: CrlbSource,
    ) -> Self {
        let v_per_hz = SPEED_OF_LIGHT / (2.0 * carrier);
        let r_per_s = SPEED_OF_LIGHT / 2.0;
        Self {
            var_f,
            var_t,
            var_doppler,
            var_delay,
            var_velocity: var_doppler * v_per_hz * v_per_hz,
            var_range: var_delay * r_per_s * r_per_s,
            source,
        }
    }

    pub fn std_range(&self) -> f64 {
        self.var_range.sqrt()
    }

    pub fn std_velocity(&self) -> f64 {
        self.var_velocity.sqrt()
    }
}

/// `(2 / sigma^2) Re{ d_i^H d_j }` for four derivative vectors.
pub fn fisher_information(derivs: [&[Complex64]; 4], noise_var: f64) -> Matrix4<f64> {
    let scale = 2.0 / noise_var;
    let mut f = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let v: f64 = derivs[i]
                .iter()
                .zip(derivs[j])
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            f[(i, j)] = scale * v;
            f[(j, i)] = scale * v;
        }
    }
    f
}

/// Inverse of a symmetric positive-definite Fisher matrix.
pub fn invert_fisher(fisher: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    if fisher.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Fisher matrix"));
    }
    // Scale to unit diagonal so parameters with very different units do not
    // masquerade as near-singularity.
    let d = fisher.diagonal();
    if d.iter().any(|&v| v <= 0.0) {
        return Err(Error::SingularFisher);
    }
    let s = d.map(|v| 1.0 / v.sqrt());
    let scaled = Matrix4::from_fn(|i, j| fisher[(i, j)] * s[i] * s[j]);
    let eig = scaled.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| {
        (lo.min(e), hi.max(e.abs()))
    });
    if lo <= SINGULAR_RATIO * hi {
        return Err(Error::SingularFisher);
    }
    let chol = scaled.cholesky().ok_or(Error::SingularFisher)?;
    let inv = chol.inverse();
    Ok(Matrix4::from_fn(|i, j| inv[(i, j)] * s[i] * s[j]))
}
