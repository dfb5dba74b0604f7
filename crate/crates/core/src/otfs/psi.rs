//! Dense cross-talk matrix `Psi(tau, nu)` and its analytic derivatives.
//!
//! Rows are indexed by the received bin `(k, l)` and columns by the
//! transmitted bin `(k', l')`, both flattened as `k M + l`. In the sampled
//! model
//!
//! ```text
//! Psi = 1/(NM) D_N(k' - k + nu N T) D_M(l - l' - tau M delta_f)
//!       exp(j2pi nu l' T/M) B(k', l')
//! ```
//!
//! with `D_K(x) = sum_{q<K} exp(j2pi x q / K)` and `B = 1` for columns
//! `l' < M - l_tau`, `B = exp(-j2pi (k'/N + nu T))` for the columns that
//! reach back into the previous symbol.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ambiguity::{check_delay, delay_tap, PsiMode};
use super::operator::PsiOperator;
use crate::error::{Error, Result};
use crate::frame::FrameConfig;

/// Largest `N M` for which dense matrices are built.
pub const DENSE_LIMIT: usize = 2048;

/// `|sin(pi x / K)|` below which the Dirichlet ratio takes its limit.
const DIRICHLET_EPS: f64 = 1e-12;

/// `sum_{q=0}^{K-1} exp(j2pi x q / K)`, with removable singularities at
/// `x = K p` replaced by their limit.
pub fn dirichlet(x: f64, k: usize) -> Complex64 {
    let kf = k as f64;
    let phase = Complex64::from_polar(1.0, PI * x * (kf - 1.0) / kf);
    let den = (PI * x / kf).sin();
    if den.abs() < DIRICHLET_EPS {
        phase * kf * (PI * x).cos() / (PI * x / kf).cos()
    } else {
        phase * (PI * x).sin() / den
    }
}

/// `sum_{q=0}^{K-1} q exp(j2pi x q / K)`.
fn weighted_sum(x: f64, k: usize) -> Complex64 {
    let step = Complex64::from_polar(1.0, TAU * x / k as f64);
    let mut ph = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..k {
        acc += ph * q as f64;
        ph *= step;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossTalkMatrix {
    entries: DMatrix<Complex64>,
    delay: f64,
    doppler: f64,
    mode: PsiMode,
}

impl CrossTalkMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn doppler(&self) -> f64 {
        self.doppler
    }

    pub fn mode(&self) -> PsiMode {
        self.mode
    }

    /// Entry coupling transmit bin `(k', l')` into receive bin `(k, l)`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.entries * v).as_slice().to_vec()
    }
}

fn check_dense(cfg: &FrameConfig) -> Result<()> {
    if cfg.grid_len() > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense Psi limited to N M <= {DENSE_LIMIT}, got {}",
            cfg.grid_len()
        )));
    }
    Ok(())
}

/// Per-offset factors of the separable closed form.
struct Factors {
    n: usize,
    m: usize,
    tap: usize,
    nu_t: f64,
    /// `D_N(dk + nu N T)` for `dk = k' - k` in `-(N-1)..N`.
    doppler: Vec<Complex64>,
    /// `D_M(dl - tau M delta_f)` for `dl = l - l'` in `-(M-1)..M`.
    delay: Vec<Complex64>,
}

impl Factors {
    fn new(cfg: &FrameConfig, delay: f64, doppler: f64) -> Self {
        let (n, m) = (cfg.symbols(), cfg.subcarriers());
        let nu_t = doppler * cfg.symbol_duration();
        let tau_m = delay * m as f64 * cfg.subcarrier_spacing();
        let span = |len: usize| (0..2 * len - 1).map(move |d| d as f64 - (len as f64 - 1.0));
        Self {
            n,
            m,
            tap: delay_tap(delay, cfg),
            nu_t,
            doppler: span(n)
                .map(|dk| dirichlet(dk + nu_t * n as f64, n))
                .collect(),
            delay: span(m).map(|dl| dirichlet(dl - tau_m, m)).collect(),
        }
    }

    /// `exp(j2pi nu l' T / M) B(k', l')` and whether the column is delayed
    /// into the previous symbol.
    fn column(&self, kp: usize, lp: usize) -> (Complex64, bool) {
        let mut ph = Complex64::from_polar(1.0, TAU * self.nu_t * lp as f64 / self.m as f64);
        let back = lp >= self.m - self.tap;
        if back {
            ph *= Complex64::from_polar(1.0, -TAU * (kp as f64 / self.n as f64 + self.nu_t));
        }
        (ph, back)
    }

    fn for_each(
        &self,
        mut f: impl FnMut(usize, usize, usize, usize, Complex64, Complex64, Complex64, bool),
    ) {
        let (n, m) = (self.n, self.m);
        for k in 0..n {
            for l in 0..m {
                for kp in 0..n {
                    let dn = self.doppler[kp + n - 1 - k];
                    for lp in 0..m {
                        let dm = self.delay[l + m - 1 - lp];
                        let (col, back) = self.column(kp, lp);
                        f(k * m + l, kp * m + lp, kp, lp, dn, dm, col, back);
                    }
                }
            }
        }
    }
}

/// Dense `Psi(tau, nu)`.
///
/// Approximate mode evaluates the Dirichlet closed form entrywise; exact
/// mode applies the integrated channel to each unit vector.
pub fn build_psi(
    cfg: &FrameConfig,
    delay: f64,
    doppler: f64,
    mode: PsiMode,
) -> Result<CrossTalkMatrix> {
    check_dense(cfg)?;
    check_delay(delay, cfg)?;
    if !doppler.is_finite() {
        return Err(Error::NonFinite("doppler"));
    }
    let len = cfg.grid_len();
    let mut entries = DMatrix::zeros(len, len);
    match mode {
        PsiMode::Approx => {
            let scale = 1.0 / len as f64;
            Factors::new(cfg, delay, doppler).for_each(|r, c, _, _, dn, dm, col, _| {
                entries[(r, c)] = dn * dm * col * scale;
            });
        }
        PsiMode::Exact => {
            let op = PsiOperator::new(cfg, delay, doppler, mode)?;
            let mut unit = vec![Complex64::new(0.0, 0.0); len];
            for c in 0..len {
                unit[c] = Complex64::new(1.0, 0.0);
                let col = op.apply(&unit)?;
                entries.column_mut(c).copy_from_slice(&col);
                unit[c] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(CrossTalkMatrix {
        entries,
        delay,
        doppler,
        mode,
    })
}

/// Analytic `(dPsi/dtau, dPsi/dnu)` of the sampled model.
///
/// The delay tap `l_tau` is piecewise constant in `tau`, so both derivatives
/// hold between sample boundaries.
pub fn psi_derivatives(
    cfg: &FrameConfig,
    delay: f64,
    doppler: f64,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    check_dense(cfg)?;
    check_delay(delay, cfg)?;
    if !doppler.is_finite() {
        return Err(Error::NonFinite("doppler"));
    }
    let (n, m) = (cfg.symbols(), cfg.subcarriers());
    let t = cfg.symbol_duration();
    let spacing = cfg.subcarrier_spacing();
    let f = Factors::new(cfg, delay, doppler);
    let tau_m = delay * m as f64 * spacing;
    let span = |len: usize| (0..2 * len - 1).map(move |d| d as f64 - (len as f64 - 1.0));
    // d/dnu of D_N(dk + nu N T) = j2pi T sum_n n exp(...)
    let doppler_slope: Vec<Complex64> = span(n)
        .map(|dk| Complex64::new(0.0, TAU * t) * weighted_sum(dk + f.nu_t * n as f64, n))
        .collect();
    // d/dtau of D_M(dl - tau M delta_f) = -j2pi delta_f sum_m m exp(...)
    let delay_slope: Vec<Complex64> = span(m)
        .map(|dl| Complex64::new(0.0, -TAU * spacing) * weighted_sum(dl - tau_m, m))
        .collect();

    let len = n * m;
    let scale = 1.0 / len as f64;
    let mut d_tau = DMatrix::zeros(len, len);
    let mut d_nu = DMatrix::zeros(len, len);
    f.for_each(|r, c, kp, lp, dn, dm, col, back| {
        let k = r / m;
        let l = r % m;
        let dn_slope = doppler_slope[kp + n - 1 - k];
        let dm_slope = delay_slope[l + m - 1 - lp];
        d_tau[(r, c)] = dn * dm_slope * col * scale;
        let own = TAU * t * (lp as f64 / m as f64 - if back { 1.0 } else { 0.0 });
        d_nu[(r, c)] = (dn_slope + dn * Complex64::new(0.0, own)) * dm * col * scale;
    });
    Ok((d_tau, d_nu))
}
