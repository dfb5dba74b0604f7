//! Cross-ambiguity of rectangular pulses and the per-symbol kernels built
//! from it.
//!
//! A received symbol `n` sees the current block `n` over `[0, T - tau)` and
//! the tail of block `n - 1` over `[T - tau, T)`. The approximate model
//! replaces the integrals by `M`-point sums on the sampling grid, with the
//! split at sample `l_tau = ceil(tau M delta_f)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, INTEGER_SLACK};

/// Integral or sampled treatment of the pulse overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsiMode {
    /// Analytic overlap integrals of the rectangular pulses.
    Exact,
    /// Overlap sampled at `T / M`, giving the closed-form Dirichlet matrix.
    Approx,
}

impl PsiMode {
    pub fn name(&self) -> &'static str {
        match self {
            PsiMode::Exact => "exact-rect",
            PsiMode::Approx => "approx-rect",
        }
    }
}

impl std::str::FromStr for PsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "exact-rect" => Ok(PsiMode::Exact),
            "approx" | "approx-rect" => Ok(PsiMode::Approx),
            other => Err(Error::InvalidArgument(format!(
                "unknown Psi mode '{other}'"
            ))),
        }
    }
}

/// First sample index belonging to the previous block, in `[0, M]`.
///
/// `M` only occurs for `tau > (M - 1) T / M`, where every sample of the
/// current block has already been shifted out.
pub fn delay_tap(delay: f64, cfg: &FrameConfig) -> usize {
    let m = cfg.subcarriers();
    let x = delay * m as f64 * cfg.subcarrier_spacing();
    ((x - INTEGER_SLACK).ceil().max(0.0) as usize).min(m)
}

pub(crate) fn check_delay(delay: f64, cfg: &FrameConfig) -> Result<()> {
    let period = cfg.symbol_duration();
    if !(delay.is_finite() && (0.0..period).contains(&delay)) {
        return Err(Error::Inadmissible(format!(
            "delay {delay:e} s outside [0, {period:e}) s"
        )));
    }
    Ok(())
}

/// `sin(pi x) / (pi x)`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `(1/T) int_a^b exp(j2pi f w) dw`, evaluated without cancellation.
fn overlap_integral(freq: f64, a: f64, b: f64, period: f64) -> Complex64 {
    let width = b - a;
    if width <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(width / period * sinc(freq * width), PI * freq * (a + b))
}

/// `(1/M) sum_{i in [lo, hi)} exp(j2pi x i / M)`.
fn sampled_sum(x: f64, lo: usize, hi: usize, m: usize) -> Complex64 {
    if hi <= lo {
        return Complex64::new(0.0, 0.0);
    }
    let theta = TAU * x / m as f64;
    let step = Complex64::from_polar(1.0, theta);
    let len = (hi - lo) as f64;
    let denom = Complex64::new(1.0, 0.0) - step;
    let first = Complex64::from_polar(1.0, theta * lo as f64);
    if denom.norm() < 1e-12 {
        return first * len / m as f64;
    }
    first * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta * len)) / denom / m as f64
}

/// Cross-ambiguity of the rectangular transmit and receive pulses at
/// `(tau, nu)`, normalized so that `A(0, 0) = 1`.
pub fn cross_ambiguity_rect(
    delay: f64,
    doppler: f64,
    cfg: &FrameConfig,
    mode: PsiMode,
) -> Result<Complex64> {
    check_delay(delay, cfg)?;
    if !doppler.is_finite() {
        return Err(Error::NonFinite("doppler"));
    }
    Ok(match mode {
        PsiMode::Approx => {
            let m = cfg.subcarriers();
            let tap = delay_tap(delay, cfg);
            sampled_sum(doppler * cfg.symbol_duration(), 0, m - tap, m)
        }
        PsiMode::Exact => {
            let t = cfg.symbol_duration();
            overlap_integral(doppler, 0.0, t - delay, t)
        }
    })
}

/// Inter-carrier kernels for the current (`current[d]`) and previous
/// (`previous[d]`) block at subcarrier offset `d - (M - 1)`, i.e. the
/// coupling from transmit subcarrier `m'` into receive subcarrier `m` with
/// `m' - m = d - (M - 1)`.
#[derive(Debug, Clone)]
pub(crate) struct BlockKernels {
    pub current: Vec<Complex64>,
    pub previous: Vec<Complex64>,
}

impl BlockKernels {
    pub fn new(delay: f64, doppler: f64, cfg: &FrameConfig, mode: PsiMode) -> Self {
        let m = cfg.subcarriers();
        let t = cfg.symbol_duration();
        let spacing = cfg.subcarrier_spacing();
        let tap = delay_tap(delay, cfg);
        let offsets = (0..2 * m - 1).map(|d| d as f64 - (m as f64 - 1.0));
        let (current, previous) = match mode {
            PsiMode::Approx => offsets
                .map(|dm| {
                    let x = dm + doppler * t;
                    (sampled_sum(x, 0, m - tap, m), sampled_sum(x, m - tap, m, m))
                })
                .unzip(),
            PsiMode::Exact => offsets
                .map(|dm| {
                    let f = dm * spacing + doppler;
                    (
                        overlap_integral(f, 0.0, t - delay, t),
                        overlap_integral(f, t - delay, t, t),
                    )
                })
                .unzip(),
        };
        Self { current, previous }
    }

    /// Kernel pair for `m' - m = offset`.
    #[inline]
    pub fn at(&self, offset: isize, half: isize) -> (Complex64, Complex64) {
        let d = (offset + half) as usize;
        (self.current[d], self.previous[d])
    }
}
