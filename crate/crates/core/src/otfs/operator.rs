//! Matrix-free application of the cross-talk channel `Psi(tau, nu)` and its
//! derivatives to a delay-Doppler frame.
//!
//! Approximate mode runs the sampled receiver chain:
//!
//! ```text
//! s[n, i] = M sum_k x[k, i] exp(j2pi nk/N)            (Heisenberg, per symbol)
//! r[n, i] = exp(j2pi nu (n' T + i T/M)) s[n' mod N, i] (n' = n, or n - 1 once i >= M - l_tau)
//! Y[n, m] = exp(-j2pi m delta_f tau) (1/M) DFT_i r[n, i]
//! y       = SFFT(Y)
//! ```
//!
//! The frame is treated as cyclic, so symbol 0 is preceded by symbol `N - 1`
//! at time `-T`. Exact mode replaces the sampled overlap by the
//! rectangular-pulse integrals through the block kernels.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::ambiguity::{check_delay, delay_tap, BlockKernels, PsiMode};
use crate::error::{Error, Result};
use crate::frame::FrameConfig;
use crate::sfft::{fft_columns, SymplecticFft};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weight {
    Plain,
    DelayDerivative,
    DopplerDerivative,
}

/// `Psi(tau, nu)` for one `(tau, nu)` as a linear operator.
#[derive(Debug, Clone)]
pub struct PsiOperator {
    cfg: FrameConfig,
    delay: f64,
    doppler: f64,
    mode: PsiMode,
    tap: usize,
    plan: SymplecticFft,
    kernels: Option<BlockKernels>,
}

impl PsiOperator {
    pub fn new(cfg: &FrameConfig, delay: f64, doppler: f64, mode: PsiMode) -> Result<Self> {
        Self::with_plan(
            cfg,
            delay,
            doppler,
            mode,
            SymplecticFft::new(cfg.symbols(), cfg.subcarriers()),
        )
    }

    pub(crate) fn with_plan(
        cfg: &FrameConfig,
        delay: f64,
        doppler: f64,
        mode: PsiMode,
        plan: SymplecticFft,
    ) -> Result<Self> {
        check_delay(delay, cfg)?;
        if !doppler.is_finite() {
            return Err(Error::NonFinite("doppler"));
        }
        let kernels = match mode {
            PsiMode::Exact => Some(BlockKernels::new(delay, doppler, cfg, mode)),
            PsiMode::Approx => None,
        };
        Ok(Self {
            cfg: *cfg,
            delay,
            doppler,
            mode,
            tap: delay_tap(delay, cfg),
            plan,
            kernels,
        })
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

    /// `Psi x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        match self.mode {
            PsiMode::Approx => Ok(self.sampled(x, Weight::Plain)),
            PsiMode::Exact => Ok(self.integrated(x)),
        }
    }

    /// `(dPsi/dtau) x`, approximate mode only.
    pub fn apply_delay_derivative(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        self.require_approx()?;
        Ok(self.sampled(x, Weight::DelayDerivative))
    }

    /// `(dPsi/dnu) x`, approximate mode only.
    pub fn apply_doppler_derivative(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        self.require_approx()?;
        Ok(self.sampled(x, Weight::DopplerDerivative))
    }

    fn require_approx(&self) -> Result<()> {
        if self.mode != PsiMode::Approx {
            return Err(Error::InvalidArgument(
                "derivatives are defined for the approximate model".into(),
            ));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.cfg.grid_len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", self.cfg.grid_len()),
                got: format!("{len}"),
            });
        }
        Ok(())
    }

    fn sampled(&self, x: &[Complex64], weight: Weight) -> Vec<Complex64> {
        let (n_sym, m) = (self.cfg.symbols(), self.cfg.subcarriers());
        let t = self.cfg.symbol_duration();
        let s = time_signal(&self.plan, x);
        let mut r = vec![Complex64::new(0.0, 0.0); n_sym * m];
        let split = m - self.tap;
        for n in 0..n_sym {
            for i in 0..m {
                let back = usize::from(i >= split);
                // time index of the source block; -1 wraps to the last symbol
                let src_time = n as f64 - back as f64;
                let src = (n + n_sym - back) % n_sym;
                let when = src_time * t + i as f64 * t / m as f64;
                let mut v = s[src * m + i] * Complex64::from_polar(1.0, TAU * self.doppler * when);
                if weight == Weight::DopplerDerivative {
                    v *= Complex64::new(0.0, TAU * when);
                }
                r[n * m + i] = v;
            }
        }
        let fwd = self.plan.forward_cols();
        let scale = 1.0 / m as f64;
        let spacing = self.cfg.subcarrier_spacing();
        for row in r.chunks_exact_mut(m) {
            fwd.process(row);
            for (sub, v) in row.iter_mut().enumerate() {
                let f = sub as f64 * spacing;
                *v *= Complex64::from_polar(scale, -TAU * f * self.delay);
                if weight == Weight::DelayDerivative {
                    *v *= Complex64::new(0.0, -TAU * f);
                }
            }
        }
        self.plan
            .sfft_in_place(&mut r)
            .expect("buffer sized from the frame");
        r
    }

    fn integrated(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (n_sym, m) = (self.cfg.symbols(), self.cfg.subcarriers());
        let t = self.cfg.symbol_duration();
        let spacing = self.cfg.subcarrier_spacing();
        let kernels = self.kernels.as_ref().expect("exact mode carries kernels");
        let mut big_x = x.to_vec();
        self.plan
            .isfft_in_place(&mut big_x)
            .expect("buffer sized from the frame");
        let half = m as isize - 1;
        let mut y = vec![Complex64::new(0.0, 0.0); n_sym * m];
        for n in 0..n_sym {
            let prev = (n + n_sym - 1) % n_sym;
            let ph_cur = Complex64::from_polar(1.0, TAU * self.doppler * n as f64 * t);
            let ph_prev = Complex64::from_polar(1.0, TAU * self.doppler * (n as f64 - 1.0) * t);
            for sub in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for src in 0..m {
                    let (k0, k1) = kernels.at(src as isize - sub as isize, half);
                    acc += ph_cur * k0 * big_x[n * m + src] + ph_prev * k1 * big_x[prev * m + src];
                }
                let f = sub as f64 * spacing;
                y[n * m + sub] = acc * Complex64::from_polar(1.0, -TAU * f * self.delay);
            }
        }
        self.plan
            .sfft_in_place(&mut y)
            .expect("buffer sized from the frame");
        y
    }
}

/// Per-symbol time samples `s[n, i] = M sum_k x[k, i] exp(j2pi nk/N)` of an
/// OTFS frame with rectangular pulses.
pub(crate) fn time_signal(plan: &SymplecticFft, x: &[Complex64]) -> Vec<Complex64> {
    let (rows, cols) = (plan.rows(), plan.cols());
    let mut s = x.to_vec();
    let mut scratch = Vec::new();
    fft_columns(plan.inverse_rows(), &mut s, rows, cols, &mut scratch);
    let scale = cols as f64;
    for v in &mut s {
        *v *= scale;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{complex_gaussian, stream_rng, Stream};

    fn cfg(n: usize, m: usize) -> FrameConfig {
        FrameConfig::new(5.89e9, 0.15625e6 * m as f64, m, n, 0.0).unwrap()
    }

    fn random(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, Stream::Symbols);
        (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_at_origin() {
        let c = cfg(4, 8);
        let x = random(32, 1);
        for mode in [PsiMode::Approx, PsiMode::Exact] {
            let y = PsiOperator::new(&c, 0.0, 0.0, mode)
                .unwrap()
                .apply(&x)
                .unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_model_preserves_energy() {
        let c = cfg(8, 16);
        let x = random(128, 2);
        let t = c.symbol_duration();
        for (tau, nu) in [(0.31 * t, 0.27 / t), (0.93 * t, -0.4 / t), (0.999 * t, 0.0)] {
            let y = PsiOperator::new(&c, tau, nu, PsiMode::Approx)
                .unwrap()
                .apply(&x)
                .unwrap();
            assert!((norm(&y) - norm(&x)).abs() < 1e-10 * norm(&x));
        }
    }

    #[test]
    fn integrated_model_does_not_amplify() {
        let c = cfg(8, 16);
        let x = random(128, 3);
        let t = c.symbol_duration();
        let y = PsiOperator::new(&c, 0.43 * t, 0.3 / t, PsiMode::Exact)
            .unwrap()
            .apply(&x)
            .unwrap();
        assert!(norm(&y) <= norm(&x) * (1.0 + 1e-12));
    }

    #[test]
    fn integer_doppler_is_cyclic_shift() {
        let (n, m) = (4, 8);
        let c = cfg(n, m);
        let t = c.symbol_duration();
        let nu = 1.0 / (n as f64 * t);
        let x = random(n * m, 4);
        let y = PsiOperator::new(&c, 0.0, nu, PsiMode::Approx)
            .unwrap()
            .apply(&x)
            .unwrap();
        for k in 0..n {
            for l in 0..m {
                let ph = Complex64::from_polar(1.0, TAU * nu * l as f64 * t / m as f64);
                let expect = x[((k + n - 1) % n) * m + l] * ph;
                assert!((y[k * m + l] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_mode_has_no_derivatives() {
        let c = cfg(2, 4);
        let op = PsiOperator::new(&c, 0.0, 0.0, PsiMode::Exact).unwrap();
        assert!(op.apply_delay_derivative(&random(8, 0)).is_err());
    }

    #[test]
    fn wrong_length_rejected() {
        let c = cfg(2, 4);
        let op = PsiOperator::new(&c, 0.0, 0.0, PsiMode::Approx).unwrap();
        assert!(op.apply(&random(7, 0)).is_err());
    }
}
