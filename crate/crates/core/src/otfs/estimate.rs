//! Generalized-likelihood search over `(tau, nu)`:
//!
//! ```text
//! L(tau, nu) = |x^H Psi^H y|^2 / (x^H Psi^H Psi x)
//! ```
//!
//! The sampled model admits a factorized evaluation. With `Y_rx = ISFFT(y)`
//! and `s` the per-symbol time samples of `x`, the numerator is
//!
//! ```text
//! x^H Psi^H y = 1/(NM) sum_m exp(j2pi m delta_f tau) W_l[m]
//! W_l[m] = (1/M) sum_i exp(j2pi i (m - nu T)/M) P_{b(i, l)}[i, m]
//! P_0[i, m] = sum_n exp(-j2pi nu nT) s*[n, i] Y_rx[n, m]
//! P_1[i, m] = sum_n exp(-j2pi nu (n-1)T) s*[n-1, i] Y_rx[n, m]
//! ```
//!
//! where `b(i, l) = 1` once `i >= M - l`. Prefix and suffix sums over `i`
//! yield `W_l` for every delay tap `l` at once, and on a Doppler grid with
//! step `1/(N'T)` the `P_b` are zero-padded FFTs over `n`. The sampled `Psi`
//! is unitary, so the denominator is `||x||^2` everywhere.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::ambiguity::{delay_tap, PsiMode};
use super::operator::{time_signal, PsiOperator};
use super::psi::build_psi;
use super::OtfsObservation;
use crate::error::{Error, Result};
use crate::estimate::RadarEstimate;
use crate::grid::EstimationGrid;
use crate::sfft::SymplecticFft;
use crate::spectrum;

/// Complex entries allowed in the per-trial Doppler FFT tables.
const FFT_TABLE_LIMIT: usize = 1 << 22;

/// Numerator and denominator at every grid point, delay-major.
struct Likelihood {
    num: Vec<Complex64>,
    den: Vec<f64>,
}

impl Likelihood {
    fn statistic(&self) -> Vec<f64> {
        let mut skipped = 0usize;
        let stat: Vec<f64> = self
            .num
            .iter()
            .zip(&self.den)
            .map(|(n, &d)| {
                if d > 0.0 && d.is_finite() {
                    n.norm_sqr() / d
                } else {
                    skipped += 1;
                    f64::NAN
                }
            })
            .collect();
        if skipped > 0 {
            log::warn!("skipped {skipped} grid points with a vanishing likelihood denominator");
        }
        stat
    }
}

fn check_grid(obs: &OtfsObservation, grid: &EstimationGrid) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let last = grid.delay(grid.delay_bins() - 1);
    if last >= obs.cfg().symbol_duration() {
        return Err(Error::Inadmissible(format!(
            "grid delay {last:e} s reaches past the symbol duration"
        )));
    }
    Ok(())
}

fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

fn points(grid: &EstimationGrid) -> Vec<(f64, f64)> {
    (0..grid.delay_bins())
        .flat_map(|d| (0..grid.doppler_bins()).map(move |j| (d, j)))
        .map(|(d, j)| (grid.delay(d), grid.doppler(j)))
        .collect()
}

/// Factorized numerator for the sampled model.
fn sampled_likelihood(obs: &OtfsObservation, grid: &EstimationGrid) -> Likelihood {
    let cfg = obs.cfg();
    let (n, m) = (cfg.symbols(), cfg.subcarriers());
    let t = cfg.symbol_duration();
    let spacing = cfg.subcarrier_spacing();
    let plan = SymplecticFft::new(n, m);
    let s = time_signal(&plan, obs.symbols().as_slice());
    let mut y_rx = obs.samples().to_vec();
    plan.isfft_in_place(&mut y_rx)
        .expect("observation sized from the frame");

    // a_b[(i M + m) N + n]: products whose n-sums give P_b
    let zero = Complex64::new(0.0, 0.0);
    let mut a0 = vec![zero; m * m * n];
    let mut a1 = vec![zero; m * m * n];
    for i in 0..m {
        for sub in 0..m {
            let base = (i * m + sub) * n;
            for nn in 0..n {
                let rx = y_rx[nn * m + sub];
                a0[base + nn] = s[nn * m + i].conj() * rx;
                a1[base + nn] = s[((nn + n - 1) % n) * m + i].conj() * rx;
            }
        }
    }

    let n_pad = grid.doppler_len();
    let use_fft = spectrum::same_axes(grid, t, spacing) && 2 * m * m * n_pad <= FFT_TABLE_LIMIT;
    let tables = use_fft.then(|| {
        let fft = FftPlanner::new().plan_fft_forward(n_pad);
        let build = |a: &[Complex64]| {
            let mut out = vec![zero; m * m * n_pad];
            for (col, chunk) in a.chunks_exact(n).zip(out.chunks_exact_mut(n_pad)) {
                chunk[..n].copy_from_slice(col);
                fft.process(chunk);
            }
            out
        };
        (build(&a0), build(&a1))
    });

    let den = energy(obs.symbols().as_slice());
    let delay_bins = grid.delay_bins();
    let taps: Vec<usize> = grid.delays().map(|tau| delay_tap(tau, cfg)).collect();
    let delay_phase: Vec<Complex64> = grid
        .delays()
        .flat_map(|tau| {
            (0..m).map(move |sub| Complex64::from_polar(1.0, TAU * sub as f64 * spacing * tau))
        })
        .collect();
    let norm = 1.0 / (n * m) as f64;

    let per_doppler: Vec<Vec<Complex64>> = (0..grid.doppler_bins())
        .into_par_iter()
        .map(|j| {
            let nu = grid.doppler(j);
            let nu_t = nu * t;
            let back = Complex64::from_polar(1.0, TAU * nu_t);
            let p = |i: usize, sub: usize| -> (Complex64, Complex64) {
                let col = i * m + sub;
                match &tables {
                    Some((t0, t1)) => {
                        let k = grid.doppler_index(j).rem_euclid(n_pad as i64) as usize;
                        (t0[col * n_pad + k], back * t1[col * n_pad + k])
                    }
                    None => {
                        let (c0, c1) = (&a0[col * n..(col + 1) * n], &a1[col * n..(col + 1) * n]);
                        let step = Complex64::from_polar(1.0, -TAU * nu_t);
                        let mut ph = Complex64::new(1.0, 0.0);
                        let (mut p0, mut p1) = (zero, zero);
                        for nn in 0..n {
                            p0 += ph * c0[nn];
                            p1 += ph * c1[nn];
                            ph *= step;
                        }
                        (p0, back * p1)
                    }
                }
            };
            // w[l M + sub] = W_l[sub], l = 0..=M
            let mut w = vec![zero; (m + 1) * m];
            let mut current = vec![zero; m];
            let mut previous = vec![zero; m];
            for sub in 0..m {
                for i in 0..m {
                    let twiddle = Complex64::from_polar(
                        1.0 / m as f64,
                        TAU * i as f64 * (sub as f64 - nu_t) / m as f64,
                    );
                    let (p0, p1) = p(i, sub);
                    current[i] = twiddle * p0;
                    previous[i] = twiddle * p1;
                }
                // W_l = sum_{i < M - l} current + sum_{i >= M - l} previous
                let mut acc: Complex64 = current.iter().sum();
                w[sub] = acc;
                for l in 1..=m {
                    let i = m - l;
                    acc += previous[i] - current[i];
                    w[l * m + sub] = acc;
                }
            }
            (0..delay_bins)
                .map(|d| {
                    let wl = &w[taps[d] * m..(taps[d] + 1) * m];
                    let ph = &delay_phase[d * m..(d + 1) * m];
                    norm * wl.iter().zip(ph).map(|(a, b)| a * b).sum::<Complex64>()
                })
                .collect()
        })
        .collect();

    let mut num = Vec::with_capacity(grid.len());
    for d in 0..delay_bins {
        for col in &per_doppler {
            num.push(col[d]);
        }
    }
    Likelihood {
        den: vec![den; num.len()],
        num,
    }
}

/// Per-point evaluation through the integrated channel.
fn integrated_likelihood(obs: &OtfsObservation, grid: &EstimationGrid) -> Result<Likelihood> {
    let cfg = obs.cfg();
    let plan = SymplecticFft::new(cfg.symbols(), cfg.subcarriers());
    let x = obs.symbols().as_slice();
    let pairs: Vec<(Complex64, f64)> = points(grid)
        .into_par_iter()
        .map(|(tau, nu)| {
            let u = PsiOperator::with_plan(cfg, tau, nu, PsiMode::Exact, plan.clone())?.apply(x)?;
            Ok((inner(&u, obs.samples()), energy(&u)))
        })
        .collect::<Result<_>>()?;
    let (num, den) = pairs.into_iter().unzip();
    Ok(Likelihood { num, den })
}

/// Reference evaluation with a dense `Psi` per grid point.
fn dense_likelihood(
    obs: &OtfsObservation,
    grid: &EstimationGrid,
    mode: PsiMode,
) -> Result<Likelihood> {
    let cfg = obs.cfg();
    let x = obs.symbols().as_slice();
    let pairs: Vec<(Complex64, f64)> = points(grid)
        .into_par_iter()
        .map(|(tau, nu)| {
            let u = build_psi(cfg, tau, nu, mode)?.apply(x);
            Ok((inner(&u, obs.samples()), energy(&u)))
        })
        .collect::<Result<_>>()?;
    let (num, den) = pairs.into_iter().unzip();
    Ok(Likelihood { num, den })
}

fn likelihood(obs: &OtfsObservation, grid: &EstimationGrid, mode: PsiMode) -> Result<Likelihood> {
    check_grid(obs, grid)?;
    match mode {
        PsiMode::Approx => Ok(sampled_likelihood(obs, grid)),
        PsiMode::Exact => integrated_likelihood(obs, grid),
    }
}

fn pick(grid: &EstimationGrid, lik: &Likelihood) -> Result<RadarEstimate> {
    let stat = lik.statistic();
    let (d, j) = grid.argmax(&stat).ok_or(Error::DegenerateStatistic)?;
    let idx = grid.flat(d, j);
    let h_prime = lik.num[idx] / lik.den[idx];
    let h = h_prime * Complex64::from_polar(1.0, -TAU * grid.doppler(j) * grid.delay(d));
    Ok(RadarEstimate::at_bin(
        grid,
        d,
        j,
        h,
        Some(h_prime),
        stat[idx],
    ))
}

/// Likelihood statistic over the grid, delay-major. Points with a vanishing
/// denominator are NaN.
pub fn statistic_map(
    obs: &OtfsObservation,
    grid: &EstimationGrid,
    mode: PsiMode,
) -> Result<Vec<f64>> {
    Ok(likelihood(obs, grid, mode)?.statistic())
}

/// [`statistic_map`] computed from dense `Psi` matrices.
pub fn statistic_map_dense(
    obs: &OtfsObservation,
    grid: &EstimationGrid,
    mode: PsiMode,
) -> Result<Vec<f64>> {
    check_grid(obs, grid)?;
    Ok(dense_likelihood(obs, grid, mode)?.statistic())
}

/// Grid-search ML estimate. The gain is estimated as
/// `h' = x^H Psi^H y / ||Psi x||^2` and reported both as `h'` and as
/// `h = h' exp(-j2pi nu tau)`.
pub fn ml_estimate_otfs(
    obs: &OtfsObservation,
    grid: &EstimationGrid,
    mode: PsiMode,
) -> Result<RadarEstimate> {
    pick(grid, &likelihood(obs, grid, mode)?)
}

/// [`ml_estimate_otfs`] through dense `Psi` matrices.
pub fn ml_estimate_otfs_dense(
    obs: &OtfsObservation,
    grid: &EstimationGrid,
    mode: PsiMode,
) -> Result<RadarEstimate> {
    check_grid(obs, grid)?;
    pick(grid, &dense_likelihood(obs, grid, mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{FrameConfig, Target};
    use crate::grid::SlowTime;
    use crate::otfs::synthesize_observation_otfs;
    use crate::symbols::{Constellation, Domain, SymbolGrid};

    fn cfg() -> FrameConfig {
        FrameConfig::new(5.89e9, 0.15625e6 * 8.0, 8, 4, 0.0).unwrap()
    }

    fn observe(c: &FrameConfig, tau: f64, nu: f64, sigma: f64) -> OtfsObservation {
        let x = SymbolGrid::random(c, Constellation::Qam16, Domain::DelayDoppler, 11);
        let t = Target::from_delay_doppler(tau, nu, Complex64::from_polar(0.8, 0.9), c).unwrap();
        synthesize_observation_otfs(c, &x, &t, PsiMode::Approx, sigma, 5).unwrap()
    }

    #[test]
    fn on_grid_target_recovered() {
        let c = cfg();
        let g = EstimationGrid::oversampled(&c, SlowTime::Symbol, 2, 2).unwrap();
        let (d, j) = (5, 3);
        let obs = observe(&c, g.delay(d), g.doppler(j), 0.0);
        let est = ml_estimate_otfs(&obs, &g, PsiMode::Approx).unwrap();
        assert_eq!((est.delay_bin, est.doppler_bin), (d, j));
        assert!((est.gain - Complex64::from_polar(0.8, 0.9)).norm() < 1e-8);
    }

    #[test]
    fn fast_path_matches_direct_doppler_sums() {
        let c = cfg();
        let g_fft = EstimationGrid::oversampled(&c, SlowTime::Symbol, 4, 2).unwrap();
        // Doppler step on T_o-free but non-matching axes forces the direct sums
        let g_direct = EstimationGrid::new(
            &c,
            SlowTime::Symbol,
            16,
            16,
            c.symbol_duration() * 0.99,
            1.0 / c.symbol_duration(),
        )
        .unwrap();
        let obs = observe(
            &c,
            0.3 * c.symbol_duration(),
            0.17 / c.symbol_duration(),
            0.3,
        );
        for g in [g_fft, g_direct] {
            let fast = statistic_map(&obs, &g, PsiMode::Approx).unwrap();
            let dense = statistic_map_dense(&obs, &g, PsiMode::Approx).unwrap();
            let scale = dense.iter().cloned().fold(0.0, f64::max);
            for (a, b) in fast.iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn integrated_path_matches_dense() {
        let c = cfg();
        let g = EstimationGrid::oversampled(&c, SlowTime::Symbol, 1, 1).unwrap();
        let obs = observe(
            &c,
            0.45 * c.symbol_duration(),
            -0.2 / c.symbol_duration(),
            0.1,
        );
        let a = statistic_map(&obs, &g, PsiMode::Exact).unwrap();
        let b = statistic_map_dense(&obs, &g, PsiMode::Exact).unwrap();
        let scale = b.iter().cloned().fold(0.0, f64::max);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() <= 1e-9 * scale));
    }

    #[test]
    fn zero_frame_is_degenerate() {
        let c = cfg();
        let x = SymbolGrid::zeros(4, 8, Domain::DelayDoppler);
        let obs = OtfsObservation::new(c, x, vec![Complex64::new(1.0, 0.0); 32]).unwrap();
        let g = EstimationGrid::oversampled(&c, SlowTime::Symbol, 1, 1).unwrap();
        assert!(matches!(
            ml_estimate_otfs(&obs, &g, PsiMode::Approx),
            Err(Error::DegenerateStatistic)
        ));
    }

    #[test]
    fn grid_past_symbol_rejected() {
        let c = cfg();
        let g = EstimationGrid::new(&c, SlowTime::Symbol, 4, 8, 2.0 * c.symbol_duration(), 0.0)
            .unwrap();
        let obs = observe(&c, 0.0, 0.0, 0.0);
        assert!(ml_estimate_otfs(&obs, &g, PsiMode::Approx).is_err());
    }
}
