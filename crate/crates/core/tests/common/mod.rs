//! Brute-force references shared by the integration tests. Nothing here
//! calls into the library's transforms or closed forms.
#![allow(dead_code)]

use std::f64::consts::TAU;

use jrc_core::frame::FrameConfig;
use jrc_core::otfs::{delay_tap, PsiMode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cexp(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Frame with subcarrier spacing 156.25 kHz, no prefix.
pub fn small_frame(n: usize, m: usize) -> FrameConfig {
    FrameConfig::new(5.89e9, 156_250.0 * m as f64, m, n, 0.0).unwrap()
}

pub fn table_one() -> FrameConfig {
    FrameConfig::new(5.89e9, 10e6, 64, 50, 0.25).unwrap()
}

pub fn random_vec(len: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect()
}

/// Random delay in `[0, T)` whose sample position `tau M delta_f` sits at
/// least 0.1 samples away from an integer, and Doppler in `(-delta_f/2, delta_f/2)`.
pub fn random_off_sample_target(cfg: &FrameConfig, r: &mut ChaCha8Rng) -> (f64, f64) {
    let m = cfg.subcarriers() as f64;
    let sample = r.random_range(0..cfg.subcarriers()) as f64 + r.random_range(0.1..0.9);
    let delay = sample / (m * cfg.subcarrier_spacing());
    let doppler = r.random_range(-0.5..0.5) * cfg.subcarrier_spacing();
    (delay, doppler)
}

/// `(1/T) int_a^b exp(j2pi f w) dw` from the antiderivative.
fn integral(f: f64, a: f64, b: f64, period: f64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    if (f * (b - a)).abs() < 1e-9 {
        return cexp(TAU * f * a) * (b - a) / period;
    }
    (cexp(TAU * f * b) - cexp(TAU * f * a)) / (Complex64::new(0.0, TAU * f) * period)
}

/// Overlap of transmit subcarrier `m'` with receive subcarrier `m` in the
/// current (`back = 0`) or previous (`back = 1`) symbol.
fn overlap(
    cfg: &FrameConfig,
    delay: f64,
    doppler: f64,
    dm: f64,
    back: usize,
    mode: PsiMode,
) -> Complex64 {
    let m = cfg.subcarriers();
    let t = cfg.symbol_duration();
    let tap = delay_tap(delay, cfg);
    match mode {
        PsiMode::Approx => {
            let range = if back == 0 { 0..m - tap } else { m - tap..m };
            range
                .map(|i| cexp(TAU * (dm + doppler * t) * i as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        }
        PsiMode::Exact => {
            let f = dm * cfg.subcarrier_spacing() + doppler;
            if back == 0 {
                integral(f, 0.0, t - delay, t)
            } else {
                integral(f, t - delay, t, t)
            }
        }
    }
}

/// `Psi[(k, l), (k', l')]` summed explicitly over symbol `n`, subcarrier
/// `m`, source block and source subcarrier `m'` (plus the sample index
/// inside the sampled overlap).
pub fn psi_oracle(
    cfg: &FrameConfig,
    delay: f64,
    doppler: f64,
    mode: PsiMode,
) -> Vec<Vec<Complex64>> {
    let (n_sym, m_sub) = (cfg.symbols(), cfg.subcarriers());
    let (nf, mf) = (n_sym as f64, m_sub as f64);
    let t = cfg.symbol_duration();
    let spacing = cfg.subcarrier_spacing();
    let len = n_sym * m_sub;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; len];
    for k in 0..n_sym {
        for l in 0..m_sub {
            for kp in 0..n_sym {
                for lp in 0..m_sub {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for n in 0..n_sym {
                        for m in 0..m_sub {
                            let rx =
                                cexp(-TAU * (n as f64 * k as f64 / nf - m as f64 * l as f64 / mf));
                            for back in 0..2 {
                                let src_time = n as f64 - back as f64;
                                for mp in 0..m_sub {
                                    let h = cexp(TAU * doppler * src_time * t)
                                        * cexp(-TAU * m as f64 * spacing * delay)
                                        * overlap(
                                            cfg,
                                            delay,
                                            doppler,
                                            mp as f64 - m as f64,
                                            back,
                                            mode,
                                        );
                                    let tx = cexp(
                                        TAU * (src_time * kp as f64 / nf
                                            - mp as f64 * lp as f64 / mf),
                                    );
                                    acc += rx * h * tx;
                                }
                            }
                        }
                    }
                    out[k * m_sub + l][kp * m_sub + lp] = acc / (nf * mf);
                }
            }
        }
    }
    out
}

/// Cross-ambiguity by composite Simpson quadrature of the pulse overlap.
pub fn ambiguity_quadrature(
    cfg: &FrameConfig,
    delay: f64,
    doppler: f64,
    panels: usize,
) -> Complex64 {
    let t = cfg.symbol_duration();
    let b = t - delay;
    let h = b / panels as f64;
    let f = |w: f64| cexp(TAU * doppler * w);
    let mut acc = f(0.0) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(i as f64 * h) * w;
    }
    acc * h / 3.0 / t
}

/// Determinant by the Leibniz permutation expansion.
pub fn leibniz_det(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(&mut perm, 0, a, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, start: usize, a: &[Vec<Complex64>], total: &mut Complex64) {
    let n = perm.len();
    if start == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        let prod: Complex64 = (0..n).map(|i| a[i][perm[i]]).product();
        *total += prod * sign;
        return;
    }
    for i in start..n {
        perm.swap(start, i);
        permute(perm, start + 1, a, total);
        perm.swap(start, i);
    }
}

/// `sum_n sum_m v[n, m] exp(-j2pi nu n T_s) exp(s j2pi m spacing tau)`.
pub fn periodogram_oracle(
    v: &[Complex64],
    rows: usize,
    cols: usize,
    slow: f64,
    spacing: f64,
    doppler: f64,
    delay: f64,
    sign: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..rows {
        for m in 0..cols {
            acc += v[n * cols + m]
                * cexp(-TAU * doppler * n as f64 * slow)
                * cexp(sign * TAU * m as f64 * spacing * delay);
        }
    }
    acc
}

/// `max |a - b| / max |b|`.
pub fn rel_max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    diff / scale
}
