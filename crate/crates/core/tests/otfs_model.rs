mod common;

use std::f64::consts::TAU;

use common::*;
use jrc_core::frame::Target;
use jrc_core::grid::{EstimationGrid, SlowTime};
use jrc_core::otfs::{
    build_psi, cross_ambiguity_rect, ml_estimate_otfs, psi_derivatives, statistic_map,
    statistic_map_dense, synthesize_observation_otfs, PsiMode, PsiOperator,
};
use jrc_core::symbols::{Constellation, Domain, SymbolGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn max_entry_err(psi: &nalgebra::DMatrix<Complex64>, oracle: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (r, row) in oracle.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            worst = worst.max((psi[(r, c)] - v).norm());
        }
    }
    worst
}

#[test]
fn closed_form_matches_explicit_sum() {
    let cfg = small_frame(2, 4);
    let mut r = rng(10);
    let t = cfg.symbol_duration();
    for _ in 0..20 {
        let delay = r.random_range(0.0..t);
        let doppler = r.random_range(-0.99..0.99) * cfg.subcarrier_spacing();
        let psi = build_psi(&cfg, delay, doppler, PsiMode::Approx).unwrap();
        let oracle = psi_oracle(&cfg, delay, doppler, PsiMode::Approx);
        assert!(max_entry_err(psi.entries(), &oracle) <= 1e-9);
    }
}

#[test]
fn integrated_channel_matches_explicit_sum() {
    let cfg = small_frame(2, 4);
    let mut r = rng(11);
    let t = cfg.symbol_duration();
    for _ in 0..10 {
        let delay = r.random_range(0.0..t);
        let doppler = r.random_range(-0.99..0.99) * cfg.subcarrier_spacing();
        let psi = build_psi(&cfg, delay, doppler, PsiMode::Exact).unwrap();
        let oracle = psi_oracle(&cfg, delay, doppler, PsiMode::Exact);
        assert!(max_entry_err(psi.entries(), &oracle) <= 1e-9);
    }
}

#[test]
fn larger_frames_match_explicit_sum() {
    for (n, m) in [(4, 4), (2, 8), (8, 8)] {
        let cfg = small_frame(n, m);
        let t = cfg.symbol_duration();
        let (delay, doppler) = (0.61 * t, 0.37 / t);
        let psi = build_psi(&cfg, delay, doppler, PsiMode::Approx).unwrap();
        let oracle = psi_oracle(&cfg, delay, doppler, PsiMode::Approx);
        assert!(max_entry_err(psi.entries(), &oracle) <= 1e-9, "{n} x {m}");
    }
}

#[test]
fn identity_at_origin_large() {
    let cfg = small_frame(8, 16);
    let psi = build_psi(&cfg, 0.0, 0.0, PsiMode::Approx).unwrap();
    let eye = nalgebra::DMatrix::<Complex64>::identity(128, 128);
    assert!((psi.entries() - eye).iter().all(|e| e.norm() <= 1e-9));
}

#[test]
fn integer_doppler_shifts_rows() {
    let (n, m) = (4, 8);
    let cfg = small_frame(n, m);
    let t = cfg.symbol_duration();
    let nu = 1.0 / (n as f64 * t);
    let psi = build_psi(&cfg, 0.0, nu, PsiMode::Approx).unwrap();
    for k in 0..n {
        for l in 0..m {
            for kp in 0..n {
                for lp in 0..m {
                    let expect = if kp == (k + n - 1) % n && lp == l {
                        cexp(TAU * nu * lp as f64 * t / m as f64)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert!((psi.get(k * m + l, kp * m + lp) - expect).norm() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn ambiguity_integral_matches_quadrature() {
    let cfg = small_frame(8, 64);
    let mut r = rng(12);
    let t = cfg.symbol_duration();
    for _ in 0..20 {
        let delay = r.random_range(0.0..t);
        let doppler = r.random_range(-0.99..0.99) * cfg.subcarrier_spacing();
        let exact = cross_ambiguity_rect(delay, doppler, &cfg, PsiMode::Exact).unwrap();
        let quad = ambiguity_quadrature(&cfg, delay, doppler, 2000);
        assert!((exact - quad).norm() < 1e-10);
    }
}

#[test]
fn sampled_ambiguity_within_two_over_m() {
    // On-sample delays up to half a symbol and Doppler below half the spacing.
    let m = 64;
    let cfg = small_frame(8, m);
    let t = cfg.symbol_duration();
    let mut r = rng(13);
    for _ in 0..50 {
        let delay = r.random_range(0..m / 2) as f64 * t / m as f64;
        let doppler = r.random_range(-0.5..0.5) * cfg.subcarrier_spacing();
        let exact = cross_ambiguity_rect(delay, doppler, &cfg, PsiMode::Exact).unwrap();
        let approx = cross_ambiguity_rect(delay, doppler, &cfg, PsiMode::Approx).unwrap();
        assert!((exact - approx).norm() / exact.norm() <= 2.0 / m as f64);
    }
}

fn central_difference(
    cfg: &jrc_core::FrameConfig,
    delay: f64,
    doppler: f64,
    d_delay: f64,
    d_doppler: f64,
) -> Vec<Complex64> {
    let plus = build_psi(cfg, delay + d_delay, doppler + d_doppler, PsiMode::Approx).unwrap();
    let minus = build_psi(cfg, delay - d_delay, doppler - d_doppler, PsiMode::Approx).unwrap();
    let step = 2.0 * (d_delay + d_doppler);
    (plus.entries() - minus.entries())
        .iter()
        .map(|v| v / step)
        .collect()
}

#[test]
fn delay_derivative_matches_central_difference() {
    let cfg = small_frame(2, 4);
    let mut r = rng(14);
    for _ in 0..10 {
        let (delay, doppler) = random_off_sample_target(&cfg, &mut r);
        let (d_tau, _) = psi_derivatives(&cfg, delay, doppler).unwrap();
        let fd = central_difference(&cfg, delay, doppler, 1e-7 * cfg.symbol_duration(), 0.0);
        assert!(rel_max_err(d_tau.as_slice(), &fd) <= 1e-4);
    }
}

#[test]
fn doppler_derivative_matches_central_difference() {
    let cfg = small_frame(2, 4);
    let mut r = rng(15);
    for _ in 0..10 {
        let (delay, doppler) = random_off_sample_target(&cfg, &mut r);
        let (_, d_nu) = psi_derivatives(&cfg, delay, doppler).unwrap();
        let fd = central_difference(&cfg, delay, doppler, 0.0, 1e-7 * cfg.subcarrier_spacing());
        assert!(rel_max_err(d_nu.as_slice(), &fd) <= 1e-4);
    }
}

#[test]
fn doppler_derivative_continuous_at_zero() {
    let cfg = small_frame(2, 4);
    let (_, at_zero) = psi_derivatives(&cfg, 0.0, 0.0).unwrap();
    let (_, above) = psi_derivatives(&cfg, 0.0, 1e-9).unwrap();
    let (_, below) = psi_derivatives(&cfg, 0.0, -1e-9).unwrap();
    let v = at_zero[(0, 0)];
    // sum over n and m of j2pi (n T + l' T/M) at k = k', l = l' = 0
    let t = cfg.symbol_duration();
    let expect = Complex64::new(0.0, TAU * t * 0.5);
    assert!((v - expect).norm() <= 1e-12 * expect.norm());
    for probe in [above[(0, 0)], below[(0, 0)]] {
        assert!((probe - v).norm() <= 1e-6 * v.norm());
    }
}

#[test]
fn on_grid_targets_recovered_exactly() {
    let cfg = small_frame(4, 8);
    let grid = EstimationGrid::oversampled(&cfg, SlowTime::Symbol, 2, 2).unwrap();
    let mut r = rng(16);
    for trial in 0..10 {
        let d = r.random_range(0..grid.delay_bins());
        let j = r.random_range(0..grid.doppler_bins());
        let gain = Complex64::from_polar(r.random_range(0.1..2.0), r.random_range(0.0..TAU));
        let target =
            Target::from_delay_doppler(grid.delay(d), grid.doppler(j), gain, &cfg).unwrap();
        let x = SymbolGrid::random(&cfg, Constellation::Qam16, Domain::DelayDoppler, trial);
        let obs = synthesize_observation_otfs(&cfg, &x, &target, PsiMode::Approx, 0.0, 0).unwrap();
        let est = ml_estimate_otfs(&obs, &grid, PsiMode::Approx).unwrap();
        assert_eq!((est.delay_bin, est.doppler_bin), (d, j));
        assert!((est.gain - gain).norm() <= 1e-8 * gain.norm());
    }
}

#[test]
fn statistic_at_origin_is_gain_times_energy() {
    let cfg = small_frame(4, 8);
    let grid = EstimationGrid::oversampled(&cfg, SlowTime::Symbol, 1, 1).unwrap();
    let x = SymbolGrid::random(&cfg, Constellation::Qam16, Domain::DelayDoppler, 1);
    let h = Complex64::from_polar(0.7, 1.0);
    let target = Target::from_delay_doppler(0.0, 0.0, h, &cfg).unwrap();
    let obs = synthesize_observation_otfs(&cfg, &x, &target, PsiMode::Approx, 0.0, 0).unwrap();
    let stat = statistic_map(&obs, &grid, PsiMode::Approx).unwrap();
    let zero_doppler = (0..grid.doppler_bins())
        .find(|&j| grid.doppler_index(j) == 0)
        .unwrap();
    let value = stat[grid.flat(0, zero_doppler)];
    let expect = h.norm_sqr() * x.energy();
    assert!((value - expect).abs() <= 1e-12 * expect);
}

#[test]
fn statistic_matches_rebuilt_matrices() {
    let cfg = small_frame(4, 8);
    let grid = EstimationGrid::oversampled(&cfg, SlowTime::Symbol, 2, 2).unwrap();
    let t = cfg.symbol_duration();
    let x = SymbolGrid::random(&cfg, Constellation::Qpsk, Domain::DelayDoppler, 4);
    let target =
        Target::from_delay_doppler(0.33 * t, -0.21 / t, Complex64::new(0.4, 0.3), &cfg).unwrap();
    let obs = synthesize_observation_otfs(&cfg, &x, &target, PsiMode::Approx, 0.5, 9).unwrap();
    let fast = statistic_map(&obs, &grid, PsiMode::Approx).unwrap();
    // independently rebuilt from the explicit-sum oracle
    let y = obs.samples();
    let scale = fast.iter().cloned().fold(0.0, f64::max);
    for d in 0..grid.delay_bins() {
        for j in 0..grid.doppler_bins() {
            let psi = psi_oracle(&cfg, grid.delay(d), grid.doppler(j), PsiMode::Approx);
            let u: Vec<Complex64> = psi
                .iter()
                .map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
                .collect();
            let num: Complex64 = u.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
            let den: f64 = u.iter().map(|a| a.norm_sqr()).sum();
            let v = fast[grid.flat(d, j)];
            assert!((v - num.norm_sqr() / den).abs() <= 1e-9 * scale);
        }
    }
    let dense = statistic_map_dense(&obs, &grid, PsiMode::Approx).unwrap();
    assert!(fast
        .iter()
        .zip(&dense)
        .all(|(a, b)| (a - b).abs() <= 1e-9 * scale));
}

#[test]
fn global_symbol_phase_leaves_statistic_unchanged() {
    let cfg = small_frame(4, 8);
    let grid = EstimationGrid::oversampled(&cfg, SlowTime::Symbol, 2, 2).unwrap();
    let t = cfg.symbol_duration();
    let x = SymbolGrid::random(&cfg, Constellation::Qam16, Domain::DelayDoppler, 5);
    let rotated = SymbolGrid::from_vec(
        4,
        8,
        x.as_slice().iter().map(|v| v * cexp(1.234)).collect(),
        Domain::DelayDoppler,
    )
    .unwrap();
    let target =
        Target::from_delay_doppler(0.2 * t, 0.1 / t, Complex64::new(1.0, 0.0), &cfg).unwrap();
    let obs = synthesize_observation_otfs(&cfg, &x, &target, PsiMode::Approx, 1.0, 3).unwrap();
    let obs_rot =
        jrc_core::otfs::OtfsObservation::new(cfg, rotated, obs.samples().to_vec()).unwrap();
    let a = statistic_map(&obs, &grid, PsiMode::Approx).unwrap();
    let b = statistic_map(&obs_rot, &grid, PsiMode::Approx).unwrap();
    let scale = a.iter().cloned().fold(0.0, f64::max);
    assert!(a
        .iter()
        .zip(&b)
        .all(|(u, v)| (u - v).abs() <= 1e-12 * scale));
}

#[test]
fn rmse_falls_with_snr() {
    let cfg = small_frame(4, 8);
    let grid = EstimationGrid::oversampled(&cfg, SlowTime::Symbol, 4, 4).unwrap();
    let t = cfg.symbol_duration();
    let truth =
        Target::from_delay_doppler(0.3 * t, 0.12 / t, Complex64::new(1.0, 0.0), &cfg).unwrap();
    let mut previous = f64::INFINITY;
    for rho_db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let amp = (10f64.powf(rho_db / 10.0) / cfg.grid_len() as f64).sqrt();
        let mut sq = 0.0;
        for trial in 0..1000u64 {
            let x = SymbolGrid::random(&cfg, Constellation::Qpsk, Domain::DelayDoppler, trial);
            let target = truth.with_gain(Complex64::new(amp, 0.0));
            let obs = synthesize_observation_otfs(
                &cfg,
                &x,
                &target,
                PsiMode::Approx,
                1.0,
                10_000 + trial,
            )
            .unwrap();
            let est = ml_estimate_otfs(&obs, &grid, PsiMode::Approx).unwrap();
            sq += ((est.delay - truth.delay) * cfg.subcarrier_spacing()).powi(2)
                + ((est.doppler - truth.doppler) * t).powi(2);
        }
        let rmse = (sq / 1000.0).sqrt();
        assert!(rmse < previous, "{rho_db} dB: {rmse} vs {previous}");
        previous = rmse;
    }
}

#[test]
fn operator_and_dense_agree_in_exact_mode() {
    let cfg = small_frame(4, 8);
    let t = cfg.symbol_duration();
    let x = random_vec(32, 6);
    let op = PsiOperator::new(&cfg, 0.77 * t, 0.44 / t, PsiMode::Exact).unwrap();
    let oracle = psi_oracle(&cfg, 0.77 * t, 0.44 / t, PsiMode::Exact);
    let expect: Vec<Complex64> = oracle
        .iter()
        .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
        .collect();
    assert!(rel_max_err(&op.apply(&x).unwrap(), &expect) <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_psi_is_unitary(delay_frac in 0.0f64..0.999, doppler_frac in -0.99f64..0.99, seed in any::<u64>()) {
        let cfg = small_frame(4, 8);
        let op = PsiOperator::new(
            &cfg,
            delay_frac * cfg.symbol_duration(),
            doppler_frac * cfg.subcarrier_spacing(),
            PsiMode::Approx,
        ).unwrap();
        let x = random_vec(32, seed);
        let y = op.apply(&x).unwrap();
        let nx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((nx - ny).abs() <= 1e-10 * nx);
    }

    #[test]
    fn closed_form_matches_oracle_anywhere(delay_frac in 0.0f64..0.999, doppler_frac in -0.99f64..0.99) {
        let cfg = small_frame(2, 4);
        let (delay, doppler) = (delay_frac * cfg.symbol_duration(), doppler_frac * cfg.subcarrier_spacing());
        let psi = build_psi(&cfg, delay, doppler, PsiMode::Approx).unwrap();
        let oracle = psi_oracle(&cfg, delay, doppler, PsiMode::Approx);
        prop_assert!(max_entry_err(psi.entries(), &oracle) <= 1e-9);
    }
}
