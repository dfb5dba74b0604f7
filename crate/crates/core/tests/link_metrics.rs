mod common;

use common::*;
use jrc_core::frame::Target;
use jrc_core::link::{compute_link_budget, rate_ofdm, rate_otfs, ForwardChannel, RateGeometry};
use jrc_core::otfs::{build_psi, PsiMode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn rate_matches_brute_force_determinant() {
    let cfg = small_frame(2, 2);
    let mut r = rng(41);
    let t = cfg.symbol_duration();
    for _ in 0..10 {
        let delay = r.random_range(0.0..t);
        let doppler = r.random_range(-0.9..0.9) * cfg.subcarrier_spacing();
        let snr = 10f64.powf(r.random_range(-1.0..2.0));
        for mode in [PsiMode::Approx, PsiMode::Exact] {
            let psi = build_psi(&cfg, delay, doppler, mode).unwrap();
            let rate = rate_otfs(&cfg, snr, psi.entries()).unwrap();
            // I + snr Psi Psi^H written out entry by entry
            let p = psi_oracle(&cfg, delay, doppler, mode);
            let mut a = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for k in 0..4 {
                    let mut acc = Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0);
                    for c in 0..4 {
                        acc += snr * p[i][c] * p[k][c].conj();
                    }
                    a[i][k] = acc;
                }
            }
            let det = leibniz_det(&a);
            assert!(det.im.abs() <= 1e-9 * det.re);
            let oracle = det.re.log2() / 4.0;
            assert!((rate - oracle).abs() <= 1e-9 * oracle.abs(), "{mode:?}");
        }
    }
}

#[test]
fn identity_channel_rate() {
    let cfg = small_frame(4, 8);
    let eye = DMatrix::<Complex64>::identity(32, 32);
    for snr in [0.0, 0.01, 1.0, 10.0, 1e4] {
        let rate = rate_otfs(&cfg, snr, &eye).unwrap();
        let expect = (1.0f64 + snr).log2();
        assert!((rate - expect).abs() <= 1e-9 * expect.max(1e-300));
    }
}

#[test]
fn ofdm_pays_for_the_prefix() {
    let cfg = table_one();
    for snr in [1e-3, 0.5, 10.0, 1e3] {
        let rate = rate_ofdm(&cfg, snr).unwrap();
        assert!(rate < (1.0f64 + snr).log2());
        assert!((rate - 0.8 * (1.0f64 + snr).log2()).abs() <= 1e-12 * rate);
    }
}

#[test]
fn table_one_budget() {
    let b = compute_link_budget(5.89e9, 1.0, 100.0, 20.0, 1.0).unwrap();
    let lambda = 299_792_458.0 / 5.89e9;
    let four_pi = 4.0 * std::f64::consts::PI;
    assert!((b.wavelength - lambda).abs() < 1e-15);
    assert!((b.radar_gain - lambda * lambda * 1e4 / (four_pi.powi(3) * 160_000.0)).abs() <= 1e-20);
    assert!((b.radar_gain - 8.16e-8).abs() <= 0.01e-8);
}

#[test]
fn one_way_channel_rate_is_finite_and_below_snr_bound() {
    let cfg = small_frame(4, 8);
    let t = cfg.symbol_duration();
    let target =
        Target::from_delay_doppler(0.5 * t, 0.3 / t, Complex64::new(1.0, 0.0), &cfg).unwrap();
    let ch = ForwardChannel::from_target(&target, 1.0, RateGeometry::OneWay);
    for mode in [PsiMode::Approx, PsiMode::Exact] {
        let rate = ch.otfs_rate(&cfg, 10.0, mode).unwrap();
        assert!(rate.is_finite() && rate > 0.0);
        assert!(rate <= 11f64.log2() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn otfs_rate_nondecreasing_in_snr(delay_frac in 0.0f64..0.99, doppler_frac in -0.9f64..0.9) {
        let cfg = small_frame(4, 4);
        let psi = build_psi(
            &cfg,
            delay_frac * cfg.symbol_duration(),
            doppler_frac * cfg.subcarrier_spacing(),
            PsiMode::Exact,
        ).unwrap();
        let mut previous = 0.0;
        for i in 0..10 {
            let snr = 10f64.powf(-2.0 + 0.5 * i as f64);
            let rate = rate_otfs(&cfg, snr, psi.entries()).unwrap();
            prop_assert!(rate >= previous);
            previous = rate;
        }
    }

    #[test]
    fn gain_laws(distance in 1.0f64..1e3, gain in 1.0f64..1e3) {
        let a = compute_link_budget(5.89e9, 1.0, gain, distance, 1.0).unwrap();
        let far = compute_link_budget(5.89e9, 1.0, gain, 4.0 * distance, 1.0).unwrap();
        let loud = compute_link_budget(5.89e9, 1.0, 2.0 * gain, distance, 1.0).unwrap();
        prop_assert!((a.radar_gain / far.radar_gain - 256.0).abs() <= 1e-9);
        prop_assert!((a.com_gain / far.com_gain - 16.0).abs() <= 1e-9);
        prop_assert!((loud.radar_gain / a.radar_gain - 4.0).abs() <= 1e-9);
        prop_assert!((loud.com_gain / a.com_gain - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn ofdm_below_identity_otfs(snr in 1e-6f64..1e6) {
        let cfg = table_one();
        let eye = DMatrix::<Complex64>::identity(4, 4);
        let small = small_frame(2, 2);
        prop_assert!(rate_ofdm(&cfg, snr).unwrap() < rate_otfs(&small, snr, &eye).unwrap());
    }
}
