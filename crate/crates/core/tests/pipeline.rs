//! Sample-moment checks of the window generator and receiver.

use num_complex::Complex64;
use onebit_sense::fft::UnitaryFft;
use onebit_sense::signal::one_bit_quantize;
use onebit_sense::{Quantizer, RssiMode, SensingConfig, SignalEngine, SignalModel, SimRng};
use proptest::prelude::*;
use rand::Rng;

fn config(n: usize, m: usize, l: usize, signal_var: f64) -> onebit_sense::SensingConfigBuilder {
    SensingConfig::builder().n_subbands(n).m_occupied(m).avg_captures(l).signal_var(signal_var)
}

/// Mean per-bin power of the unquantized spectra over `windows` windows,
/// split into occupied and vacant bins.
fn bin_powers(engine: &SignalEngine, windows: u64, seed: u64) -> (f64, f64) {
    let (mut occ_sum, mut occ_n, mut vac_sum, mut vac_n) = (0.0, 0u64, 0.0, 0u64);
    for w in 0..windows {
        let mut rng = SimRng::substream(seed, w);
        let occ = engine.draw_occupancy(&mut rng);
        let window = engine.generate_window(&occ, w, &mut rng).unwrap();
        for capture in window.captures() {
            let y = engine.unquantized_spectrum(capture).unwrap();
            for (band, v) in y.iter().enumerate() {
                if occ.is_occupied(band) {
                    occ_sum += v.norm_sqr();
                    occ_n += 1;
                } else {
                    vac_sum += v.norm_sqr();
                    vac_n += 1;
                }
            }
        }
    }
    (occ_sum / occ_n.max(1) as f64, vac_sum / vac_n as f64)
}

#[test]
fn noise_only_bins_have_noise_variance() {
    let engine = SignalEngine::new(config(64, 0, 1, 0.0).noise_var(2.0).build().unwrap()).unwrap();
    let (_, vacant) = bin_powers(&engine, 10_000, 1);
    assert!((vacant / 2.0 - 1.0).abs() < 0.01, "{vacant}");
}

#[test]
fn occupied_and_vacant_bin_variances() {
    let engine = SignalEngine::new(config(64, 16, 1, 1.5).build().unwrap()).unwrap();
    let (occupied, vacant) = bin_powers(&engine, 10_000, 2);
    assert!((occupied / 2.5 - 1.0).abs() < 0.01, "{occupied}");
    assert!((vacant - 1.0).abs() < 0.01, "{vacant}");
}

#[test]
fn qam_block_fading_has_expected_mean_power() {
    let cfg = config(64, 16, 4, 2.0).signal_model(SignalModel::Qam4BlockFading).build().unwrap();
    let engine = SignalEngine::new(cfg).unwrap();
    let (occupied, vacant) = bin_powers(&engine, 10_000, 3);
    assert!((occupied / 3.0 - 1.0).abs() < 0.02, "{occupied}");
    assert!((vacant - 1.0).abs() < 0.01, "{vacant}");
}

#[test]
fn occupancy_is_uniform() {
    let cfg = config(1024, 100, 1, 1.0).build().unwrap();
    let engine = SignalEngine::new(cfg).unwrap();
    let draws = 100_000u64;
    let mut hits = vec![0u64; 1024];
    let mut rng = SimRng::new(4);
    for _ in 0..draws {
        for &i in engine.draw_occupancy(&mut rng).indices() {
            hits[i] += 1;
        }
    }
    let p = 100.0 / 1024.0;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    // 3σ per index; with 1024 indices allow the rare 3σ excursion.
    let outliers = hits.iter().filter(|&&h| (h as f64 - mean).abs() > 3.0 * sigma).count();
    assert!(outliers <= 8, "{outliers} indices outside 3 sigma");
    assert!(hits.iter().all(|&h| (h as f64 - mean).abs() < 5.0 * sigma));
}

#[test]
fn estimated_rssi_converges_to_ideal() {
    let cfg = config(1024, 100, 8, 1.0).rssi_mode(RssiMode::Estimated).build().unwrap();
    let ideal = cfg.total_power();
    let engine = SignalEngine::new(cfg).unwrap();
    let mut sum = 0.0;
    for w in 0..1_000 {
        let mut rng = SimRng::substream(5, w);
        let occ = engine.draw_occupancy(&mut rng);
        sum += engine.generate_window(&occ, w, &mut rng).unwrap().power_reading();
    }
    let mean = sum / 1_000.0;
    assert!((mean / ideal - 1.0).abs() < 0.01, "{mean} vs {ideal}");
}

#[test]
fn quantized_spectra_preserve_power_reading() {
    for rssi in [RssiMode::Ideal, RssiMode::Estimated] {
        let cfg = config(1024, 100, 4, 1.0).quantizer(Quantizer::OneBit).rssi_mode(rssi).build().unwrap();
        let engine = SignalEngine::new(cfg).unwrap();
        for w in 0..20 {
            let mut rng = SimRng::substream(6, w);
            let occ = engine.draw_occupancy(&mut rng);
            let window = engine.generate_window(&occ, w, &mut rng).unwrap();
            let p = window.power_reading();
            let spectra = engine.process(&window).unwrap();
            for i in 0..spectra.capture_count() {
                let total: f64 = spectra.spectrum(i).iter().map(|y| y.norm_sqr()).sum();
                assert!(((total - p) / p).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #[test]
    fn parseval_holds_for_any_sign_capture(bits in proptest::collection::vec(any::<(bool, bool)>(), 256), power in 1e-3f64..1e6) {
        let cfg = config(256, 10, 1, 1.0).build().unwrap();
        let engine = SignalEngine::new(cfg).unwrap();
        let capture: Vec<Complex64> = bits
            .iter()
            .map(|&(a, b)| Complex64::new(if a { 1.0 } else { -1.0 }, if b { 1.0 } else { -1.0 }))
            .collect();
        let y = engine.scaled_spectrum(&capture, power).unwrap();
        let total: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!(((total - power) / power).abs() < 1e-9);
    }

    #[test]
    fn quantizer_alphabet_is_closed(samples in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
        let raw: Vec<Complex64> = samples.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        for q in one_bit_quantize(&raw) {
            prop_assert!(q.re.abs() == 1.0 && q.im.abs() == 1.0);
            prop_assert_eq!(q.norm_sqr(), 2.0);
        }
    }

    #[test]
    fn forward_inverse_is_identity(seed in any::<u64>(), log_n in 0u32..11) {
        let n = 1usize << log_n;
        let fft = UnitaryFft::new(n).unwrap();
        let mut rng = SimRng::new(seed);
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))).collect();
        let mut y = x.clone();
        fft.forward(&mut y);
        fft.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn detections_shrink_with_threshold(z in proptest::collection::vec(0.0f64..10.0, 1..200), a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let d_lo = onebit_sense::signal::detect(&z, lo);
        let d_hi = onebit_sense::signal::detect(&z, hi);
        for (x, y) in d_lo.iter().zip(&d_hi) {
            prop_assert!(!*y || *x);
        }
    }
}
