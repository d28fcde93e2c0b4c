//! Statistical behaviour of the trial harness against the closed forms.

use onebit_sense::analytic::{pfa_exact, pd_exact};
use onebit_sense::montecarlo::{default_pfa_targets, lambda_grid_for_pfas, run, run_with_workers};
use onebit_sense::{CfarBasis, SensingConfig, TrialPlan};

#[test]
fn empirical_rates_cover_closed_form_within_four_se() {
    // Small unquantized scenario repeated with independent seeds.
    let cfg = SensingConfig::builder().n_subbands(64).m_occupied(8).avg_captures(4).snr_db(0.0).build().unwrap();
    let grid = lambda_grid_for_pfas(&cfg, &[0.5, 0.2, 0.1, 0.05], CfarBasis::Raw).unwrap();
    let (mut inside, mut total) = (0, 0);
    for rep in 0..100u64 {
        let plan = TrialPlan::new(cfg.clone(), 100, 1_000 + rep, grid.clone()).unwrap();
        let res = run(&plan).unwrap();
        for (lambda, c) in res.rates.iter() {
            let p = pfa_exact(lambda, 4, 1.0).unwrap();
            let se = (p * (1.0 - p) / c.fa_total as f64).sqrt();
            total += 1;
            if (c.pfa_hat() - p).abs() <= 4.0 * se {
                inside += 1;
            }
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

#[test]
fn detection_rate_tracks_closed_form() {
    let cfg = SensingConfig::builder().n_subbands(256).m_occupied(32).avg_captures(8).snr_db(0.0).build().unwrap();
    let grid = lambda_grid_for_pfas(&cfg, &default_pfa_targets(false), CfarBasis::Raw).unwrap();
    let res = run(&TrialPlan::new(cfg, 2_000, 77, grid).unwrap()).unwrap();
    for (lambda, c) in res.rates.iter() {
        let p = pd_exact(lambda, 8, 2.0).unwrap();
        assert!((c.pd_hat() - p).abs() <= 5.0 * c.pd_se().max(1e-4), "λ={lambda}: {} vs {p}", c.pd_hat());
    }
}

#[test]
fn seed_fully_determines_counts() {
    let cfg = SensingConfig::builder().n_subbands(128).m_occupied(12).avg_captures(2).build().unwrap();
    let grid = lambda_grid_for_pfas(&cfg, &default_pfa_targets(true), CfarBasis::Raw).unwrap();
    let plan = TrialPlan::new(cfg, 500, 2024, grid).unwrap();
    let a = run_with_workers(&plan, 1).unwrap();
    let b = run_with_workers(&plan, 3).unwrap();
    let c = run(&plan).unwrap();
    assert_eq!(a.rates, b.rates);
    assert_eq!(a.rates, c.rates);
}
