//! Repeated-trial estimation of false-alarm and detection rates.
//!
//! Each trial draws an occupancy, generates one window, runs the receiver and
//! compares every statistic against every threshold of the grid. False alarms
//! are counted over vacant bands and detections over occupied bands. Trials
//! draw from independent substreams keyed by `(master_seed, trial)` and the
//! counts are reduced with integer addition, so the result is identical for
//! any number of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{self, AnalyticError};
use crate::config::{Quantizer, SensingConfig};
use crate::model::{ModelError, Provenance, RocCurve, RocPoint, VarianceModel};
use crate::rng::SimRng;
use crate::signal::{SignalEngine, SignalError};

/// Trials used when none are requested.
pub const DEFAULT_TRIALS: u64 = 10_000;
/// Trials of the full-scale reproduction runs.
pub const FULL_TRIALS: u64 = 100_000;
pub const DEFAULT_GRID_POINTS: usize = 50;
pub const DENSE_GRID_POINTS: usize = 128;

#[derive(Debug, Error)]
pub enum McError {
    #[error("a plan needs at least one trial")]
    NoTrials,
    #[error("threshold grid must be non-empty, finite, non-negative and strictly increasing")]
    BadGrid,
    #[error("cannot build a worker pool: {0}")]
    Pool(String),
    #[error("no overlapping false-alarm range between `{0}` and `{1}`")]
    NoOverlap(String, String),
    #[error("comparison needs a reference and at least one other curve")]
    TooFewCurves,
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What variance the CFAR threshold is computed from in the quantized case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CfarBasis {
    /// The leakage-model H0 variance σ₀² (quantized pipelines only).
    #[default]
    Quantized,
    /// The raw noise variance σ_W².
    Raw,
}

impl FromStr for CfarBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quantized" => Ok(CfarBasis::Quantized),
            "raw" => Ok(CfarBasis::Raw),
            other => Err(format!("unknown CFAR basis `{other}` (expected quantized or raw)")),
        }
    }
}

impl fmt::Display for CfarBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CfarBasis::Quantized => "quantized",
            CfarBasis::Raw => "raw",
        })
    }
}

/// H0 variance used to place CFAR thresholds for `config`.
pub fn cfar_noise_var(config: &SensingConfig, basis: CfarBasis) -> Result<f64, McError> {
    Ok(match (config.quantizer(), basis) {
        (Quantizer::OneBit, CfarBasis::Quantized) => {
            analytic::hypothesis_variances(config, VarianceModel::OneBitLeakage)?.var_h0()
        }
        _ => config.noise_var(),
    })
}

/// Default log-spaced false-alarm targets on [1e-3, 1].
pub fn default_pfa_targets(dense: bool) -> Vec<f64> {
    let points = if dense { DENSE_GRID_POINTS } else { DEFAULT_GRID_POINTS };
    analytic::log_spaced(1e-3, 1.0, points)
}

/// Ascending thresholds realising each false-alarm target for `config`.
pub fn lambda_grid_for_pfas(config: &SensingConfig, pfas: &[f64], basis: CfarBasis) -> Result<Vec<f64>, McError> {
    let var = cfar_noise_var(config, basis)?;
    Ok(analytic::thresholds_for_pfas(pfas, config.avg_captures(), var)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    config: SensingConfig,
    trials: u64,
    master_seed: u64,
    lambda_grid: Vec<f64>,
}

impl TrialPlan {
    pub fn new(config: SensingConfig, trials: u64, master_seed: u64, lambda_grid: Vec<f64>) -> Result<Self, McError> {
        if trials == 0 {
            return Err(McError::NoTrials);
        }
        let ok = !lambda_grid.is_empty()
            && lambda_grid.iter().all(|v| v.is_finite() && *v >= 0.0)
            && lambda_grid.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(McError::BadGrid);
        }
        Ok(TrialPlan { config, trials, master_seed, lambda_grid })
    }

    pub fn config(&self) -> &SensingConfig {
        &self.config
    }
    pub fn trials(&self) -> u64 {
        self.trials
    }
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda_grid
    }
}

/// Counts for one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateCounts {
    pub fa_count: u64,
    pub fa_total: u64,
    pub det_count: u64,
    pub det_total: u64,
}

fn ratio(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn binomial_se(count: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = ratio(count, total);
    (p * (1.0 - p) / total as f64).sqrt()
}

impl RateCounts {
    /// Empirical false-alarm rate; 0 when there were no vacant bands.
    pub fn pfa_hat(&self) -> f64 {
        ratio(self.fa_count, self.fa_total)
    }
    /// Empirical detection rate; 0 when there were no occupied bands.
    pub fn pd_hat(&self) -> f64 {
        ratio(self.det_count, self.det_total)
    }
    pub fn pfa_se(&self) -> f64 {
        binomial_se(self.fa_count, self.fa_total)
    }
    pub fn pd_se(&self) -> f64 {
        binomial_se(self.det_count, self.det_total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRates {
    lambdas: Vec<f64>,
    counts: Vec<RateCounts>,
}

impl EmpiricalRates {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn counts(&self) -> &[RateCounts] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &RateCounts)> {
        self.lambdas.iter().copied().zip(&self.counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub rates: EmpiricalRates,
    pub roc: RocCurve,
}

/// Exceedance counts of one trial, per threshold: (false alarms, detections).
fn run_trial(engine: &SignalEngine, plan: &TrialPlan, trial: u64) -> Result<Vec<(u64, u64)>, McError> {
    let mut rng = SimRng::substream(plan.master_seed, trial);
    let occupancy = engine.draw_occupancy(&mut rng);
    let window = engine.generate_window(&occupancy, trial, &mut rng)?;
    let stats = engine.process(&window)?.into_statistics();

    let (mut vacant, mut occupied): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for (band, z) in stats.into_iter().enumerate() {
        if occupancy.is_occupied(band) {
            occupied.push(z);
        } else {
            vacant.push(z);
        }
    }
    vacant.sort_unstable_by(f64::total_cmp);
    occupied.sort_unstable_by(f64::total_cmp);
    let above = |sorted: &[f64], lambda: f64| (sorted.len() - sorted.partition_point(|&z| z <= lambda)) as u64;
    Ok(plan
        .lambda_grid
        .iter()
        .map(|&lambda| (above(&vacant, lambda), above(&occupied, lambda)))
        .collect())
}

fn add_counts(mut acc: Vec<(u64, u64)>, other: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    for (a, b) in acc.iter_mut().zip(other) {
        a.0 += b.0;
        a.1 += b.1;
    }
    acc
}

/// Runs `plan` on the current rayon pool.
pub fn run(plan: &TrialPlan) -> Result<SimulationResult, McError> {
    let engine = SignalEngine::new(plan.config.clone())?;
    let grid_len = plan.lambda_grid.len();
    let totals = (0..plan.trials)
        .into_par_iter()
        .try_fold(
            || vec![(0u64, 0u64); grid_len],
            |acc, trial| Ok::<_, McError>(add_counts(acc, run_trial(&engine, plan, trial)?)),
        )
        .try_reduce(|| vec![(0u64, 0u64); grid_len], |a, b| Ok(add_counts(a, b)))?;

    let n = plan.config.n_subbands() as u64;
    let m = plan.config.m_occupied() as u64;
    let counts: Vec<RateCounts> = totals
        .into_iter()
        .map(|(fa, det)| RateCounts {
            fa_count: fa,
            fa_total: plan.trials * (n - m),
            det_count: det,
            det_total: plan.trials * m,
        })
        .collect();
    let points = plan
        .lambda_grid
        .iter()
        .zip(&counts)
        .map(|(&threshold, c)| RocPoint { threshold, pfa: c.pfa_hat(), pd: c.pd_hat() })
        .collect();
    let roc = RocCurve::new(points, Provenance::Simulated, plan.config.clone())?;
    Ok(SimulationResult {
        rates: EmpiricalRates { lambdas: plan.lambda_grid.clone(), counts },
        roc,
    })
}

/// Runs `plan` on a dedicated pool of `workers` threads.
pub fn run_with_workers(plan: &TrialPlan, workers: usize) -> Result<SimulationResult, McError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| McError::Pool(e.to_string()))?;
    pool.install(|| run(plan))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub pfa_lo: f64,
    pub pfa_hi: f64,
    pub points: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { pfa_lo: 0.01, pfa_hi: 0.99, points: 512 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveGap {
    pub label: String,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// False-alarm rate at which the largest gap occurs.
    pub pfa_at_max: f64,
    pub pfa_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub reference: String,
    pub gaps: Vec<CurveGap>,
}

impl ComparisonReport {
    /// Largest gap over all compared curves.
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().map(|g| g.max_gap).fold(0.0, f64::max)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gaps {
            writeln!(
                f,
                "{} vs {}: max |dPD| = {:.6} at PFA = {:.4}, mean |dPD| = {:.6} over PFA in [{:.4}, {:.4}]",
                self.reference, g.label, g.max_gap, g.pfa_at_max, g.mean_gap, g.pfa_range.0, g.pfa_range.1
            )?;
        }
        Ok(())
    }
}

fn pfa_span(curve: &RocCurve) -> (f64, f64) {
    let pts = curve.points();
    (pts[pts.len() - 1].pfa, pts[0].pfa)
}

/// Gaps in detection probability between `reference` and each other curve,
/// on a shared log-spaced false-alarm grid inside `opts`' range and both
/// curves' coverage.
pub fn roc_compare(
    reference: (&str, &RocCurve),
    others: &[(&str, &RocCurve)],
    opts: CompareOptions,
) -> Result<ComparisonReport, McError> {
    if others.is_empty() {
        return Err(McError::TooFewCurves);
    }
    let (ref_label, ref_curve) = reference;
    let (ref_lo, ref_hi) = pfa_span(ref_curve);
    let mut gaps = Vec::with_capacity(others.len());
    for &(label, curve) in others {
        let (lo, hi) = pfa_span(curve);
        let lo = opts.pfa_lo.max(ref_lo).max(lo);
        let hi = opts.pfa_hi.min(ref_hi).min(hi);
        if lo.is_nan() || hi.is_nan() || lo > hi || lo <= 0.0 {
            return Err(McError::NoOverlap(ref_label.to_string(), label.to_string()));
        }
        let grid = analytic::log_spaced(lo, hi, opts.points.max(2));
        let (mut max_gap, mut pfa_at_max, mut sum) = (0.0f64, lo, 0.0);
        for &p in &grid {
            let a = ref_curve.pd_at_pfa(p).expect("grid lies inside the reference span");
            let b = curve.pd_at_pfa(p).expect("grid lies inside the curve span");
            let gap = (a - b).abs();
            sum += gap;
            if gap > max_gap {
                max_gap = gap;
                pfa_at_max = p;
            }
        }
        gaps.push(CurveGap {
            label: label.to_string(),
            max_gap,
            mean_gap: sum / grid.len() as f64,
            pfa_at_max,
            pfa_range: (lo, hi),
        });
    }
    Ok(ComparisonReport { reference: ref_label.to_string(), gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{roc_analytic, threshold_for_pfa, AnalyticModel};

    fn small_config(quantizer: Quantizer) -> SensingConfig {
        SensingConfig::builder()
            .n_subbands(64)
            .m_occupied(8)
            .avg_captures(4)
            .snr_db(0.0)
            .quantizer(quantizer)
            .build()
            .unwrap()
    }

    #[test]
    fn plan_validation() {
        let cfg = small_config(Quantizer::None);
        assert!(matches!(TrialPlan::new(cfg.clone(), 0, 1, vec![1.0]), Err(McError::NoTrials)));
        assert!(matches!(TrialPlan::new(cfg.clone(), 1, 1, vec![]), Err(McError::BadGrid)));
        assert!(matches!(TrialPlan::new(cfg.clone(), 1, 1, vec![2.0, 1.0]), Err(McError::BadGrid)));
        assert!(matches!(TrialPlan::new(cfg, 1, 1, vec![-1.0]), Err(McError::BadGrid)));
    }

    #[test]
    fn zero_threshold_fires_everywhere() {
        let plan = TrialPlan::new(small_config(Quantizer::None), 50, 3, vec![0.0]).unwrap();
        let res = run(&plan).unwrap();
        let c = res.rates.counts()[0];
        assert_eq!(c.pfa_hat(), 1.0);
        assert_eq!(c.pd_hat(), 1.0);
        assert_eq!(c.fa_total + c.det_total, 50 * 64);
    }

    #[test]
    fn rates_are_monotone_and_totals_partition() {
        let cfg = small_config(Quantizer::OneBit);
        let grid = lambda_grid_for_pfas(&cfg, &default_pfa_targets(false), CfarBasis::Quantized).unwrap();
        let plan = TrialPlan::new(cfg, 200, 11, grid).unwrap();
        let res = run(&plan).unwrap();
        for w in res.rates.counts().windows(2) {
            assert!(w[1].fa_count <= w[0].fa_count);
            assert!(w[1].det_count <= w[0].det_count);
        }
        for c in res.rates.counts() {
            assert_eq!(c.fa_total, 200 * 56);
            assert_eq!(c.det_total, 200 * 8);
        }
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let cfg = small_config(Quantizer::OneBit);
        let grid = lambda_grid_for_pfas(&cfg, &default_pfa_targets(false), CfarBasis::Quantized).unwrap();
        let plan = TrialPlan::new(cfg, 300, 42, grid).unwrap();
        let one = run_with_workers(&plan, 1).unwrap();
        let eight = run_with_workers(&plan, 8).unwrap();
        assert_eq!(one, eight);
        let other_seed = TrialPlan::new(plan.config().clone(), 300, 43, plan.lambda_grid().to_vec()).unwrap();
        assert_ne!(run(&other_seed).unwrap().rates, one.rates);
    }

    #[test]
    fn noise_only_false_alarm_rate_hits_target() {
        let cfg = SensingConfig::builder()
            .n_subbands(128)
            .m_occupied(0)
            .avg_captures(4)
            .signal_var(0.0)
            .build()
            .unwrap();
        let lambda = threshold_for_pfa(0.1, 4, 1.0).unwrap();
        let plan = TrialPlan::new(cfg, 2_000, 5, vec![lambda]).unwrap();
        let c = run(&plan).unwrap().rates.counts()[0];
        assert!((c.pfa_hat() - 0.1).abs() <= 4.0 * c.pfa_se(), "{} ± {}", c.pfa_hat(), c.pfa_se());
        // No occupied bands: detection rate reported as 0.
        assert_eq!(c.det_total, 0);
        assert_eq!(c.pd_hat(), 0.0);
    }

    #[test]
    fn compare_identical_and_distinct() {
        let cfg = SensingConfig::builder().avg_captures(8).snr_db(0.0).build().unwrap();
        let grid = lambda_grid_for_pfas(&cfg, &analytic::log_spaced(1e-3, 1.0, 400), CfarBasis::Raw).unwrap();
        let exact = roc_analytic(&cfg, AnalyticModel::Exact, &grid).unwrap();
        let normal = roc_analytic(&cfg, AnalyticModel::Normal, &grid).unwrap();
        let same = roc_compare(("exact", &exact), &[("exact", &exact)], CompareOptions::default()).unwrap();
        assert_eq!(same.max_gap(), 0.0);
        assert_eq!(same.gaps[0].mean_gap, 0.0);
        let diff = roc_compare(("exact", &exact), &[("normal", &normal)], CompareOptions::default()).unwrap();
        assert!(diff.max_gap() > 0.05, "{diff}");
        assert!(matches!(roc_compare(("exact", &exact), &[], CompareOptions::default()), Err(McError::TooFewCurves)));
    }
}
