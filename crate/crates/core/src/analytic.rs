//! Closed-form detection analytics for the averaged-energy statistic.
//!
//! With Y ~ CN(0, σ_Y²) the statistic Z = (1/L)·Σ|Y_i|² is Gamma distributed
//! with shape L and scale σ_Y²/L, so every false-alarm and detection
//! probability reduces to the upper tail of an integer-shape Gamma:
//!
//! ```text
//! Q_Γ(L, x) = Σ_{k=0}^{L-1} x^k e^{-x} / k!
//! ```
//!
//! evaluated at x = λL/σ². The series is summed in log space so that large L
//! and large x neither overflow nor underflow prematurely.

use std::fmt;
use std::str::FromStr;

use libm::{erfc, lgamma as ln_gamma};
use thiserror::Error;

use crate::config::{db_to_linear, SensingConfig};
use crate::model::{
    HypothesisVariances, ModelError, Provenance, RocCurve, RocPoint, VarianceModel,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("variance must be positive and finite, got {0}")]
    NonPositiveVariance(f64),
    #[error("averaging depth L must be at least 1")]
    ZeroDof,
    #[error("target probability must lie in (0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("occupied sub-bands M={m} must be strictly less than N={n}")]
    TooManyOccupied { m: usize, n: usize },
    #[error("leakage alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("threshold grid must be non-empty, finite and strictly increasing")]
    BadGrid,
    #[error("unknown analytic model `{0}` (expected exact, normal or onebit)")]
    UnknownModel(String),
    #[error("target detection probability {0} is not reachable")]
    Unreachable(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Result<T> = std::result::Result<T, AnalyticError>;

fn check_dof(l: usize) -> Result<()> {
    if l == 0 {
        Err(AnalyticError::ZeroDof)
    } else {
        Ok(())
    }
}

fn check_var(var: f64) -> Result<()> {
    if var > 0.0 && var.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::NonPositiveVariance(var))
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    // NaN fails this comparison as well.
    if value >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::Negative { name, value })
    }
}

/// Upper tail Q_Γ(L, x) of a unit-scale Gamma with integer shape `l >= 1`.
///
/// Equivalently the probability that a Poisson(x) variable is below `l`.
pub fn gamma_tail(l: usize, x: f64) -> f64 {
    debug_assert!(l >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < l as f64 {
        1.0 - gamma_head_series(l, x)
    } else {
        gamma_tail_series(l, x)
    }
}

/// Lower part 1 − Q_Γ(L, x), accurate when it is small.
pub fn gamma_head(l: usize, x: f64) -> f64 {
    debug_assert!(l >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < l as f64 {
        gamma_head_series(l, x)
    } else {
        1.0 - gamma_tail_series(l, x)
    }
}

/// Σ_{k<L} e^{-x} x^k/k! for x >= L. Terms grow with k, so the sum is taken
/// from the largest term (k = L−1) downward.
fn gamma_tail_series(l: usize, x: f64) -> f64 {
    let top = (l - 1) as f64;
    let log_top = -x + top * x.ln() - ln_gamma(l as f64);
    let mut ratio = 1.0;
    let mut sum = 1.0;
    for k in (1..l).rev() {
        ratio *= k as f64 / x;
        sum += ratio;
        if ratio < f64::EPSILON * 1e-3 * sum {
            break;
        }
    }
    (log_top + sum.ln()).exp()
}

/// Σ_{k>=L} e^{-x} x^k/k! for x < L. Terms shrink with k past L.
fn gamma_head_series(l: usize, x: f64) -> f64 {
    let log_first = -x + l as f64 * x.ln() - ln_gamma(l as f64 + 1.0);
    let mut ratio = 1.0;
    let mut sum = 1.0;
    let mut k = l as f64;
    loop {
        k += 1.0;
        ratio *= x / k;
        sum += ratio;
        if ratio < f64::EPSILON * 1e-3 * sum {
            break;
        }
    }
    (log_first + sum.ln()).exp()
}

/// Standard normal upper tail Q(x).
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Density of Z at `z`: Gamma(shape L, scale σ_Y²/L).
pub fn statistic_pdf(z: f64, l: usize, var_y: f64) -> Result<f64> {
    check_nonneg("z", z)?;
    check_dof(l)?;
    check_var(var_y)?;
    let rate = l as f64 / var_y;
    if z == 0.0 {
        return Ok(if l == 1 { rate } else { 0.0 });
    }
    let lf = l as f64;
    let log_pdf = lf * rate.ln() + (lf - 1.0) * z.ln() - z * rate - ln_gamma(lf);
    Ok(log_pdf.exp())
}

/// CDF of Z at `z`: 1 − Q_Γ(L, z·L/σ_Y²).
pub fn statistic_cdf(z: f64, l: usize, var_y: f64) -> Result<f64> {
    check_nonneg("z", z)?;
    check_dof(l)?;
    check_var(var_y)?;
    Ok(gamma_head(l, z * l as f64 / var_y))
}

fn exceedance(lambda: f64, l: usize, var: f64) -> Result<f64> {
    check_nonneg("lambda", lambda)?;
    check_dof(l)?;
    check_var(var)?;
    Ok(gamma_tail(l, lambda * l as f64 / var))
}

/// False-alarm probability P(Z > λ | H0) with vacant-band variance `noise_var`.
pub fn pfa_exact(lambda: f64, l: usize, noise_var: f64) -> Result<f64> {
    exceedance(lambda, l, noise_var)
}

/// Detection probability P(Z > λ | H1) with occupied-band variance `var_h1`.
pub fn pd_exact(lambda: f64, l: usize, var_h1: f64) -> Result<f64> {
    exceedance(lambda, l, var_h1)
}

/// Inverts [`pfa_exact`]: the threshold whose false-alarm probability is `target`.
pub fn threshold_for_pfa(target: f64, l: usize, var_h0: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(AnalyticError::ProbabilityOutOfRange(target));
    }
    check_dof(l)?;
    check_var(var_h0)?;
    if target == 1.0 {
        return Ok(0.0);
    }
    // Bisection on x = λL/σ², where Q_Γ(L, ·) is strictly decreasing.
    let mut lo = 0.0f64;
    let mut hi = l as f64;
    while gamma_tail(l, hi) >= target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        if gamma_tail(l, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever bracket end lands closer to the target.
    let err = |x: f64| (gamma_tail(l, x) - target).abs();
    let x = if err(lo) <= err(hi) { lo } else { hi };
    Ok(x * var_h0 / l as f64)
}

/// Hypothesis variances of the one-bit leakage model, in units of σ_W².
///
/// Quantization leaks a fraction α of the occupied-band signal power evenly
/// over all N bands:
/// σ₀² = 1 + αγM/N and σ₁² = 1 + γ − αγ + αγM/N.
pub fn onebit_variances(gamma: f64, m: usize, n: usize, alpha: f64) -> Result<HypothesisVariances> {
    check_nonneg("gamma", gamma)?;
    if m >= n {
        return Err(AnalyticError::TooManyOccupied { m, n });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(AnalyticError::AlphaOutOfRange(alpha));
    }
    let spread = alpha * gamma * m as f64 / n as f64;
    let var_h0 = 1.0 + spread;
    let var_h1 = 1.0 + gamma - gamma * alpha + spread;
    Ok(HypothesisVariances::new(var_h0, var_h1, VarianceModel::OneBitLeakage)?)
}

/// Hypothesis variances for `config` under `model`, in absolute units.
pub fn hypothesis_variances(config: &SensingConfig, model: VarianceModel) -> Result<HypothesisVariances> {
    let w = config.noise_var();
    Ok(match model {
        VarianceModel::ExactUnquantized => {
            HypothesisVariances::new(w, w + config.signal_var(), model)?
        }
        VarianceModel::OneBitLeakage => {
            let unit = onebit_variances(
                config.snr(),
                config.m_occupied(),
                config.n_subbands(),
                config.leakage_alpha(),
            )?;
            HypothesisVariances::new(unit.var_h0() * w, unit.var_h1() * w, model)?
        }
    })
}

fn normal_tail(lambda: f64, l: usize, var: f64) -> Result<f64> {
    check_nonneg("lambda", lambda)?;
    check_dof(l)?;
    check_var(var)?;
    // Z has mean σ² and variance σ⁴/L under the CLT approximation.
    Ok(gaussian_tail((lambda / var - 1.0) * (l as f64).sqrt()))
}

/// CLT approximation of [`pfa_exact`].
pub fn pfa_normal_approx(lambda: f64, l: usize, var_h0: f64) -> Result<f64> {
    normal_tail(lambda, l, var_h0)
}

/// CLT approximation of [`pd_exact`].
pub fn pd_normal_approx(lambda: f64, l: usize, var_h1: f64) -> Result<f64> {
    normal_tail(lambda, l, var_h1)
}

/// Which closed form produces an analytic ROC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyticModel {
    /// Exact Gamma law, unquantized variances.
    Exact,
    /// Normal approximation, unquantized variances.
    Normal,
    /// Exact Gamma law with one-bit leakage variances.
    OneBit,
}

impl AnalyticModel {
    pub const ALL: [AnalyticModel; 3] = [AnalyticModel::Exact, AnalyticModel::Normal, AnalyticModel::OneBit];

    pub fn as_str(&self) -> &'static str {
        match self {
            AnalyticModel::Exact => "exact",
            AnalyticModel::Normal => "normal",
            AnalyticModel::OneBit => "onebit",
        }
    }

    pub fn variance_model(&self) -> VarianceModel {
        match self {
            AnalyticModel::Exact | AnalyticModel::Normal => VarianceModel::ExactUnquantized,
            AnalyticModel::OneBit => VarianceModel::OneBitLeakage,
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            AnalyticModel::Exact => Provenance::AnalyticExact,
            AnalyticModel::Normal => Provenance::AnalyticNormal,
            AnalyticModel::OneBit => Provenance::AnalyticOneBit,
        }
    }
}

impl FromStr for AnalyticModel {
    type Err = AnalyticError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-unquantized" => Ok(AnalyticModel::Exact),
            "normal" | "normal-approx" => Ok(AnalyticModel::Normal),
            "onebit" | "one-bit" | "one-bit-leakage" => Ok(AnalyticModel::OneBit),
            other => Err(AnalyticError::UnknownModel(other.to_string())),
        }
    }
}

impl fmt::Display for AnalyticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let sorted = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || !sorted || !grid.iter().all(|v| v.is_finite() && *v >= 0.0) {
        return Err(AnalyticError::BadGrid);
    }
    Ok(())
}

/// ROC of the closed-form `model` evaluated at every threshold in `lambda_grid`.
pub fn roc_analytic(config: &SensingConfig, model: AnalyticModel, lambda_grid: &[f64]) -> Result<RocCurve> {
    check_grid(lambda_grid)?;
    let vars = hypothesis_variances(config, model.variance_model())?;
    let l = config.avg_captures();
    let points = lambda_grid
        .iter()
        .map(|&lambda| {
            let (pfa, pd) = match model {
                AnalyticModel::Exact | AnalyticModel::OneBit => (
                    pfa_exact(lambda, l, vars.var_h0())?,
                    pd_exact(lambda, l, vars.var_h1())?,
                ),
                AnalyticModel::Normal => (
                    pfa_normal_approx(lambda, l, vars.var_h0())?,
                    pd_normal_approx(lambda, l, vars.var_h1())?,
                ),
            };
            Ok(RocPoint { threshold: lambda, pfa, pd })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurve::new(points, model.provenance(), config.clone())?)
}

/// `points` values spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Thresholds hitting each target false-alarm rate, sorted ascending and
/// deduplicated.
pub fn thresholds_for_pfas(pfas: &[f64], l: usize, var_h0: f64) -> Result<Vec<f64>> {
    let mut grid = pfas
        .iter()
        .map(|&p| threshold_for_pfa(p, l, var_h0))
        .collect::<Result<Vec<_>>>()?;
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Detection probability of the CFAR detector at per-band SNR `gamma`.
///
/// The threshold is set from the model's own H0 variance so that the
/// false-alarm rate equals `pfa`.
pub fn cfar_pd(
    model: VarianceModel,
    gamma: f64,
    pfa: f64,
    l: usize,
    m: usize,
    n: usize,
    alpha: f64,
) -> Result<f64> {
    let vars = match model {
        VarianceModel::ExactUnquantized => HypothesisVariances::new(1.0, 1.0 + gamma, model)?,
        VarianceModel::OneBitLeakage => onebit_variances(gamma, m, n, alpha)?,
    };
    let lambda = threshold_for_pfa(pfa, l, vars.var_h0())?;
    pd_exact(lambda, l, vars.var_h1())
}

/// Smallest per-band SNR (dB) at which the CFAR detector reaches `pd_target`
/// for false-alarm rate `pfa`.
pub fn required_snr_db(
    model: VarianceModel,
    pd_target: f64,
    pfa: f64,
    l: usize,
    m: usize,
    n: usize,
    alpha: f64,
) -> Result<f64> {
    if !(pd_target > pfa && pd_target < 1.0) {
        return Err(AnalyticError::Unreachable(pd_target));
    }
    let pd = |db: f64| cfar_pd(model, db_to_linear(db), pfa, l, m, n, alpha);
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if pd(hi)? < pd_target {
        return Err(AnalyticError::Unreachable(pd_target));
    }
    while pd(lo)? >= pd_target {
        hi = lo;
        lo -= 60.0;
        if lo < -600.0 {
            return Err(AnalyticError::Unreachable(pd_target));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 {
            break;
        }
        if pd(mid)? < pd_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
