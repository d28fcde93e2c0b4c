//! Domain types shared by the analytics, the receive pipeline and the
//! Monte Carlo harness. Constructors reject any value that breaks a type
//! invariant.

use num_complex::Complex64;
use thiserror::Error;

use crate::config::SensingConfig;

/// Slack allowed when checking monotonicity of floating-point curves.
const CURVE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("sub-band index {index} out of range for N={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("sub-band index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("occupancy of {got} bands, expected M={expected}")]
    OccupancyCount { got: usize, expected: usize },
    #[error("expected {expected} samples (L*N), got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("occupancy is defined over {occupancy_n} bands but the window has N={n}")]
    BandCountMismatch { occupancy_n: usize, n: usize },
    #[error("power reading must be positive and finite, got {0}")]
    BadPowerReading(f64),
    #[error("capture count must be at least 1")]
    NoCaptures,
    #[error("hypothesis variances must be positive and finite (h0={h0}, h1={h1})")]
    NonPositiveVariance { h0: f64, h1: f64 },
    #[error("H1 variance {h1} is below H0 variance {h0}")]
    InvertedVariances { h0: f64, h1: f64 },
    #[error("ROC curve has no points")]
    EmptyCurve,
    #[error("ROC point {index}: {reason}")]
    BadRocPoint { index: usize, reason: &'static str },
}

/// Set of occupied sub-band indices within `[0, N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    indices: Vec<usize>,
    mask: Vec<bool>,
}

impl Occupancy {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self, ModelError> {
        let mut mask = vec![false; n];
        for &index in &indices {
            if index >= n {
                return Err(ModelError::IndexOutOfRange { index, n });
            }
            if mask[index] {
                return Err(ModelError::DuplicateIndex(index));
            }
            mask[index] = true;
        }
        indices.sort_unstable();
        Ok(Occupancy { indices, mask })
    }

    /// Like [`Occupancy::new`], additionally requiring exactly M indices.
    pub fn for_config(indices: Vec<usize>, config: &SensingConfig) -> Result<Self, ModelError> {
        if indices.len() != config.m_occupied() {
            return Err(ModelError::OccupancyCount {
                got: indices.len(),
                expected: config.m_occupied(),
            });
        }
        Self::new(indices, config.n_subbands())
    }

    /// Sorted occupied indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_subbands(&self) -> usize {
        self.mask.len()
    }

    pub fn is_occupied(&self, band: usize) -> bool {
        self.mask.get(band).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// One window of L·N time-domain samples (L contiguous captures of N).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCapture {
    samples: Vec<Complex64>,
    captures: usize,
    occupancy: Occupancy,
    power_reading: f64,
    window_index: u64,
}

impl WindowCapture {
    pub fn new(
        samples: Vec<Complex64>,
        captures: usize,
        occupancy: Occupancy,
        power_reading: f64,
        window_index: u64,
    ) -> Result<Self, ModelError> {
        if captures == 0 {
            return Err(ModelError::NoCaptures);
        }
        let n = occupancy.n_subbands();
        if samples.len() != captures * n {
            return Err(ModelError::SampleCount { expected: captures * n, got: samples.len() });
        }
        if !(power_reading > 0.0 && power_reading.is_finite()) {
            return Err(ModelError::BadPowerReading(power_reading));
        }
        Ok(WindowCapture { samples, captures, occupancy, power_reading, window_index })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Time samples of capture `i`.
    pub fn capture(&self, i: usize) -> &[Complex64] {
        let n = self.n_subbands();
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn captures(&self) -> impl Iterator<Item = &[Complex64]> {
        self.samples.chunks_exact(self.n_subbands())
    }

    pub fn capture_count(&self) -> usize {
        self.captures
    }

    pub fn n_subbands(&self) -> usize {
        self.occupancy.n_subbands()
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    /// The RSSI reading P_j for this window.
    pub fn power_reading(&self) -> f64 {
        self.power_reading
    }

    pub fn window_index(&self) -> u64 {
        self.window_index
    }
}

/// Per-capture spectra of one window and the per-sub-band energy statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumWindow {
    bins: Vec<Complex64>,
    captures: usize,
    statistics: Vec<f64>,
}

impl SpectrumWindow {
    /// `bins` holds `captures` spectra of equal length, row-major.
    pub fn from_bins(bins: Vec<Complex64>, captures: usize) -> Result<Self, ModelError> {
        let statistics = energy_statistics(&bins, captures)?;
        Ok(SpectrumWindow { bins, captures, statistics })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn spectrum(&self, capture: usize) -> &[Complex64] {
        let n = self.n_subbands();
        &self.bins[capture * n..(capture + 1) * n]
    }

    pub fn capture_count(&self) -> usize {
        self.captures
    }

    pub fn n_subbands(&self) -> usize {
        self.statistics.len()
    }

    /// Decision statistics Z_n, one per sub-band.
    pub fn statistics(&self) -> &[f64] {
        &self.statistics
    }

    pub fn into_statistics(self) -> Vec<f64> {
        self.statistics
    }
}

/// Averages |Y|² over `captures` row-major spectra: Z_n = (1/L)·Σ_i |Y_{n,i}|².
pub fn energy_statistics(bins: &[Complex64], captures: usize) -> Result<Vec<f64>, ModelError> {
    if captures == 0 {
        return Err(ModelError::NoCaptures);
    }
    if bins.is_empty() || !bins.len().is_multiple_of(captures) {
        return Err(ModelError::SampleCount {
            expected: captures * (bins.len() / captures).max(1),
            got: bins.len(),
        });
    }
    let n = bins.len() / captures;
    let mut z = vec![0.0; n];
    for spectrum in bins.chunks_exact(n) {
        for (acc, y) in z.iter_mut().zip(spectrum) {
            *acc += y.norm_sqr();
        }
    }
    let inv = 1.0 / captures as f64;
    z.iter_mut().for_each(|v| *v *= inv);
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceModel {
    ExactUnquantized,
    OneBitLeakage,
}

/// Per-bin variances of the transform output under H0 (vacant) and H1 (occupied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisVariances {
    var_h0: f64,
    var_h1: f64,
    model: VarianceModel,
}

impl HypothesisVariances {
    pub fn new(var_h0: f64, var_h1: f64, model: VarianceModel) -> Result<Self, ModelError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(var_h0) || !ok(var_h1) {
            return Err(ModelError::NonPositiveVariance { h0: var_h0, h1: var_h1 });
        }
        if var_h1 < var_h0 {
            return Err(ModelError::InvertedVariances { h0: var_h0, h1: var_h1 });
        }
        Ok(HypothesisVariances { var_h0, var_h1, model })
    }

    pub fn var_h0(&self) -> f64 {
        self.var_h0
    }

    pub fn var_h1(&self) -> f64 {
        self.var_h1
    }

    pub fn model(&self) -> VarianceModel {
        self.model
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    AnalyticExact,
    AnalyticNormal,
    AnalyticOneBit,
    Simulated,
}

impl Provenance {
    pub fn is_analytic(&self) -> bool {
        !matches!(self, Provenance::Simulated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// Operating points of a detector ordered by increasing threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    provenance: Provenance,
    config: SensingConfig,
}

impl RocCurve {
    pub fn new(
        points: Vec<RocPoint>,
        provenance: Provenance,
        config: SensingConfig,
    ) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyCurve);
        }
        let bad = |index, reason| Err(ModelError::BadRocPoint { index, reason });
        let check_pd_dominance = provenance.is_analytic() && config.signal_var() > 0.0;
        for (index, p) in points.iter().enumerate() {
            if p.threshold.is_nan() || p.threshold < 0.0 {
                return bad(index, "threshold must be non-negative");
            }
            if !(0.0..=1.0).contains(&p.pfa) || !(0.0..=1.0).contains(&p.pd) {
                return bad(index, "probabilities must lie in [0, 1]");
            }
            if check_pd_dominance && p.pd + CURVE_SLACK < p.pfa {
                return bad(index, "pd below pfa on an analytic curve with signal present");
            }
            if index > 0 {
                let prev = &points[index - 1];
                if p.threshold <= prev.threshold {
                    return bad(index, "thresholds must be strictly increasing");
                }
                if p.pfa > prev.pfa + CURVE_SLACK || p.pd > prev.pd + CURVE_SLACK {
                    return bad(index, "pfa and pd must be non-increasing in the threshold");
                }
            }
        }
        Ok(RocCurve { points, provenance, config })
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn config(&self) -> &SensingConfig {
        &self.config
    }

    /// Detection probability at a given false-alarm probability, by linear
    /// interpolation between neighbouring operating points. `None` outside the
    /// curve's false-alarm range.
    pub fn pd_at_pfa(&self, pfa: f64) -> Option<f64> {
        let pts = &self.points;
        // pfa is non-increasing along the curve.
        let first = pts.first()?;
        let last = pts.last()?;
        if pfa > first.pfa + CURVE_SLACK || pfa < last.pfa - CURVE_SLACK {
            return None;
        }
        // Index of the first point whose pfa is <= the target.
        let hi = pts.partition_point(|p| p.pfa > pfa);
        if hi == 0 {
            return Some(first.pd);
        }
        if hi == pts.len() {
            return Some(last.pd);
        }
        let (a, b) = (&pts[hi - 1], &pts[hi]);
        let span = a.pfa - b.pfa;
        if span <= 0.0 {
            return Some(b.pd);
        }
        let t = (a.pfa - pfa) / span;
        Some(a.pd + t * (b.pd - a.pd))
    }
}
