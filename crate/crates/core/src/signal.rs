//! Window generation and the receive pipeline.
//!
//! A window is generated in the frequency domain: every bin gets CSCG noise of
//! variance σ_W², occupied bins additionally get the primary signal, and the
//! unitary inverse transform yields N time samples per capture. The receiver
//! optionally keeps only the signs of the samples, transforms each capture
//! and rescales the spectrum with the RSSI power reading so that its total
//! power equals that reading.

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::config::{Quantizer, RssiMode, SensingConfig, SignalModel};
use crate::fft::UnitaryFft;
use crate::model::{ModelError, Occupancy, SpectrumWindow, WindowCapture};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("number of sub-bands N={0} must be a power of two")]
    NotPowerOfTwo(usize),
    #[error("capture has {got} samples, expected N={expected}")]
    CaptureLength { expected: usize, got: usize },
    #[error("power reading must be positive and finite, got {0}")]
    BadPowerReading(f64),
    #[error("window shape does not match the configuration: {0}")]
    WindowShape(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sign with the tie `sign(0) = +1`.
#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One-bit quantizer: keeps the signs of the in-phase and quadrature parts.
/// Output values are always in {±1 ± j}.
pub fn one_bit_quantize(samples: &[Complex64]) -> Vec<Complex64> {
    samples.iter().map(|s| Complex64::new(sign(s.re), sign(s.im))).collect()
}

/// Per-band decisions: `true` (occupied) iff Z_n > λ.
pub fn detect(statistics: &[f64], lambda: f64) -> Vec<bool> {
    statistics.iter().map(|&z| z > lambda).collect()
}

/// Draws a CSCG(0, var) sample.
#[inline]
fn cscg<R: Rng + ?Sized>(rng: &mut R, std_per_axis: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_axis, im * std_per_axis)
}

/// Window generator and receiver for one configuration.
#[derive(Debug, Clone)]
pub struct SignalEngine {
    config: SensingConfig,
    fft: UnitaryFft,
}

impl SignalEngine {
    pub fn new(config: SensingConfig) -> Result<Self, SignalError> {
        let n = config.n_subbands();
        let fft = UnitaryFft::new(n).ok_or(SignalError::NotPowerOfTwo(n))?;
        Ok(SignalEngine { config, fft })
    }

    pub fn config(&self) -> &SensingConfig {
        &self.config
    }

    /// Uniformly random set of M occupied bands.
    pub fn draw_occupancy<R: Rng + ?Sized>(&self, rng: &mut R) -> Occupancy {
        let n = self.config.n_subbands();
        let picked = index::sample(rng, n, self.config.m_occupied()).into_vec();
        Occupancy::new(picked, n).expect("index::sample yields distinct in-range indices")
    }

    /// Generates one window of L captures with a fixed occupancy.
    pub fn generate_window<R: Rng + ?Sized>(
        &self,
        occupancy: &Occupancy,
        window_index: u64,
        rng: &mut R,
    ) -> Result<WindowCapture, SignalError> {
        let cfg = &self.config;
        let n = cfg.n_subbands();
        let l = cfg.avg_captures();
        if occupancy.n_subbands() != n {
            return Err(SignalError::WindowShape("occupancy defined over a different N"));
        }
        let noise_std = (cfg.noise_var() / 2.0).sqrt();
        let signal_std = (cfg.signal_var() / 2.0).sqrt();

        // Block fading: one unit-power gain per occupied band, fixed for the window.
        let fading: Vec<Complex64> = match cfg.signal_model() {
            SignalModel::Cscg => Vec::new(),
            SignalModel::Qam4BlockFading => occupancy
                .indices()
                .iter()
                .map(|_| cscg(rng, std::f64::consts::FRAC_1_SQRT_2))
                .collect(),
        };
        let qam_amp = std::f64::consts::FRAC_1_SQRT_2 * cfg.signal_var().sqrt();

        let mut samples = Vec::with_capacity(l * n);
        for _ in 0..l {
            let start = samples.len();
            samples.extend((0..n).map(|_| cscg(rng, noise_std)));
            let bins = &mut samples[start..];
            match cfg.signal_model() {
                SignalModel::Cscg => {
                    for &band in occupancy.indices() {
                        bins[band] += cscg(rng, signal_std);
                    }
                }
                SignalModel::Qam4BlockFading => {
                    for (&band, gain) in occupancy.indices().iter().zip(&fading) {
                        let sym = Complex64::new(
                            if rng.random::<bool>() { 1.0 } else { -1.0 },
                            if rng.random::<bool>() { 1.0 } else { -1.0 },
                        );
                        bins[band] += gain * sym * qam_amp;
                    }
                }
            }
            self.fft.inverse(bins);
        }

        let power_reading = match cfg.rssi_mode() {
            RssiMode::Ideal => cfg.total_power(),
            RssiMode::Estimated => {
                let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
                energy / l as f64
            }
        };
        Ok(WindowCapture::new(samples, l, occupancy.clone(), power_reading, window_index)?)
    }

    /// Scaled spectrum of one capture of sign samples:
    /// Y = √(P/(2N)) · unitary DFT of the capture, so Σ|Y_n|² = P exactly.
    pub fn scaled_spectrum(&self, capture: &[Complex64], power_reading: f64) -> Result<Vec<Complex64>, SignalError> {
        self.check_capture(capture)?;
        if !(power_reading > 0.0 && power_reading.is_finite()) {
            return Err(SignalError::BadPowerReading(power_reading));
        }
        let mut out = capture.to_vec();
        let gain = (power_reading / (2.0 * self.fft.len() as f64)).sqrt();
        self.fft.forward_scaled(&mut out, gain);
        Ok(out)
    }

    /// Unitary spectrum of one raw (unquantized) capture.
    pub fn unquantized_spectrum(&self, capture: &[Complex64]) -> Result<Vec<Complex64>, SignalError> {
        self.check_capture(capture)?;
        let mut out = capture.to_vec();
        self.fft.forward(&mut out);
        Ok(out)
    }

    fn check_capture(&self, capture: &[Complex64]) -> Result<(), SignalError> {
        if capture.len() != self.fft.len() {
            return Err(SignalError::CaptureLength { expected: self.fft.len(), got: capture.len() });
        }
        Ok(())
    }

    /// Runs the configured receiver on a window: optional one-bit
    /// quantization, per-capture transform, energy statistics.
    pub fn process(&self, window: &WindowCapture) -> Result<SpectrumWindow, SignalError> {
        let n = self.config.n_subbands();
        if window.n_subbands() != n || window.capture_count() != self.config.avg_captures() {
            return Err(SignalError::WindowShape("window does not have L captures of N samples"));
        }
        let mut bins = match self.config.quantizer() {
            Quantizer::None => window.samples().to_vec(),
            Quantizer::OneBit => one_bit_quantize(window.samples()),
        };
        let gain = match self.config.quantizer() {
            Quantizer::None => 1.0,
            Quantizer::OneBit => (window.power_reading() / (2.0 * n as f64)).sqrt(),
        };
        for capture in bins.chunks_exact_mut(n) {
            self.fft.forward_scaled(capture, gain);
        }
        Ok(SpectrumWindow::from_bins(bins, window.capture_count())?)
    }
}
