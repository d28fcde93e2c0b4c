//! Unitary discrete Fourier transform on power-of-two lengths.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse N-point DFT scaled by 1/√N, so that both directions
/// preserve total power.
#[derive(Clone)]
pub struct UnitaryFft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for UnitaryFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryFft").field("n", &self.n).finish()
    }
}

impl UnitaryFft {
    /// Plans a transform of length `n`; `None` unless `n` is a power of two.
    pub fn new(n: usize) -> Option<Self> {
        if !n.is_power_of_two() {
            return None;
        }
        let mut planner = FftPlanner::new();
        Some(UnitaryFft {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place: X_n = (1/√N)·Σ_k x_k e^{-j2πkn/N}, times `gain`.
    ///
    /// `buf.len()` must equal the planned length.
    pub fn forward_scaled(&self, buf: &mut [Complex64], gain: f64) {
        assert_eq!(buf.len(), self.n, "transform length mismatch");
        self.forward.process(buf);
        let s = self.scale * gain;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward_scaled(buf, 1.0)
    }

    /// In place inverse of [`UnitaryFft::forward`].
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "transform length mismatch");
        self.inverse.process(buf);
        let s = self.scale;
        buf.iter_mut().for_each(|v| *v *= s);
    }
}
