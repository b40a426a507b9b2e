use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{phase, time_of};

/// Reusable FFT plan and buffers for repeated dechirp scans of one series.
pub struct DechirpScanner {
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
    n_freq: usize,
}

impl DechirpScanner {
    /// Plans an FFT of size `n_freq` for series of length at most `n_freq`.
    pub fn new(n_freq: usize) -> Result<Self> {
        if n_freq == 0 || !n_freq.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_freq must be a power of two, got {n_freq}"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(n_freq);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            fft,
            buffer: vec![Complex64::default(); n_freq],
            scratch,
            n_freq,
        })
    }

    pub fn n_freq(&self) -> usize {
        self.n_freq
    }

    /// Periodogram values `I(2πj/n_freq, theta2)` for `j = 0..n_freq`,
    /// written into `out`.
    pub fn scan_into(&mut self, y: &[f64], theta2: f64, out: &mut Vec<f64>) -> Result<()> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Empty("dechirp scan needs a nonempty series"));
        }
        if self.n_freq < n {
            return Err(Error::InvalidParameter(format!(
                "n_freq {} is smaller than the series length {n}",
                self.n_freq
            )));
        }
        // Slot t - 1 holds time t; the resulting unit-modulus factor
        // e^{-iθ1} does not change |X_j|.
        for (i, (slot, &v)) in self.buffer.iter_mut().zip(y).enumerate() {
            let (s, c) = phase(0.0, theta2, time_of(i)).sin_cos();
            *slot = Complex64::new(v * c, -v * s);
        }
        for slot in &mut self.buffer[n..] {
            *slot = Complex64::default();
        }
        self.fft
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 2.0 / n as f64;
        out.clear();
        out.extend(self.buffer.iter().map(|z| scale * z.norm_sqr()));
        Ok(())
    }
}

/// Chirp periodogram of `y` along the Fourier grid `θ1_j = 2πj/n_freq` at a
/// fixed frequency rate.
pub fn dechirp_scan(y: &[f64], theta2: f64, n_freq: usize) -> Result<Vec<f64>> {
    let mut scanner = DechirpScanner::new(n_freq)?;
    let mut out = Vec::with_capacity(n_freq);
    scanner.scan_into(y, theta2, &mut out)?;
    Ok(out)
}
