//! Ricker source synthesis and the discrete Fourier transforms in time and x.
//!
//! Time transforms use the kernel `e^{-i omega t}` scaled by `dt`, so that the
//! discrete pair approximates the continuous one. An optional damping `eta`
//! evaluates the spectrum at the complex frequency `omega - i eta`; the
//! inverse transform undoes it with `e^{eta t}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

fn ricker_alpha(peak_frequency: f64) -> f64 {
    PI * peak_frequency
}

/// Delay of the Ricker pulse, `1 / peak_frequency`.
pub fn ricker_delay(peak_frequency: f64) -> f64 {
    1.0 / peak_frequency
}

/// Injection rate `q(t)`: first time derivative of `exp(-alpha^2 (t - t*)^2)`.
pub fn ricker_rate(t: f64, peak_frequency: f64) -> f64 {
    let a = ricker_alpha(peak_frequency);
    let s = t - ricker_delay(peak_frequency);
    -2.0 * a * a * s * (-a * a * s * s).exp()
}

/// Source term `S(t)`: second time derivative of the same Gaussian.
pub fn ricker_source(t: f64, peak_frequency: f64) -> f64 {
    let a2 = ricker_alpha(peak_frequency).powi(2);
    let s = t - ricker_delay(peak_frequency);
    (4.0 * a2 * a2 * s * s - 2.0 * a2) * (-a2 * s * s).exp()
}

/// Uniformly sampled real signal starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<f64>,
    pub dt: f64,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, dt: f64) -> Self {
        Self { samples, dt }
    }

    pub fn from_fn(nt: usize, dt: f64, f: impl Fn(f64) -> f64) -> Self {
        Self::new((0..nt).map(|n| f(n as f64 * dt)).collect(), dt)
    }

    pub fn ricker_rate(nt: usize, dt: f64, peak_frequency: f64) -> Self {
        Self::from_fn(nt, dt, |t| ricker_rate(t, peak_frequency))
    }

    pub fn ricker_source(nt: usize, dt: f64, peak_frequency: f64) -> Self {
        Self::from_fn(nt, dt, |t| ricker_source(t, peak_frequency))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Temporal bins `1..=last` with `0 < omega <= omega_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyWindow {
    pub first: usize,
    pub last: usize,
}

impl FrequencyWindow {
    /// The DC bin is never included; the window stops below Nyquist.
    pub fn new(nt: usize, dt: f64, omega_max: f64) -> Self {
        let d_omega = 2.0 * PI / (nt as f64 * dt);
        let last = ((omega_max / d_omega) * (1.0 + 1e-12)).floor() as usize;
        Self {
            first: 1,
            last: last.min(nt / 2 - 1),
        }
    }

    pub fn bins(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        (self.last + 1).saturating_sub(self.first)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Angular frequency of bin `k` for an `nt`-point record.
pub fn bin_frequency(k: usize, nt: usize, dt: f64) -> f64 {
    2.0 * PI * k as f64 / (nt as f64 * dt)
}

/// Forward and inverse time transforms of a fixed length.
#[derive(Clone)]
pub struct TimeTransform {
    nt: usize,
    dt: f64,
    damping: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TimeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeTransform")
            .field("nt", &self.nt)
            .field("dt", &self.dt)
            .field("damping", &self.damping)
            .finish()
    }
}

impl TimeTransform {
    pub fn new(nt: usize, dt: f64, damping: f64) -> Result<Self, SpectralError> {
        if nt < 2 || !nt.is_power_of_two() {
            return Err(SpectralError::NotPowerOfTwo(nt));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            nt,
            dt,
            damping,
            forward: planner.plan_fft_forward(nt),
            inverse: planner.plan_fft_inverse(nt),
        })
    }

    pub fn len(&self) -> usize {
        self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.nt == 0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Real angular frequency of bin `k`.
    pub fn omega(&self, k: usize) -> f64 {
        bin_frequency(k, self.nt, self.dt)
    }

    /// Complex frequency `omega_k - i eta` at which bin `k` is evaluated.
    pub fn complex_omega(&self, k: usize) -> Complex64 {
        Complex64::new(self.omega(k), -self.damping)
    }

    pub fn forward(&self, signal: &TimeSignal) -> Result<Vec<Complex64>, SpectralError> {
        if signal.len() != self.nt {
            return Err(SpectralError::LengthMismatch {
                expected: self.nt,
                got: signal.len(),
            });
        }
        let mut buf: Vec<Complex64> = signal
            .samples
            .iter()
            .enumerate()
            .map(|(n, &v)| {
                let t = n as f64 * self.dt;
                Complex64::new(v * (-self.damping * t).exp(), 0.0)
            })
            .collect();
        self.forward.process(&mut buf);
        for v in &mut buf {
            *v *= self.dt;
        }
        Ok(buf)
    }

    /// Inverse of [`forward`](Self::forward); keeps the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<TimeSignal, SpectralError> {
        if spectrum.len() != self.nt {
            return Err(SpectralError::LengthMismatch {
                expected: self.nt,
                got: spectrum.len(),
            });
        }
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.nt as f64 * self.dt);
        let samples = buf
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let t = n as f64 * self.dt;
                v.re * scale * (self.damping * t).exp()
            })
            .collect();
        Ok(TimeSignal::new(samples, self.dt))
    }

    /// Inverse transform of a real signal known only on the positive bins
    /// `1..nt/2`; DC and Nyquist are taken as zero.
    pub fn inverse_positive(&self, positive: &[Complex64]) -> Result<TimeSignal, SpectralError> {
        self.inverse(&hermitian_fill(positive, self.nt)?)
    }
}

/// Full spectrum from bins `1..=positive.len()`, mirrored by conjugation.
pub fn hermitian_fill(positive: &[Complex64], nt: usize) -> Result<Vec<Complex64>, SpectralError> {
    if positive.len() >= nt / 2 {
        return Err(SpectralError::LengthMismatch {
            expected: nt / 2 - 1,
            got: positive.len(),
        });
    }
    let mut full = vec![Complex64::new(0.0, 0.0); nt];
    for (i, v) in positive.iter().enumerate() {
        let k = i + 1;
        full[k] = *v;
        full[nt - k] = v.conj();
    }
    Ok(full)
}

/// Transforms along x with kernel `e^{-i kx x}`; forward is unscaled and
/// inverse divides by `nx`.
#[derive(Clone)]
pub struct SpatialTransform {
    nx: usize,
    dx: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpatialTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialTransform")
            .field("nx", &self.nx)
            .field("dx", &self.dx)
            .finish()
    }
}

impl SpatialTransform {
    pub fn new(nx: usize, dx: f64) -> Result<Self, SpectralError> {
        if nx < 2 || !nx.is_power_of_two() {
            return Err(SpectralError::NotPowerOfTwo(nx));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            nx,
            dx,
            forward: planner.plan_fft_forward(nx),
            inverse: planner.plan_fft_inverse(nx),
        })
    }

    pub fn len(&self) -> usize {
        self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.nx == 0
    }

    /// Wavenumber of bin `k` in FFT order.
    pub fn kx(&self, k: usize) -> f64 {
        let signed = if k < self.nx / 2 {
            k as f64
        } else {
            k as f64 - self.nx as f64
        };
        2.0 * PI * signed / (self.nx as f64 * self.dx)
    }

    /// All wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.nx).map(|k| self.kx(k)).collect()
    }

    /// Wavenumbers `2 pi {-nx/2 .. nx/2 - 1} / (nx dx)` in increasing order.
    pub fn centered_wavenumbers(&self) -> Vec<f64> {
        let n = self.nx as i64;
        (-n / 2..n / 2)
            .map(|k| 2.0 * PI * k as f64 / (self.nx as f64 * self.dx))
            .collect()
    }

    fn check(&self, len: usize) -> Result<(), SpectralError> {
        if len == self.nx {
            Ok(())
        } else {
            Err(SpectralError::LengthMismatch {
                expected: self.nx,
                got: len,
            })
        }
    }

    pub fn forward_in_place(&self, row: &mut [Complex64]) -> Result<(), SpectralError> {
        self.check(row.len())?;
        self.forward.process(row);
        Ok(())
    }

    pub fn inverse_in_place(&self, row: &mut [Complex64]) -> Result<(), SpectralError> {
        self.check(row.len())?;
        self.inverse.process(row);
        let scale = 1.0 / self.nx as f64;
        for v in row.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    pub fn forward(&self, row: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
        let mut out = row.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
        let mut out = spectrum.to_vec();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    /// Spectrum of a point source of unit strength at grid index `ix`,
    /// sampled as `1/dx` on that node.
    pub fn point_source(&self, ix: usize) -> Vec<Complex64> {
        let mut row = vec![Complex64::new(0.0, 0.0); self.nx];
        row[ix] = Complex64::new(1.0 / self.dx, 0.0);
        self.forward.process(&mut row);
        row
    }
}
