//! Short-time Fourier analysis with exact overlap-add resynthesis.
//!
//! Frames are centred: the signal is zero-padded by `length - hop` samples
//! on both sides before framing, so every retained sample is covered by at
//! least two frames with nonzero window weight. [`istft`] divides the
//! overlap-added frames by the accumulated squared-window envelope, which
//! makes `istft(stft(x)) == x` up to rounding.

mod fft;

use crate::{Error, Result};
use fft::Fft;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WindowKind {
    /// DFT-even Hann window, `w[k] = 0.5 (1 - cos(2πk/N))`.
    #[default]
    HannPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub hop: usize,
    pub kind: WindowKind,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { length: 64, hop: 32, kind: WindowKind::HannPeriodic }
    }
}

impl WindowSpec {
    pub fn new(length: usize, hop: usize) -> Result<Self> {
        let spec = Self { length, hop, kind: WindowKind::HannPeriodic };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks `hop | length` and `2·hop ≤ length`.
    ///
    /// With `hop == length` the periodic Hann window's zero at `k = 0` leaves
    /// samples with an empty synthesis envelope, so at least 50% overlap is
    /// required.
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.hop == 0 {
            return Err(Error::Config(format!(
                "window length ({}) and hop ({}) must be positive",
                self.length, self.hop
            )));
        }
        if !self.length.is_multiple_of(self.hop) {
            return Err(Error::Config(format!(
                "hop {} does not divide window length {}",
                self.hop, self.length
            )));
        }
        if 2 * self.hop > self.length {
            return Err(Error::Config(format!(
                "hop {} exceeds half the window length {}",
                self.hop, self.length
            )));
        }
        Ok(())
    }

    /// Zero padding applied to each end of the signal.
    pub fn padding(&self) -> usize {
        self.length - self.hop
    }

    pub fn bins(&self) -> usize {
        self.length / 2 + 1
    }

    pub fn frames_for(&self, signal_len: usize) -> usize {
        let padded = signal_len + 2 * self.padding();
        (padded - self.length) / self.hop + 1
    }
}

pub fn make_window(spec: &WindowSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.length as f64;
    Ok(match spec.kind {
        WindowKind::HannPeriodic => (0..spec.length)
            .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n).cos()))
            .collect(),
    })
}

/// Polar STFT of one real channel: `amplitude` and `phase` are
/// `bins × frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub amplitude: Array2<f64>,
    pub phase: Array2<f64>,
    pub window: WindowSpec,
    pub original_length: usize,
}

impl Spectrogram {
    /// Builds the polar form of a complex spectrogram. Zero-magnitude bins
    /// get phase 0 and phases are mapped into (−π, π].
    pub fn from_complex(values: &Array2<Complex64>, window: WindowSpec, original_length: usize) -> Self {
        let amplitude = values.mapv(|z| z.norm());
        let phase = values.mapv(|z| {
            if z.norm() == 0.0 {
                0.0
            } else {
                let p = z.im.atan2(z.re);
                if p <= -PI {
                    PI
                } else {
                    p
                }
            }
        });
        Self { amplitude, phase, window, original_length }
    }

    pub fn to_complex(&self) -> Array2<Complex64> {
        ndarray::Zip::from(&self.amplitude)
            .and(&self.phase)
            .map_collect(|&a, &p| Complex64::new(a * p.cos(), a * p.sin()))
    }

    pub fn bins(&self) -> usize {
        self.amplitude.nrows()
    }

    pub fn frames(&self) -> usize {
        self.amplitude.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.amplitude.dim() != self.phase.dim() {
            return Err(Error::Input(format!(
                "amplitude {:?} and phase {:?} shapes differ",
                self.amplitude.dim(),
                self.phase.dim()
            )));
        }
        let expected = (self.window.bins(), self.window.frames_for(self.original_length));
        if self.amplitude.dim() != expected {
            return Err(Error::Input(format!(
                "spectrogram shape {:?} does not match window/length (expected {:?})",
                self.amplitude.dim(),
                expected
            )));
        }
        if self.amplitude.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::Input("amplitudes must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Reusable analysis/synthesis state for one window configuration.
#[derive(Debug, Clone)]
pub struct StftPlan {
    spec: WindowSpec,
    window: Vec<f64>,
    fft: Fft,
}

impl StftPlan {
    pub fn new(spec: WindowSpec) -> Result<Self> {
        let window = make_window(&spec)?;
        Ok(Self { spec, window, fft: Fft::new(spec.length) })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    /// Complex STFT, `bins × frames`.
    pub fn forward_complex(&self, signal: &[f64]) -> Result<Array2<Complex64>> {
        let len = self.spec.length;
        if signal.len() < len {
            return Err(Error::Input(format!(
                "signal of {} samples is shorter than the window ({len})",
                signal.len()
            )));
        }
        let pad = self.spec.padding();
        let mut padded = vec![0.0; signal.len() + 2 * pad];
        padded[pad..pad + signal.len()].copy_from_slice(signal);

        let frames = self.spec.frames_for(signal.len());
        let mut out = Array2::zeros((self.spec.bins(), frames));
        let mut frame = vec![0.0; len];
        for t in 0..frames {
            let start = t * self.spec.hop;
            for (k, slot) in frame.iter_mut().enumerate() {
                *slot = padded[start + k] * self.window[k];
            }
            for (f, z) in self.fft.forward_real(&frame).into_iter().enumerate() {
                out[[f, t]] = z;
            }
        }
        Ok(out)
    }

    pub fn forward(&self, signal: &[f64]) -> Result<Spectrogram> {
        let z = self.forward_complex(signal)?;
        Ok(Spectrogram::from_complex(&z, self.spec, signal.len()))
    }

    /// Weighted overlap-add inverse of [`StftPlan::forward_complex`].
    pub fn inverse_complex(&self, values: &Array2<Complex64>, original_length: usize) -> Result<Vec<f64>> {
        let spec = &self.spec;
        let frames = spec.frames_for(original_length);
        if values.dim() != (spec.bins(), frames) {
            return Err(Error::Input(format!(
                "spectrogram shape {:?} does not match window/length (expected {:?})",
                values.dim(),
                (spec.bins(), frames)
            )));
        }
        let pad = spec.padding();
        let padded_len = original_length + 2 * pad;
        let mut acc = vec![0.0; padded_len];
        let mut envelope = vec![0.0; padded_len];
        let mut half = vec![Complex64::new(0.0, 0.0); spec.bins()];
        for t in 0..frames {
            for (f, slot) in half.iter_mut().enumerate() {
                *slot = values[[f, t]];
            }
            let frame = self.fft.inverse_real(&half);
            let start = t * spec.hop;
            for (k, &x) in frame.iter().enumerate() {
                let w = self.window[k];
                acc[start + k] += x * w;
                envelope[start + k] += w * w;
            }
        }
        (pad..pad + original_length)
            .map(|i| {
                if envelope[i] <= f64::EPSILON {
                    Err(Error::Internal(format!("zero synthesis envelope at padded sample {i}")))
                } else {
                    Ok(acc[i] / envelope[i])
                }
            })
            .collect()
    }

    pub fn inverse(&self, spectrogram: &Spectrogram) -> Result<Vec<f64>> {
        if spectrogram.window != self.spec {
            return Err(Error::Input("spectrogram was produced with a different window".into()));
        }
        spectrogram.validate()?;
        self.inverse_complex(&spectrogram.to_complex(), spectrogram.original_length)
    }
}

pub fn stft(signal: &[f64], spec: &WindowSpec) -> Result<Spectrogram> {
    StftPlan::new(*spec)?.forward(signal)
}

pub fn istft(spectrogram: &Spectrogram) -> Result<Vec<f64>> {
    StftPlan::new(spectrogram.window)?.inverse(spectrogram)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_windows_closed_form() {
        let w = make_window(&WindowSpec::new(4, 2).unwrap()).unwrap();
        let expect = [0.0, 0.5, 1.0, 0.5];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = make_window(&WindowSpec::new(2, 1).unwrap()).unwrap();
        assert!(w[0].abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_hann_sums_to_half_length() {
        let w = make_window(&WindowSpec::default()).unwrap();
        assert!((w.iter().sum::<f64>() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_hops() {
        assert!(matches!(WindowSpec::new(64, 24), Err(Error::Config(_))));
        assert!(matches!(WindowSpec::new(64, 64), Err(Error::Config(_))));
        assert!(matches!(WindowSpec::new(64, 0), Err(Error::Config(_))));
        assert!(WindowSpec::new(64, 16).is_ok());
    }

    #[test]
    fn frame_count_formula() {
        let spec = WindowSpec::default();
        let s = stft(&vec![0.0; 1000], &spec).unwrap();
        // padded = 1000 + 2*32 = 1064 → (1064 - 64)/32 + 1 = 32
        assert_eq!(s.frames(), 32);
        assert_eq!(s.bins(), 33);
    }

    #[test]
    fn zero_signal_has_zero_amplitude_and_phase() {
        let s = stft(&vec![0.0; 200], &WindowSpec::default()).unwrap();
        assert!(s.amplitude.iter().all(|&a| a == 0.0));
        assert!(s.phase.iter().all(|&p| p == 0.0));
        let back = istft(&s).unwrap();
        assert_eq!(back.len(), 200);
        assert!(back.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn short_signal_is_rejected() {
        assert!(matches!(stft(&[1.0; 63], &WindowSpec::default()), Err(Error::Input(_))));
    }

    #[test]
    fn phase_is_in_half_open_interval() {
        let z = Array2::from_shape_vec((1, 2), vec![Complex64::new(-1.0, -0.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let s = Spectrogram::from_complex(&z, WindowSpec::default(), 64);
        assert_eq!(s.phase[[0, 0]], PI);
        assert_eq!(s.phase[[0, 1]], PI);
    }

    #[test]
    fn works_with_non_power_of_two_window() {
        let spec = WindowSpec::new(30, 10).unwrap();
        let x: Vec<f64> = (0..97).map(|i| (i as f64 * 0.31).sin() + 0.01 * i as f64).collect();
        let back = istft(&stft(&x, &spec).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
