//! Real-frame wrappers around `rustfft` plans for the STFT.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub(crate) struct Fft {
    len: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl fmt::Debug for Fft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft").field("len", &self.len).finish()
    }
}

impl Fft {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut planner = FftPlanner::new();
        Self { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    /// Forward transform of a real frame, returning bins `0..=len/2`.
    pub(crate) fn forward_real(&self, frame: &[f64]) -> Vec<Complex64> {
        assert_eq!(frame.len(), self.len);
        let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf.truncate(self.len / 2 + 1);
        buf
    }

    /// Inverse of [`Fft::forward_real`]: rebuilds the Hermitian spectrum and
    /// returns the real part scaled by `1/len`.
    pub(crate) fn inverse_real(&self, half: &[Complex64]) -> Vec<f64> {
        let n = self.len;
        assert_eq!(half.len(), n / 2 + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..half.len()].copy_from_slice(half);
        for k in 1..n.div_ceil(2) {
            buf[n - k] = half[k].conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_real_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64).collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1, 2, 4, 8, 64, 3, 12, 45] {
            let x = sample(n);
            for (a, b) in Fft::new(n).forward_real(&x).iter().zip(naive_real_dft(&x)) {
                assert!((a - b).norm() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn real_round_trip_odd_and_even() {
        for n in [7, 16, 64, 30] {
            let plan = Fft::new(n);
            let frame: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).sin() - 0.2).collect();
            let back = plan.inverse_real(&plan.forward_real(&frame));
            for (a, b) in frame.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
