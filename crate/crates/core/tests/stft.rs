use ampaug::signal::{istft, make_window, stft, StftPlan, WindowSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

/// O(n²) DFT of a real frame, bins 0..=n/2.
fn naive_dft(frame: &[f64]) -> Vec<Complex64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|k| {
            frame
                .iter()
                .enumerate()
                .map(|(t, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Windowed frame `t` of the centred, zero-padded signal.
fn oracle_frame(signal: &[f64], spec: &WindowSpec, t: usize) -> Vec<f64> {
    let w = make_window(spec).unwrap();
    let pad = spec.length - spec.hop;
    (0..spec.length)
        .map(|k| {
            let idx = (t * spec.hop + k) as isize - pad as isize;
            let x = if idx >= 0 && (idx as usize) < signal.len() { signal[idx as usize] } else { 0.0 };
            x * w[k]
        })
        .collect()
}

fn random_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut r = ampaug::rng::stream(seed);
    (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
}

#[test]
fn every_bin_matches_the_naive_dft() {
    let spec = WindowSpec::default();
    let x = random_signal(300, 1);
    let z = StftPlan::new(spec).unwrap().forward_complex(&x).unwrap();
    for t in 0..z.ncols() {
        let expect = naive_dft(&oracle_frame(&x, &spec, t));
        for (f, e) in expect.iter().enumerate() {
            assert!((z[[f, t]] - e).norm() < 1e-10);
        }
    }
}

#[test]
fn constant_signal_interior_frames() {
    let spec = WindowSpec::default();
    let x = vec![1.0; 256];
    let s = stft(&x, &spec).unwrap();
    // frames 2..=7 lie fully inside the signal
    for t in 2..s.frames() - 2 {
        let oracle = naive_dft(&oracle_frame(&x, &spec, t));
        assert!((oracle[0].norm() - 32.0).abs() < 1e-9);
        assert!((oracle[1].norm() - 16.0).abs() < 1e-9);
        assert!((s.amplitude[[0, t]] - 32.0).abs() < 1e-9);
        assert!((s.amplitude[[1, t]] - 16.0).abs() < 1e-9);
        assert!(s.amplitude.column(t).iter().skip(2).all(|&a| a < 1e-9));
    }
}

#[test]
fn cosine_energy_is_confined_to_three_bins() {
    let spec = WindowSpec::default();
    let x: Vec<f64> = (0..512).map(|n| (2.0 * PI * 8.0 * n as f64 / 64.0).cos()).collect();
    let s = stft(&x, &spec).unwrap();
    for t in 2..s.frames() - 2 {
        let oracle = naive_dft(&oracle_frame(&x, &spec, t));
        for f in 0..s.bins() {
            if (7..=9).contains(&f) {
                assert!(s.amplitude[[f, t]] > 1.0);
            } else {
                assert!(s.amplitude[[f, t]] < 1e-9, "bin {f} frame {t}");
                assert!(oracle[f].norm() < 1e-9);
            }
        }
    }
}

#[test]
fn parseval_per_frame() {
    let spec = WindowSpec::default();
    let x = random_signal(400, 2);
    let s = stft(&x, &spec).unwrap();
    let n = spec.length;
    for t in 0..s.frames() {
        let frame = oracle_frame(&x, &spec, t);
        let time_energy: f64 = frame.iter().map(|v| v * v).sum();
        // one-sided spectrum: interior bins count twice
        let freq_energy: f64 = (0..s.bins())
            .map(|f| {
                let w = if f == 0 || f == n / 2 { 1.0 } else { 2.0 };
                w * s.amplitude[[f, t]].powi(2)
            })
            .sum::<f64>()
            / n as f64;
        if time_energy > 0.0 {
            assert!((time_energy - freq_energy).abs() / time_energy < 1e-9);
        }
    }
}

#[test]
fn linearity() {
    let plan = StftPlan::new(WindowSpec::default()).unwrap();
    let x = random_signal(333, 3);
    let y = random_signal(333, 4);
    let (a, b) = (1.7, -0.4);
    let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let zx = plan.forward_complex(&x).unwrap();
    let zy = plan.forward_complex(&y).unwrap();
    let zm = plan.forward_complex(&mix).unwrap();
    for ((m, p), q) in zm.iter().zip(zx.iter()).zip(zy.iter()) {
        assert!((m - (p * a + q * b)).norm() < 1e-9);
    }
    // the polar form describes the same complex values
    let polar = stft(&mix, &WindowSpec::default()).unwrap().to_complex();
    for (p, q) in polar.iter().zip(zm.iter()) {
        assert!((p - q).norm() < 1e-12);
    }
}

#[test]
fn hundred_random_round_trips() {
    let spec = WindowSpec::default();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let x = random_signal(1000, 100 + seed);
        let back = istft(&stft(&x, &spec).unwrap()).unwrap();
        assert_eq!(back.len(), 1000);
        worst = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    assert!(worst < 1e-9, "max abs error {worst:e}");
}

#[test]
fn impulse_round_trip() {
    let mut x = vec![0.0; 1000];
    x[500] = 1.0;
    let back = istft(&stft(&x, &WindowSpec::default()).unwrap()).unwrap();
    assert!((back[500] - 1.0).abs() < 1e-9);
    for (i, v) in back.iter().enumerate() {
        if i != 500 {
            assert!(v.abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_any_signal(
        x in prop::collection::vec(-1e3f64..1e3, 64..600),
        shape in prop::sample::select(vec![(64usize, 32usize), (64, 16), (32, 8), (48, 24), (16, 8)]),
    ) {
        let spec = WindowSpec::new(shape.0, shape.1).unwrap();
        prop_assume!(x.len() >= spec.length);
        let s = stft(&x, &spec).unwrap();
        prop_assert!(s.amplitude.iter().all(|&a| a >= 0.0));
        let back = istft(&s).unwrap();
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9 * scale);
        }
    }
}
