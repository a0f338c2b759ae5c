//! Amplitude perturbation in the STFT domain.
//!
//! Each channel is transformed with [`crate::signal::stft`], Gaussian noise
//! `N(mean, std_dev²)` is added independently to every (frequency, frame)
//! amplitude, the original phase is recombined with the perturbed amplitude,
//! and the channel is resynthesised with [`crate::signal::istft`].
//! Perturbed amplitudes are clamped at zero so the phase is never flipped.
//!
//! Noise for channel `ch` of copy `j` of trial `i` comes from
//! `rng::substream(seed, &[i, j, ch])`, so results do not depend on
//! processing order.

use crate::dataset::{Dataset, TimeSeriesTrial};
use crate::rng;
use crate::signal::{Spectrogram, StftPlan, WindowSpec};
use crate::{Error, Result};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    /// Noise mean, in amplitude units.
    pub mean: f64,
    /// Noise standard deviation, in amplitude units of standardized signals.
    pub std_dev: f64,
    pub copies_per_trial: usize,
    pub seed: u64,
    pub window: WindowSpec,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { mean: 0.0, std_dev: 0.001, copies_per_trial: 1, seed: 0, window: WindowSpec::default() }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.std_dev >= 0.0) || !self.std_dev.is_finite() {
            return Err(Error::Config(format!("noise std_dev {} must be finite and nonnegative", self.std_dev)));
        }
        if !self.mean.is_finite() {
            return Err(Error::Config(format!("noise mean {} must be finite", self.mean)));
        }
        self.window.validate()
    }

    fn normal(&self) -> Result<Normal<f64>> {
        Normal::new(self.mean, self.std_dev).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Adds i.i.d. `N(mean, std_dev²)` noise to every amplitude, clamped at 0.
/// The phase matrix is copied unchanged.
pub fn perturb_amplitudes<R: Rng + ?Sized>(
    spectrogram: &Spectrogram,
    cfg: &PerturbationConfig,
    rng: &mut R,
) -> Result<Spectrogram> {
    cfg.validate()?;
    spectrogram.validate()?;
    let normal = cfg.normal()?;
    // Fill in row-major (frequency-major) order so the draw sequence is fixed.
    let noise = Array2::from_shape_simple_fn(spectrogram.amplitude.dim(), || normal.sample(rng));
    let amplitude = ndarray::Zip::from(&spectrogram.amplitude)
        .and(&noise)
        .map_collect(|&a, &p| (a + p).max(0.0));
    Ok(Spectrogram { amplitude, ..spectrogram.clone() })
}

fn perturb_channel(plan: &StftPlan, signal: &[f64], cfg: &PerturbationConfig, rng: &mut rng::StreamRng) -> Result<Vec<f64>> {
    let spec = plan.forward(signal)?;
    let perturbed = perturb_amplitudes(&spec, cfg, rng)?;
    plan.inverse(&perturbed)
}

fn augment_with_plan(
    plan: &StftPlan,
    trial: &TimeSeriesTrial,
    cfg: &PerturbationConfig,
    trial_index: u64,
    copy_index: u64,
) -> Result<TimeSeriesTrial> {
    if trial.samples() < cfg.window.length {
        return Err(Error::Input(format!(
            "trial has {} samples per channel, window needs {}",
            trial.samples(),
            cfg.window.length
        )));
    }
    let mut data = Array2::zeros(trial.data.dim());
    for (ch, row) in trial.data.rows().into_iter().enumerate() {
        let mut r = rng::substream(cfg.seed, &[trial_index, copy_index, ch as u64]);
        let signal: Vec<f64> = row.to_vec();
        let out = perturb_channel(plan, &signal, cfg, &mut r)?;
        data.row_mut(ch).assign(&ndarray::ArrayView1::from(&out));
    }
    Ok(TimeSeriesTrial::new(data, trial.label))
}

/// Perturbs every channel of one trial independently; the label is kept.
///
/// `trial_index` and `copy_index` select the noise substream.
pub fn augment_trial(
    trial: &TimeSeriesTrial,
    cfg: &PerturbationConfig,
    trial_index: u64,
    copy_index: u64,
) -> Result<TimeSeriesTrial> {
    cfg.validate()?;
    let plan = StftPlan::new(cfg.window)?;
    augment_with_plan(&plan, trial, cfg, trial_index, copy_index)
}

/// Returns the original trials followed by `copies_per_trial` perturbed
/// rounds over the whole dataset (copy 1 of every trial, then copy 2, ...).
pub fn augment_dataset(data: &Dataset, cfg: &PerturbationConfig) -> Result<Dataset> {
    cfg.validate()?;
    if cfg.copies_per_trial == 0 {
        return Ok(data.clone());
    }
    let plan = StftPlan::new(cfg.window)?;
    let mut trials = Vec::with_capacity(data.len() * (1 + cfg.copies_per_trial));
    trials.extend(data.trials.iter().cloned());
    for copy in 0..cfg.copies_per_trial {
        for (i, trial) in data.trials.iter().enumerate() {
            trials.push(augment_with_plan(&plan, trial, cfg, i as u64, copy as u64)?);
        }
    }
    Ok(data.with_trials(trials))
}
