//! Labelled multichannel trials and the operations applied to whole datasets.

mod io;
mod split;
mod standardize;
mod synthetic;

pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, ETD1_MAGIC, ETD1_VERSION};
pub use split::{split, split_stratified};
pub use standardize::{standardize, StandardizationStats, STD_FLOOR};
pub use synthetic::{bandpass_oracle_predict, class_frequencies, generate_synthetic, SyntheticSpec};

use crate::{Error, Result};
use ndarray::Array2;

/// One labelled trial: `channels × samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTrial {
    pub data: Array2<f64>,
    pub label: usize,
}

impl TimeSeriesTrial {
    pub fn new(data: Array2<f64>, label: usize) -> Self {
        Self { data, label }
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trials: Vec<TimeSeriesTrial>,
    pub num_classes: usize,
    pub sample_rate: f64,
    pub channel_count: usize,
    pub samples_per_trial: usize,
}

impl Dataset {
    /// Builds and validates a dataset.
    pub fn new(
        trials: Vec<TimeSeriesTrial>,
        num_classes: usize,
        sample_rate: f64,
        channel_count: usize,
        samples_per_trial: usize,
    ) -> Result<Self> {
        let data = Self { trials, num_classes, sample_rate, channel_count, samples_per_trial };
        data.validate()?;
        Ok(data)
    }

    /// A dataset with the same metadata and different trials.
    pub fn with_trials(&self, trials: Vec<TimeSeriesTrial>) -> Self {
        Self { trials, ..self.clone_meta() }
    }

    fn clone_meta(&self) -> Self {
        Self {
            trials: Vec::new(),
            num_classes: self.num_classes,
            sample_rate: self.sample_rate,
            channel_count: self.channel_count,
            samples_per_trial: self.samples_per_trial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 {
            return Err(Error::Input("dataset needs at least one class".into()));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::Input(format!("sample rate {} must be positive", self.sample_rate)));
        }
        for (i, trial) in self.trials.iter().enumerate() {
            if trial.data.dim() != (self.channel_count, self.samples_per_trial) {
                return Err(Error::Input(format!(
                    "trial {i} has shape {:?}, dataset expects {:?}",
                    trial.data.dim(),
                    (self.channel_count, self.samples_per_trial)
                )));
            }
            if trial.label >= self.num_classes {
                return Err(Error::Input(format!(
                    "trial {i} label {} is not below class count {}",
                    trial.label, self.num_classes
                )));
            }
            if trial.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("trial {i} contains non-finite samples")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for t in &self.trials {
            counts[t.label] += 1;
        }
        counts
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_bad_trials() {
        let mut d = testutil::toy(4, 2, 2, 8);
        d.trials[1].label = 2;
        assert!(d.validate().is_err());
        let mut d = testutil::toy(4, 2, 2, 8);
        d.trials[0].data[[0, 0]] = f64::NAN;
        assert!(d.validate().is_err());
        let mut d = testutil::toy(4, 2, 2, 8);
        d.trials[2].data = Array2::zeros((2, 7));
        assert!(d.validate().is_err());
    }

    #[test]
    fn class_counts_are_balanced_for_toy() {
        assert_eq!(testutil::toy(9, 3, 1, 4).class_counts(), vec![3, 3, 3]);
    }
}
