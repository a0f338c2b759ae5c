use super::Dataset;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Lower bound applied to a channel's standard deviation.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-channel statistics fitted over every trial and time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardizationStats {
    /// Population mean and standard deviation per channel.
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Input("cannot standardize an empty dataset".into()));
        }
        let count = (data.len() * data.samples_per_trial) as f64;
        let mut mean = vec![0.0; data.channel_count];
        for trial in &data.trials {
            for (c, row) in trial.data.rows().into_iter().enumerate() {
                mean[c] += row.sum();
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);

        let mut var = vec![0.0; data.channel_count];
        for trial in &data.trials {
            for (c, row) in trial.data.rows().into_iter().enumerate() {
                var[c] += row.iter().map(|v| (v - mean[c]).powi(2)).sum::<f64>();
            }
        }
        let std = var
            .iter()
            .enumerate()
            .map(|(c, v)| {
                let s = (v / count).sqrt();
                if s < STD_FLOOR {
                    log::warn!("channel {c} is constant (std {s:e}); flooring std at {STD_FLOOR:e}");
                    STD_FLOOR
                } else {
                    s
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if self.mean.len() != data.channel_count || self.std.len() != data.channel_count {
            return Err(Error::Input(format!(
                "statistics cover {} channels, dataset has {}",
                self.mean.len(),
                data.channel_count
            )));
        }
        let trials = data
            .trials
            .iter()
            .map(|t| {
                let mut out = t.clone();
                for (c, mut row) in out.data.rows_mut().into_iter().enumerate() {
                    row.mapv_inplace(|v| (v - self.mean[c]) / self.std[c]);
                }
                out
            })
            .collect();
        Ok(data.with_trials(trials))
    }
}

/// Fits per-channel statistics on `data` and returns the transformed copy.
pub fn standardize(data: &Dataset) -> Result<(Dataset, StandardizationStats)> {
    let stats = StandardizationStats::fit(data)?;
    Ok((stats.apply(data)?, stats))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::toy;
    use super::super::TimeSeriesTrial;
    use super::*;
    use ndarray::array;

    #[test]
    fn closed_form_two_values() {
        let d = Dataset::new(
            vec![TimeSeriesTrial::new(array![[1.0, 3.0]], 0)],
            1,
            100.0,
            1,
            2,
        )
        .unwrap();
        let (out, stats) = standardize(&d).unwrap();
        assert_eq!(stats.mean, vec![2.0]);
        assert_eq!(stats.std, vec![1.0]);
        assert_eq!(out.trials[0].data, array![[-1.0, 1.0]]);
    }

    #[test]
    fn output_has_zero_mean_unit_std_and_is_a_fixed_point() {
        let (out, _) = standardize(&toy(12, 3, 4, 50)).unwrap();
        let again = StandardizationStats::fit(&out).unwrap();
        for c in 0..4 {
            assert!(again.mean[c].abs() < 1e-12);
            assert!((again.std[c] - 1.0).abs() < 1e-12);
        }
        let (twice, _) = standardize(&out).unwrap();
        for (a, b) in twice.trials.iter().zip(&out.trials) {
            for (x, y) in a.data.iter().zip(b.data.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_channel_is_floored_not_rejected() {
        let d = Dataset::new(vec![TimeSeriesTrial::new(array![[5.0, 5.0, 5.0]], 0)], 1, 1.0, 1, 3).unwrap();
        let (out, stats) = standardize(&d).unwrap();
        assert_eq!(stats.std, vec![STD_FLOOR]);
        assert!(out.trials[0].data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let d = toy(0, 2, 2, 4);
        assert!(standardize(&d).is_err());
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let stats = StandardizationStats::fit(&toy(4, 2, 2, 8)).unwrap();
        assert!(stats.apply(&toy(4, 2, 3, 8)).is_err());
    }
}
