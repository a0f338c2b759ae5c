//! The training protocol shared by `train` and `sweep`.
//!
//! For one seed: split the training file 80/20 (stratified), fit
//! standardization on the training portion only, apply it to every set,
//! augment the training portion if a noise level is given, train with
//! best-on-validation snapshotting, then score the snapshot on the test set.

use crate::config::Settings;
use ampaug::augment::{augment_dataset, PerturbationConfig};
use ampaug::convnet::{evaluate, predict, train, Checkpoint, ModelConfig, TrainConfig, TrainOutcome};
use ampaug::dataset::{generate_synthetic, load_dataset, split_stratified, Dataset, StandardizationStats, SyntheticSpec};
use ampaug::metrics::MetricsReport;
use ampaug::rng::derive_seed;
use ampaug::signal::WindowSpec;
use ampaug::{Error, Result};

/// Training-set size and step count of the full protocol.
pub const REFERENCE_TRAIN_TRIALS: usize = 288;
pub const REFERENCE_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationPlan {
    pub iterations: usize,
    pub note: String,
}

/// Step count for a training file of `train_trials` trials. Unless set
/// explicitly, smaller files get proportionally fewer steps so each run
/// sees about as many epochs as the full protocol.
pub fn plan_iterations(explicit: Option<usize>, train_trials: usize) -> IterationPlan {
    match explicit {
        Some(n) => IterationPlan { iterations: n, note: "set explicitly".into() },
        None if train_trials >= REFERENCE_TRAIN_TRIALS => {
            IterationPlan { iterations: REFERENCE_ITERATIONS, note: "full protocol".into() }
        }
        None => {
            let n = (REFERENCE_ITERATIONS * train_trials).div_ceil(REFERENCE_TRAIN_TRIALS).max(1);
            IterationPlan {
                iterations: n,
                note: format!(
                    "reduced from {REFERENCE_ITERATIONS} in proportion to {train_trials}/{REFERENCE_TRAIN_TRIALS} training trials"
                ),
            }
        }
    }
}

/// Where the train and test sets came from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Files { train: String, test: String },
    Synthetic { train: SyntheticSpec, test: SyntheticSpec },
}

impl DataSource {
    pub fn describe(&self) -> String {
        match self {
            DataSource::Files { train, test } => format!("train={train} test={test}"),
            DataSource::Synthetic { train, test } => format!(
                "synthetic classes={} channels={} samples={} sample_rate={} snr={} train_seed={} test_seed={}",
                train.class_count, train.channels, train.samples, train.sample_rate, train.snr, train.seed, test.seed
            ),
        }
    }
}

/// The generated train and test specs for `settings`.
pub fn synthetic_specs(settings: &Settings) -> (SyntheticSpec, SyntheticSpec) {
    let s = &settings.synth;
    let train = SyntheticSpec {
        class_count: s.classes,
        trials_per_class: s.trials_per_class,
        channels: s.channels,
        samples: s.samples,
        sample_rate: s.sample_rate,
        snr: s.snr,
        seed: derive_seed(s.seed, &[0]),
    };
    let test = SyntheticSpec { trials_per_class: s.test_trials_per_class, seed: derive_seed(s.seed, &[1]), ..train.clone() };
    (train, test)
}

fn file_name(path: &std::path::Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Loads the configured train/test files, or generates both when neither is given.
pub fn load_data(settings: &Settings) -> Result<(Dataset, Dataset, DataSource)> {
    match (&settings.train, &settings.test) {
        (Some(train), Some(test)) => Ok((
            load_dataset(train)?,
            load_dataset(test)?,
            DataSource::Files { train: file_name(train), test: file_name(test) },
        )),
        (None, None) => {
            let (train, test) = synthetic_specs(settings);
            let data = (generate_synthetic(&train)?, generate_synthetic(&test)?);
            Ok((data.0, data.1, DataSource::Synthetic { train, test }))
        }
        _ => Err(Error::Config("give both train and test datasets, or neither for synthetic data".into())),
    }
}

/// Everything that varies between runs of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub seed: u64,
    /// `None` trains without augmentation.
    pub sigma: Option<f64>,
    pub mu: f64,
    pub copies: usize,
    pub window: WindowSpec,
    pub dropout: f64,
    pub train_fraction: f64,
    pub batch: usize,
    pub lr: f64,
    pub iterations: usize,
    pub eval_every: usize,
}

impl RunSpec {
    pub fn from_settings(settings: &Settings, seed: u64, sigma: Option<f64>, iterations: usize) -> Result<Self> {
        Ok(Self {
            seed,
            sigma,
            mu: settings.mu,
            copies: settings.copies,
            window: settings.window_spec()?,
            dropout: settings.dropout,
            train_fraction: settings.train_fraction,
            batch: settings.batch,
            lr: settings.lr,
            iterations,
            eval_every: settings.eval_every,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetSizes {
    pub train: usize,
    pub validation: usize,
    /// Training trials after augmentation.
    pub augmented_train: usize,
    pub test: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub checkpoint: Checkpoint,
    pub outcome: TrainOutcome,
    pub report: MetricsReport,
    /// Accuracy of the snapshot on the whole training file, standardized
    /// with the stored statistics.
    pub train_file_accuracy: f64,
    pub sizes: SetSizes,
}

fn check_shapes(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.channel_count != test.channel_count || train.samples_per_trial != test.samples_per_trial {
        return Err(Error::Input(format!(
            "train trials are {}×{} but test trials are {}×{}",
            train.channel_count, train.samples_per_trial, test.channel_count, test.samples_per_trial
        )));
    }
    Ok(())
}

/// Runs the protocol once.
pub fn run(train_file: &Dataset, test: &Dataset, spec: &RunSpec) -> Result<RunResult> {
    check_shapes(train_file, test)?;
    let (train_part, val_part) = split_stratified(train_file, spec.train_fraction, derive_seed(spec.seed, &[0]))?;
    let stats = StandardizationStats::fit(&train_part)?;
    let mut train_std = stats.apply(&train_part)?;
    let val_std = stats.apply(&val_part)?;
    let test_std = stats.apply(test)?;
    if let Some(sigma) = spec.sigma {
        let cfg = PerturbationConfig {
            mean: spec.mu,
            std_dev: sigma,
            copies_per_trial: spec.copies,
            seed: derive_seed(spec.seed, &[1]),
            window: spec.window,
        };
        train_std = augment_dataset(&train_std, &cfg)?;
    }

    let classes = train_file.num_classes.max(test.num_classes);
    let model_cfg = ModelConfig { dropout_p: spec.dropout, ..ModelConfig::new(train_file.channel_count, train_file.samples_per_trial, classes) };
    let train_cfg = TrainConfig {
        batch_size: spec.batch,
        iterations: spec.iterations,
        learning_rate: spec.lr,
        eval_every: spec.eval_every,
        seed: derive_seed(spec.seed, &[2]),
        ..TrainConfig::default()
    };
    let outcome = train(&train_std, &val_std, &model_cfg, &train_cfg)?;

    let (predicted, probs) = predict(&outcome.best, &model_cfg, &test_std)?;
    let report = MetricsReport::compute(&probs, &predicted, &test.labels(), classes)?;
    let (_, train_file_accuracy) = evaluate(&outcome.best, &model_cfg, &stats.apply(train_file)?)?;
    let sizes = SetSizes {
        train: train_part.len(),
        validation: val_part.len(),
        augmented_train: train_std.len(),
        test: test.len(),
    };
    let checkpoint = Checkpoint { config: model_cfg, params: outcome.best.clone(), standardization: Some(stats) };
    Ok(RunResult { checkpoint, outcome, report, train_file_accuracy, sizes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_plan_scales_small_training_sets() {
        assert_eq!(plan_iterations(None, 288).iterations, 2000);
        assert_eq!(plan_iterations(None, 1000).iterations, 2000);
        let p = plan_iterations(None, 80);
        assert_eq!(p.iterations, 556);
        assert!(p.note.contains("80/288"));
        assert_eq!(plan_iterations(Some(7), 80).iterations, 7);
        assert_eq!(plan_iterations(None, 1).iterations, 7);
    }

    #[test]
    fn synthetic_train_and_test_are_independent_draws() {
        let (train, test) = synthetic_specs(&Settings::default());
        assert_ne!(train.seed, test.seed);
        assert_eq!((train.trials_per_class, test.trials_per_class), (40, 100));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let s = Settings::default();
        let (a, _, _) = load_data(&s).unwrap();
        let mut other = s.clone();
        other.synth.samples = 100;
        let (b, _, _) = load_data(&other).unwrap();
        let spec = RunSpec::from_settings(&s, 1, None, 1).unwrap();
        assert!(matches!(run(&a, &b, &spec), Err(Error::Input(_))));
    }

    #[test]
    fn only_one_dataset_file_is_a_config_error() {
        let s = Settings { train: Some("x.etd1".into()), ..Settings::default() };
        assert!(matches!(load_data(&s), Err(Error::Config(_))));
    }
}
