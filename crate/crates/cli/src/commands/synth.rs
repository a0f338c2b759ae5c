use super::{json_text, write_output};
use crate::config::Settings;
use crate::pipeline::synthetic_specs;
use ampaug::dataset::{bandpass_oracle_predict, generate_synthetic, save_dataset, Dataset};
use ampaug::Result;
use serde_json::json;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub train_path: PathBuf,
    pub test_path: PathBuf,
    pub train_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
    pub channels: usize,
    pub samples: usize,
    /// Accuracy of the spectral-energy reference detector on the test set.
    pub oracle_accuracy: f64,
}

fn oracle_accuracy(data: &Dataset) -> f64 {
    let predicted = bandpass_oracle_predict(data);
    let hits = predicted.iter().zip(data.labels()).filter(|(p, y)| **p == *y).count();
    hits as f64 / data.len() as f64
}

/// Generates `train.etd1` and `test.etd1`, plus `synth.json` describing them.
/// `seed` (if given) replaces `data_seed`.
pub fn cmd_synth(settings: &Settings) -> Result<SynthSummary> {
    let mut settings = settings.clone();
    if let Some(seed) = settings.seeds.as_ref().and_then(|s| s.first()) {
        settings.synth.seed = *seed;
    }
    let (train_spec, test_spec) = synthetic_specs(&settings);
    let train = generate_synthetic(&train_spec)?;
    let test = generate_synthetic(&test_spec)?;
    let train_path = settings.out.join("train.etd1");
    let test_path = settings.out.join("test.etd1");
    std::fs::create_dir_all(&settings.out)?;
    save_dataset(&train, &train_path)?;
    save_dataset(&test, &test_path)?;

    let summary = SynthSummary {
        train_path,
        test_path,
        train_counts: train.class_counts(),
        test_counts: test.class_counts(),
        channels: train.channel_count,
        samples: train.samples_per_trial,
        oracle_accuracy: oracle_accuracy(&test),
    };
    let s = &settings.synth;
    let meta = json!({
        "data_seed": s.seed,
        "classes": s.classes,
        "channels": s.channels,
        "samples": s.samples,
        "sample_rate": s.sample_rate,
        "snr": if s.snr.is_finite() { json!(s.snr) } else { json!("inf") },
        "train": { "file": "train.etd1", "trials": train.len(), "class_counts": summary.train_counts, "seed": train_spec.seed },
        "test": { "file": "test.etd1", "trials": test.len(), "class_counts": summary.test_counts, "seed": test_spec.seed },
        "oracle_test_accuracy": summary.oracle_accuracy,
    });
    write_output(&settings.out.join("synth.json"), json_text(&meta))?;
    Ok(summary)
}

impl fmt::Display for SynthSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wrote {} ({} trials, per class {:?})", self.train_path.display(), self.train_counts.iter().sum::<usize>(), self.train_counts)?;
        writeln!(f, "wrote {} ({} trials, per class {:?})", self.test_path.display(), self.test_counts.iter().sum::<usize>(), self.test_counts)?;
        writeln!(f, "trial shape: {} channels × {} samples", self.channels, self.samples)?;
        write!(f, "spectral oracle accuracy on test: {:.1}%", 100.0 * self.oracle_accuracy)
    }
}
