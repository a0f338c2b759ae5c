use crate::config::Settings;
use ampaug::augment::{augment_dataset, PerturbationConfig};
use ampaug::dataset::{load_dataset, save_dataset};
use ampaug::{Error, Result};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentSummary {
    pub output: PathBuf,
    pub original: usize,
    pub augmented: usize,
    pub class_counts: Vec<usize>,
}

/// Augments `input` (or `train`) as stored, without standardizing, and
/// writes `output` (default `<out>/augmented.etd1`). Takes a single σ
/// (default 0.001) and the first seed (default 0).
pub fn cmd_augment(settings: &Settings) -> Result<AugmentSummary> {
    let std_dev = match settings.sigmas.as_deref() {
        None => PerturbationConfig::default().std_dev,
        Some([s]) => *s,
        Some(_) => return Err(Error::Config("augment takes a single sigma".into())),
    };
    let cfg = PerturbationConfig {
        mean: settings.mu,
        std_dev,
        copies_per_trial: settings.copies,
        seed: settings.seeds.as_ref().and_then(|s| s.first().copied()).unwrap_or(0),
        window: settings.window_spec()?,
    };
    cfg.validate()?;
    let input = settings
        .input
        .as_ref()
        .or(settings.train.as_ref())
        .ok_or_else(|| Error::Config("augment needs an input dataset".into()))?;
    let output = settings.output.clone().unwrap_or_else(|| settings.out.join("augmented.etd1"));

    let data = load_dataset(input)?;
    let augmented = augment_dataset(&data, &cfg)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    save_dataset(&augmented, &output)?;
    Ok(AugmentSummary { output, original: data.len(), augmented: augmented.len(), class_counts: augmented.class_counts() })
}

impl fmt::Display for AugmentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} original trials -> {} trials (per class {:?}) in {}",
            self.original,
            self.augmented,
            self.class_counts,
            self.output.display()
        )
    }
}
