use super::{history_csv, json_text, write_output};
use crate::config::Settings;
use crate::pipeline::{load_data, plan_iterations, run, RunSpec, SetSizes};
use ampaug::convnet::save_checkpoint;
use ampaug::metrics::CSV_HEADER;
use ampaug::{Error, Result};
use serde_json::json;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub out: PathBuf,
    pub test_accuracy: f64,
    pub train_file_accuracy: f64,
    pub best_iteration: usize,
    pub iterations: usize,
    pub sizes: SetSizes,
}

/// One protocol run. Writes `model.ecn1`, `report.json`, `report.csv`,
/// `history.csv` and `run.json` under the output directory.
pub fn cmd_train(settings: &Settings) -> Result<TrainSummary> {
    let seed = match settings.seeds_or(&[1]).as_slice() {
        [s] => *s,
        _ => return Err(Error::Config("train takes a single seed".into())),
    };
    let sigma = match settings.sigmas.as_deref() {
        None => None,
        Some([s]) => Some(*s),
        Some(_) => return Err(Error::Config("train takes at most one sigma; use sweep for a grid".into())),
    };
    let (train_file, test, source) = load_data(settings)?;
    let plan = plan_iterations(settings.iterations, train_file.len());
    let spec = RunSpec::from_settings(settings, seed, sigma, plan.iterations)?;
    let result = run(&train_file, &test, &spec)?;

    let out = &settings.out;
    std::fs::create_dir_all(out)?;
    save_checkpoint(&result.checkpoint, out.join("model.ecn1"))?;
    write_output(&out.join("report.json"), result.report.to_json_string())?;
    write_output(&out.join("report.csv"), format!("{CSV_HEADER}\n{}\n", result.report.csv_row("test")))?;
    write_output(&out.join("history.csv"), history_csv(&result.outcome.history))?;
    let run_info = json!({
        "data": source.describe(),
        "seed": seed,
        "sigma": sigma,
        "mu": spec.mu,
        "copies": if sigma.is_some() { spec.copies } else { 0 },
        "window": spec.window.length,
        "hop": spec.window.hop,
        "iterations": plan.iterations,
        "iterations_note": plan.note,
        "batch": spec.batch,
        "lr": spec.lr,
        "dropout": spec.dropout,
        "train_fraction": spec.train_fraction,
        "sizes": {
            "train": result.sizes.train,
            "validation": result.sizes.validation,
            "augmented_train": result.sizes.augmented_train,
            "test": result.sizes.test,
        },
        "best_iteration": result.outcome.best_iteration,
        "train_file_accuracy": result.train_file_accuracy,
        "test_accuracy": result.report.accuracy,
    });
    write_output(&out.join("run.json"), json_text(&run_info))?;

    Ok(TrainSummary {
        out: out.clone(),
        test_accuracy: result.report.accuracy,
        train_file_accuracy: result.train_file_accuracy,
        best_iteration: result.outcome.best_iteration,
        iterations: plan.iterations,
        sizes: result.sizes,
    })
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trained {} steps on {} trials ({} before augmentation, {} held out for validation); best at step {}",
            self.iterations, self.sizes.augmented_train, self.sizes.train, self.sizes.validation, self.best_iteration
        )?;
        writeln!(f, "training-file accuracy: {:.2}%", 100.0 * self.train_file_accuracy)?;
        write!(f, "test accuracy: {:.2}% on {} trials; outputs in {}", 100.0 * self.test_accuracy, self.sizes.test, self.out.display())
    }
}
