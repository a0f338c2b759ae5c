//! One module per subcommand. Each writes its artifacts under the output
//! directory and returns a summary that `main` prints.

mod augment;
mod eval;
mod sweep;
mod synth;
mod train;

pub use augment::{cmd_augment, AugmentSummary};
pub use eval::{cmd_eval, EvalSummary};
pub use sweep::{baseline_sanity, cmd_sweep, SweepCell, SweepOutcome, SweepRow};
pub use synth::{cmd_synth, SynthSummary};
pub use train::{cmd_train, TrainSummary};

use ampaug::convnet::TrainHistory;
use ampaug::metrics::RocCurve;
use ampaug::Result;
use std::fmt::Write;
use std::path::Path;

/// Writes `contents` to `path`, creating parent directories.
pub(crate) fn write_output(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

pub(crate) fn json_text(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize") + "\n"
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub(crate) fn history_csv(history: &TrainHistory) -> String {
    let mut out = String::from("iteration,train_loss,train_accuracy,val_loss,val_accuracy\n");
    for e in &history.evaluations {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{}",
            e.iteration,
            e.train_loss,
            e.train_accuracy,
            opt(e.val_loss),
            opt(e.val_accuracy)
        )
        .unwrap();
    }
    out
}

pub(crate) const ROC_CSV_HEADER: &str = "model,class,fpr,tpr";

pub(crate) fn roc_csv_rows(out: &mut String, label: &str, curves: &[RocCurve]) {
    for c in curves {
        for (fpr, tpr) in &c.points {
            writeln!(out, "{label},{},{fpr:.6},{tpr:.6}", c.class).unwrap();
        }
    }
}
