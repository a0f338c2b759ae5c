use super::{roc_csv_rows, write_output, ROC_CSV_HEADER};
use crate::config::Settings;
use crate::svg::{roc_chart, RocSeries};
use ampaug::convnet::{load_checkpoint, predict, Checkpoint};
use ampaug::dataset::{load_dataset, Dataset};
use ampaug::metrics::{MetricsReport, CSV_HEADER};
use ampaug::{Error, Result};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub labels: Vec<String>,
    pub reports: Vec<MetricsReport>,
    /// Written when the task has two classes.
    pub roc_svg: Option<PathBuf>,
    /// Written when two checkpoints are compared.
    pub table: Option<String>,
}

fn default_label(path: &Path, index: usize) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("model{}", index + 1))
}

/// Scores one checkpoint on `data`, standardizing with the stored statistics.
pub fn evaluate_checkpoint(ckpt: &Checkpoint, data: &Dataset) -> Result<MetricsReport> {
    let cfg = &ckpt.config;
    if data.channel_count != cfg.in_channels || data.samples_per_trial != cfg.in_samples {
        return Err(Error::Input(format!(
            "checkpoint expects {}×{} trials, dataset has {}×{}",
            cfg.in_channels, cfg.in_samples, data.channel_count, data.samples_per_trial
        )));
    }
    if data.num_classes > cfg.num_classes {
        return Err(Error::Input(format!("dataset has {} classes, checkpoint {}", data.num_classes, cfg.num_classes)));
    }
    let input = match &ckpt.standardization {
        Some(stats) => stats.apply(data)?,
        None => data.clone(),
    };
    let (predicted, probs) = predict(&ckpt.params, cfg, &input)?;
    MetricsReport::compute(&probs, &predicted, &data.labels(), cfg.num_classes)
}

/// Evaluates each checkpoint on `test`. Writes `eval_<n>.json`, `eval.csv`
/// and `roc_curves.csv`; `roc.svg` for two-class tasks; and `table.tsv`
/// when exactly two checkpoints are given.
pub fn cmd_eval(settings: &Settings) -> Result<EvalSummary> {
    if settings.checkpoints.is_empty() {
        return Err(Error::Config("eval needs at least one checkpoint".into()));
    }
    if !settings.labels.is_empty() && settings.labels.len() != settings.checkpoints.len() {
        return Err(Error::Config("give one label per checkpoint".into()));
    }
    let data_path = settings.test.as_ref().ok_or_else(|| Error::Config("eval needs a test dataset".into()))?;
    let data = load_dataset(data_path)?;

    let mut labels = Vec::new();
    let mut reports = Vec::new();
    for (i, path) in settings.checkpoints.iter().enumerate() {
        let ckpt = load_checkpoint(path)?;
        reports.push(evaluate_checkpoint(&ckpt, &data)?);
        labels.push(settings.labels.get(i).cloned().unwrap_or_else(|| default_label(path, i)));
    }

    let out = &settings.out;
    std::fs::create_dir_all(out)?;
    let mut csv = format!("{CSV_HEADER}\n");
    let mut roc = format!("{ROC_CSV_HEADER}\n");
    for (i, (label, report)) in labels.iter().zip(&reports).enumerate() {
        write_output(&out.join(format!("eval_{}.json", i + 1)), report.to_json_string())?;
        csv.push_str(&report.csv_row(label));
        csv.push('\n');
        roc_csv_rows(&mut roc, label, &report.roc.curves);
    }
    write_output(&out.join("eval.csv"), csv)?;
    write_output(&out.join("roc_curves.csv"), roc)?;

    let roc_svg = if reports.iter().all(|r| r.confusion.classes() == 2) {
        let series: Vec<RocSeries> = labels
            .iter()
            .zip(&reports)
            .map(|(label, r)| RocSeries { label: label.clone(), points: r.roc.curves[1].points.clone(), auc: r.roc.curves[1].auc })
            .collect();
        let path = out.join("roc.svg");
        write_output(&path, roc_chart("ROC, class 1 against class 0", &series))?;
        Some(path)
    } else {
        None
    };

    let table = (reports.len() == 2).then(|| {
        MetricsReport::comparison_table(&[(labels[0].as_str(), &reports[0]), (labels[1].as_str(), &reports[1])])
    });
    if let Some(t) = &table {
        write_output(&out.join("table.tsv"), t)?;
    }
    Ok(EvalSummary { labels, reports, roc_svg, table })
}

impl fmt::Display for EvalSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, r) in self.labels.iter().zip(&self.reports) {
            let auc = r.roc.macro_auc.map(|a| format!("{a:.3}")).unwrap_or_else(|| "undefined".into());
            writeln!(f, "{label}: accuracy {:.2}% on {} trials, macro F1 {:.3}, macro AUC {auc}", 100.0 * r.accuracy, r.confusion.total, r.scores.macro_f1)?;
        }
        if let Some(t) = &self.table {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
