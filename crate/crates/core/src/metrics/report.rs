//! Serialized evaluation reports.
//!
//! JSON keys: `accuracy`, `confusion_counts` (rows = actual class),
//! `per_class` (`precision`, `recall`, `f1` arrays), `macro` (`precision`,
//! `recall`, `f1`), `roc_points` (one array of `[fpr, tpr]` pairs per class,
//! empty when undefined), `auc` (`per_class` array with `null` for undefined
//! classes, `macro`, and `method: "one-vs-rest"`), `undefined` (class
//! indices whose ratio had a zero denominator).
//!
//! CSV: one header line ([`CSV_HEADER`]) and one row per report.

use super::{confusion, prf, roc_auc, ClassScores, ConfusionMatrix, RocSummary};
use crate::Result;
use serde_json::{json, Value};

pub const CSV_HEADER: &str = "label,trials,accuracy,macro_precision,macro_recall,macro_f1,macro_auc";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub scores: ClassScores,
    pub roc: RocSummary,
}

impl MetricsReport {
    /// Builds every metric from class-probability rows (`[n, classes]`),
    /// predicted labels and true labels.
    pub fn compute(probs: &[f64], predicted: &[usize], truth: &[usize], classes: usize) -> Result<Self> {
        let cm = confusion(predicted, truth, classes)?;
        let scores = prf(&cm);
        let roc = roc_auc(probs, truth, classes)?;
        Ok(Self { accuracy: cm.accuracy(), confusion: cm, scores, roc })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "accuracy": self.accuracy,
            "confusion_counts": self.confusion.counts,
            "per_class": {
                "precision": self.scores.precision,
                "recall": self.scores.recall,
                "f1": self.scores.f1,
            },
            "macro": {
                "precision": self.scores.macro_precision,
                "recall": self.scores.macro_recall,
                "f1": self.scores.macro_f1,
            },
            "roc_points": self.roc.curves.iter().map(|c| c.points.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "auc": {
                "per_class": self.roc.curves.iter().map(|c| c.auc).collect::<Vec<_>>(),
                "macro": self.roc.macro_auc,
                "method": "one-vs-rest",
            },
            "undefined": {
                "precision": self.scores.undefined_precision,
                "recall": self.scores.undefined_recall,
                "f1": self.scores.undefined_f1,
            },
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report values serialize") + "\n"
    }

    pub fn csv_row(&self, label: &str) -> String {
        let auc = self.roc.macro_auc.map(|a| format!("{a:.6}")).unwrap_or_default();
        format!(
            "{label},{},{:.6},{:.6},{:.6},{:.6},{auc}",
            self.confusion.total, self.accuracy, self.scores.macro_precision, self.scores.macro_recall, self.scores.macro_f1
        )
    }

    /// Precision/recall as percentages with one decimal, F1 with three:
    /// `method\tprecision\trecall\tF1` rows.
    pub fn comparison_table(rows: &[(&str, &MetricsReport)]) -> String {
        let mut out = String::from("method\tprecision\trecall\tF1\n");
        for (name, r) in rows {
            out.push_str(&format!(
                "{name}\t{:.1}%\t{:.1}%\t{:.3}\n",
                100.0 * r.scores.macro_precision,
                100.0 * r.scores.macro_recall,
                r.scores.macro_f1
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> MetricsReport {
        let probs = [0.8, 0.2, 0.4, 0.6, 0.3, 0.7, 0.9, 0.1];
        MetricsReport::compute(&probs, &[0, 1, 1, 0], &[0, 1, 0, 1], 2).unwrap()
    }

    #[test]
    fn json_has_fixed_keys() {
        let v = report().to_json();
        for key in ["accuracy", "confusion_counts", "per_class", "macro", "roc_points", "auc"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["accuracy"], 0.5);
        assert_eq!(v["confusion_counts"], json!([[1, 1], [1, 1]]));
        assert_eq!(v["roc_points"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn comparison_table_layout() {
        let mut r = report();
        r.scores.macro_precision = 0.89;
        r.scores.macro_recall = 0.888;
        r.scores.macro_f1 = 0.887;
        let t = MetricsReport::comparison_table(&[("with augmentation", &r)]);
        assert_eq!(t, "method\tprecision\trecall\tF1\nwith augmentation\t89.0%\t88.8%\t0.887\n");
    }

    #[test]
    fn csv_row_matches_header_width() {
        let row = report().csv_row("test");
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }
}
