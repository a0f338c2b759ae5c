//! Classification metrics: confusion matrix, precision/recall/F1, ROC and AUC.
//!
//! Multiclass ROC curves are one-vs-rest per class; the macro AUC averages
//! the classes whose curve is defined (at least one positive and one
//! negative trial).

mod confusion;
mod report;
mod roc;

pub use confusion::{confusion, prf, ClassScores, ConfusionMatrix};
pub use report::{MetricsReport, CSV_HEADER};
pub use roc::{binary_roc, roc_auc, RocCurve, RocSummary};
