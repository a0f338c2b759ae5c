use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// `counts[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
}

pub fn confusion(pred_labels: &[usize], true_labels: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if pred_labels.len() != true_labels.len() {
        return Err(Error::Input(format!(
            "{} predictions for {} labels",
            pred_labels.len(),
            true_labels.len()
        )));
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&p, &a) in pred_labels.iter().zip(true_labels) {
        if p >= classes || a >= classes {
            return Err(Error::Input(format!("label pair ({a}, {p}) outside {classes} classes")));
        }
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix { counts, total: pred_labels.len() as u64 })
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|k| self.counts[k][k]).sum()
    }

    /// `trace / total`; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.trace() as f64 / self.total as f64
        }
    }

    pub fn row_sum(&self, actual: usize) -> u64 {
        self.counts[actual].iter().sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        self.counts.iter().map(|row| row[predicted]).sum()
    }

    /// Rows = predicted class, columns = actual class, each row divided by
    /// its sum (all-zero rows stay zero).
    pub fn predicted_major_normalized(&self) -> Vec<Vec<f64>> {
        let k = self.classes();
        (0..k)
            .map(|p| {
                let sum = self.col_sum(p);
                (0..k)
                    .map(|a| if sum == 0 { 0.0 } else { self.counts[a][p] as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }
}

/// Per-class and macro-averaged precision, recall and F1.
///
/// A ratio with a zero denominator is reported as 0 and its class index is
/// listed in the matching `undefined_*` vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub undefined_precision: Vec<usize>,
    pub undefined_recall: Vec<usize>,
    pub undefined_f1: Vec<usize>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn prf(cm: &ConfusionMatrix) -> ClassScores {
    let k = cm.classes();
    let mut s = ClassScores {
        precision: Vec::with_capacity(k),
        recall: Vec::with_capacity(k),
        f1: Vec::with_capacity(k),
        macro_precision: 0.0,
        macro_recall: 0.0,
        macro_f1: 0.0,
        undefined_precision: Vec::new(),
        undefined_recall: Vec::new(),
        undefined_f1: Vec::new(),
    };
    for c in 0..k {
        let tp = cm.counts[c][c];
        let p = ratio(tp, cm.col_sum(c)).unwrap_or_else(|| {
            s.undefined_precision.push(c);
            0.0
        });
        let r = ratio(tp, cm.row_sum(c)).unwrap_or_else(|| {
            s.undefined_recall.push(c);
            0.0
        });
        let f = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            s.undefined_f1.push(c);
            0.0
        };
        s.precision.push(p);
        s.recall.push(r);
        s.f1.push(f);
    }
    s.macro_precision = mean(&s.precision);
    s.macro_recall = mean(&s.recall);
    s.macro_f1 = mean(&s.f1);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_balanced() {
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let cm = confusion(&labels, &labels, 3).unwrap();
        assert_eq!(cm.counts, vec![vec![4, 0, 0], vec![0, 4, 0], vec![0, 0, 4]]);
        assert_eq!(cm.accuracy(), 1.0);
        let s = prf(&cm);
        assert!(s.precision.iter().chain(&s.recall).chain(&s.f1).all(|&v| v == 1.0));
        assert_eq!(s.macro_f1, 1.0);
    }

    #[test]
    fn all_predicted_class_zero() {
        let truth = [0, 0, 1, 2, 2];
        let cm = confusion(&[0; 5], &truth, 3).unwrap();
        assert_eq!(cm.col_sum(0), 5);
        assert_eq!(cm.accuracy(), 2.0 / 5.0);
        let s = prf(&cm);
        assert_eq!(s.undefined_precision, vec![1, 2]);
        assert_eq!(s.precision, vec![0.4, 0.0, 0.0]);
        assert_eq!(s.undefined_f1, vec![1, 2]);
    }

    #[test]
    fn small_binary_example() {
        let cm = confusion(&[0, 1, 0, 1, 1, 0], &[0, 0, 0, 1, 1, 1], 2).unwrap();
        assert_eq!(cm.counts, vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(cm.accuracy(), 4.0 / 6.0);
        let s = prf(&cm);
        for v in s.precision.iter().chain(&s.recall).chain(&s.f1) {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch_and_range() {
        assert!(confusion(&[0, 1], &[0], 2).is_err());
        assert!(confusion(&[2], &[0], 2).is_err());
    }

    #[test]
    fn predicted_major_view_is_row_normalized_transpose() {
        let cm = confusion(&[0, 1, 0, 1, 1, 0], &[0, 0, 0, 1, 1, 1], 2).unwrap();
        let v = cm.predicted_major_normalized();
        // predicted 0: actual (0,0,1) → 2/3, 1/3
        assert!((v[0][0] - 2.0 / 3.0).abs() < 1e-15 && (v[0][1] - 1.0 / 3.0).abs() < 1e-15);
        for row in v {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
