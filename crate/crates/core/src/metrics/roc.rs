use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One-vs-rest ROC curve for a class. `auc` is `None` when the class has no
/// positives or no negatives, in which case `points` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub class: usize,
    /// `(false-positive rate, true-positive rate)`, from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub curves: Vec<RocCurve>,
    /// Mean AUC over classes with a defined curve.
    pub macro_auc: Option<f64>,
}

/// ROC of `scores` for a binary problem, sweeping a threshold down through
/// the distinct score values. Equal scores form a single step, so the
/// trapezoidal area equals the pairwise probability with ties counted ½.
///
/// The area is accumulated on integer counts and divided once, so it is
/// exactly `(2·wins + ties) / (2·P·N)` in floating point.
pub fn binary_roc(scores: &[f64], positive: &[bool]) -> Result<(Vec<(f64, f64)>, Option<f64>)> {
    if scores.len() != positive.len() {
        return Err(Error::Input("score and label counts differ".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("scores contain NaN".into()));
    }
    let pos_total = positive.iter().filter(|&&p| p).count() as u64;
    let neg_total = positive.len() as u64 - pos_total;
    if pos_total == 0 || neg_total == 0 {
        return Ok((Vec::new(), None));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (p, n) = (pos_total as f64, neg_total as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area, in units of one positive × one negative
    let mut area2: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp_before, fp_before) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += (fp - fp_before) * (tp + tp_before);
        points.push((fp as f64 / n, tp as f64 / p));
    }
    let auc = area2 as f64 / (2 * pos_total * neg_total) as f64;
    Ok((points, Some(auc)))
}

/// One-vs-rest ROC per class from a `[n, classes]` probability buffer.
pub fn roc_auc(scores: &[f64], true_labels: &[usize], classes: usize) -> Result<RocSummary> {
    if classes == 0 || scores.len() != true_labels.len() * classes {
        return Err(Error::Input(format!(
            "{} scores do not match {} labels × {classes} classes",
            scores.len(),
            true_labels.len()
        )));
    }
    if let Some(&bad) = true_labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Input(format!("label {bad} outside {classes} classes")));
    }
    let mut curves = Vec::with_capacity(classes);
    for k in 0..classes {
        let column: Vec<f64> = scores.chunks_exact(classes).map(|row| row[k]).collect();
        let positive: Vec<bool> = true_labels.iter().map(|&y| y == k).collect();
        let (points, auc) = binary_roc(&column, &positive)?;
        curves.push(RocCurve { class: k, points, auc });
    }
    let defined: Vec<f64> = curves.iter().filter_map(|c| c.auc).collect();
    let macro_auc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(RocSummary { curves, macro_auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let (pts, auc) = binary_roc(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(auc, Some(1.0));
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn all_ties_give_one_half() {
        let (pts, auc) = binary_roc(&[0.5; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(auc, Some(0.5));
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn four_point_example() {
        // won: (0.9,0.6) (0.9,0.1) (0.4,0.1); lost: (0.4,0.6); no ties
        let (_, auc) = binary_roc(&[0.9, 0.4, 0.6, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(auc, Some(3.0 / 4.0));
    }

    #[test]
    fn one_sided_class_is_undefined() {
        let s = roc_auc(&[0.2, 0.8, 0.3, 0.7], &[1, 1], 2).unwrap();
        assert!(s.curves.iter().all(|c| c.auc.is_none() && c.points.is_empty()));
        assert_eq!(s.macro_auc, None);
        let s = roc_auc(&[0.7, 0.2, 0.1, 0.6, 0.3, 0.1, 0.2, 0.2, 0.6], &[0, 1, 0], 3).unwrap();
        assert!(s.curves[2].auc.is_none());
        assert_eq!(s.macro_auc, Some((s.curves[0].auc.unwrap() + s.curves[1].auc.unwrap()) / 2.0));
    }
}
