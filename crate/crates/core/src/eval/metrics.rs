use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("prediction and truth lengths differ ({pred} vs {truth})")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("no labels to score")]
    Empty,
}

/// Binary confusion counts with "conflict" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, pred: Label, truth: Label) {
        match (pred, truth) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Positive, Label::Negative) => self.fp += 1,
            (Label::Negative, Label::Positive) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
        }
    }
}

pub fn confusion(pred: &[Label], truth: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        cm.record(p, t);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

fn ratio(num: u64, den: u64, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let mut degenerate = false;
    let accuracy = (cm.tp + cm.tn) as f64 / total as f64;
    let precision = ratio(cm.tp, cm.tp + cm.fp, &mut degenerate);
    let recall = ratio(cm.tp, cm.tp + cm.fn_, &mut degenerate);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        degenerate = true;
        0.0
    };
    Ok(Metrics { accuracy, precision, recall, f1, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn confusion_cases() {
        assert_eq!(confusion(&[P; 5], &[P; 5]).unwrap(), ConfusionMatrix::new(5, 0, 0, 0));
        assert_eq!(confusion(&[N; 3], &[P; 3]).unwrap(), ConfusionMatrix::new(0, 0, 3, 0));
        assert_eq!(confusion(&[P, N, P], &[P, P, N]).unwrap(), ConfusionMatrix::new(1, 1, 1, 0));
        assert!(matches!(confusion(&[P], &[P, N]), Err(MetricsError::LengthMismatch { .. })));
        assert_eq!(confusion(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn metric_cases() {
        let m = metrics(&ConfusionMatrix::new(5, 0, 0, 5)).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1, m.degenerate), (1.0, 1.0, 1.0, 1.0, false));

        let m = metrics(&ConfusionMatrix::new(0, 0, 3, 3)).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(m.degenerate);
        assert_eq!(m.accuracy, 0.5);

        assert_eq!(metrics(&ConfusionMatrix::default()), Err(MetricsError::Empty));
    }

    #[test]
    fn mixed_vehicle_counts() {
        // hand arithmetic: 1669/2000, 820/971, 820/1000, 1640/1971
        let m = metrics(&ConfusionMatrix::new(820, 151, 180, 849)).unwrap();
        assert!((m.accuracy - 0.8345).abs() < 1e-12);
        assert!((m.precision - 820.0 / 971.0).abs() < 1e-12);
        assert!((m.recall - 0.82).abs() < 1e-12);
        assert!((m.f1 - 1640.0 / 1971.0).abs() < 1e-12);
    }
}
