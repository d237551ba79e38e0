use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::PartyLabel;

/// Confusion counts with GOP as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Set when the statistic had a zero denominator and was reported as 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

impl ClassMetrics {
    fn from_counts(correct: usize, predicted: usize, actual: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                (0.0, true)
            } else {
                (num as f64 / den as f64, false)
            }
        };
        let (precision, precision_undefined) = ratio(correct, predicted);
        let (recall, recall_undefined) = ratio(correct, actual);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: actual,
            precision_undefined,
            recall_undefined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub dnc: ClassMetrics,
    pub gop: ClassMetrics,
    pub confusion: Confusion,
}

impl MetricsReport {
    pub fn class(&self, label: PartyLabel) -> &ClassMetrics {
        match label {
            PartyLabel::Dnc => &self.dnc,
            PartyLabel::Gop => &self.gop,
        }
    }
}

pub fn metrics(y_true: &[PartyLabel], y_pred: &[PartyLabel]) -> Result<MetricsReport, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Confusion::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (PartyLabel::Gop, PartyLabel::Gop) => c.tp += 1,
            (PartyLabel::Dnc, PartyLabel::Gop) => c.fp += 1,
            (PartyLabel::Dnc, PartyLabel::Dnc) => c.tn += 1,
            (PartyLabel::Gop, PartyLabel::Dnc) => c.fn_ += 1,
        }
    }
    Ok(MetricsReport {
        accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
        gop: ClassMetrics::from_counts(c.tp, c.tp + c.fp, c.tp + c.fn_),
        dnc: ClassMetrics::from_counts(c.tn, c.tn + c.fn_, c.tn + c.fp),
        confusion: c,
    })
}
