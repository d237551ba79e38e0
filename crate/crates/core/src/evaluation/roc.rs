use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::PartyLabel;

/// One operating point: scores `>= threshold` are called GOP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Descending threshold; starts at (0, 0) and ends at (1, 1).
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Threshold above every score, so nothing is called GOP.
fn top_sentinel(max_score: f64) -> f64 {
    if max_score < 1.0 {
        1.0
    } else {
        max_score.next_up()
    }
}

pub fn roc(scores: &[f64], y_true: &[PartyLabel]) -> Result<RocCurve, EvalError> {
    if scores.len() != y_true.len() {
        return Err(EvalError::LengthMismatch(scores.len(), y_true.len()));
    }
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let pos = y_true.iter().filter(|l| **l == PartyLabel::Gop).count();
    let neg = y_true.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let max = scores[order[0]];
    let mut points = vec![RocPoint {
        threshold: top_sentinel(max),
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        // Tied scores move together as one step.
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            match y_true[order[k]] {
                PartyLabel::Gop => tp += 1,
                PartyLabel::Dnc => fp += 1,
            }
            k += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Largest threshold with FPR ≤ `max_fpr` among those reaching the best TPR
/// under that constraint. Falls back to the top sentinel when no point with
/// positive TPR qualifies.
pub fn select_threshold(curve: &RocCurve, max_fpr: f64) -> f64 {
    let best = curve
        .points
        .iter()
        .filter(|p| p.fpr <= max_fpr)
        .fold(None::<RocPoint>, |acc, p| match acc {
            Some(a) if a.tpr > p.tpr || (a.tpr == p.tpr && a.threshold >= p.threshold) => Some(a),
            _ => Some(*p),
        });
    match best {
        Some(p) if p.tpr > 0.0 => p.threshold,
        _ => curve.points.first().map_or(1.0, |p| p.threshold),
    }
}
