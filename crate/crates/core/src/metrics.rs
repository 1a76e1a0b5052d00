//! Confusion-matrix metrics and threshold-sweep curves.
//!
//! The positive class is always "overlap". Metrics with a zero denominator
//! are reported as `None` rather than silently coerced to 0.

use crate::error::MetricError;

/// Frame-level class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Overlap,
    Single,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Overlap)
    }

    /// One-character file encoding: `O` or `S`.
    pub fn code(self) -> char {
        match self {
            Label::Overlap => 'O',
            Label::Single => 'S',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'O' => Some(Label::Overlap),
            'S' => Some(Label::Single),
            _ => None,
        }
    }
}

/// TP/FP/FN/TN counts at a fixed decision threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Merge counts from another shard.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

/// Exact confusion counts for equal-length prediction/truth sequences.
pub fn confusion(pred: &[Label], truth: &[Label]) -> Result<ConfusionMatrix, MetricError> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Option<f64> {
    let total = cm.total();
    (total > 0).then(|| (cm.tp + cm.tn) as f64 / total as f64)
}

pub fn precision(cm: &ConfusionMatrix) -> Option<f64> {
    let denom = cm.tp + cm.fp;
    (denom > 0).then(|| cm.tp as f64 / denom as f64)
}

pub fn recall(cm: &ConfusionMatrix) -> Option<f64> {
    let denom = cm.tp + cm.fn_;
    (denom > 0).then(|| cm.tp as f64 / denom as f64)
}

/// Harmonic mean of precision and recall; `None` when either is undefined
/// or both are zero.
pub fn fscore(cm: &ConfusionMatrix) -> Option<f64> {
    let p = precision(cm)?;
    let r = recall(cm)?;
    (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
}

/// One operating point of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    /// ROC: false-positive rate. PR: recall.
    pub x: f64,
    /// ROC: true-positive rate. PR: precision.
    pub y: f64,
}

/// ROC curve over all distinct score thresholds, anchored at (0,0) and (1,1).
///
/// A frame is predicted positive when its score is >= the threshold; tied
/// scores share one operating point.
pub fn roc_curve(scores: &[f64], truth: &[Label]) -> Result<Vec<CurvePoint>, MetricError> {
    let (order, n_pos, n_neg) = sweep_order(scores, truth)?;
    if n_neg == 0 || n_pos == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut points = vec![CurvePoint {
        threshold: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if truth[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(CurvePoint {
            threshold: t,
            x: fp as f64 / n_neg as f64,
            y: tp as f64 / n_pos as f64,
        });
    }
    let last = points.last().unwrap();
    if last.x != 1.0 || last.y != 1.0 {
        points.push(CurvePoint {
            threshold: f64::NEG_INFINITY,
            x: 1.0,
            y: 1.0,
        });
    }
    Ok(points)
}

/// Area under a curve by the trapezoid rule over its x axis.
pub fn auc(points: &[CurvePoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * (w[1].y + w[0].y) / 2.0)
        .sum()
}

/// Precision-recall curve over distinct thresholds, descending, truncated
/// once recall reaches 1 (lower thresholds only dilute precision).
pub fn pr_curve(scores: &[f64], truth: &[Label]) -> Result<Vec<CurvePoint>, MetricError> {
    let (order, n_pos, _) = sweep_order(scores, truth)?;
    if n_pos == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut points = Vec::new();
    let (mut tp, mut pred_pos) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if truth[order[i]].is_positive() {
                tp += 1;
            }
            pred_pos += 1;
            i += 1;
        }
        points.push(CurvePoint {
            threshold: t,
            x: tp as f64 / n_pos as f64,
            y: tp as f64 / pred_pos as f64,
        });
        if tp == n_pos {
            break;
        }
    }
    Ok(points)
}

/// Step-integrated average precision of a PR curve.
pub fn average_precision(points: &[CurvePoint]) -> f64 {
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for p in points {
        ap += (p.x - prev_recall) * p.y;
        prev_recall = p.x;
    }
    ap
}

/// Indices sorted by descending score, plus class counts.
fn sweep_order(scores: &[f64], truth: &[Label]) -> Result<(Vec<usize>, u64, u64), MetricError> {
    if scores.len() != truth.len() {
        return Err(MetricError::LengthMismatch {
            pred: scores.len(),
            truth: truth.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let n_pos = truth.iter().filter(|l| l.is_positive()).count() as u64;
    let n_neg = truth.len() as u64 - n_pos;
    Ok((order, n_pos, n_neg))
}
