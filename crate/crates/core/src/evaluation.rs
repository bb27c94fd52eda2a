//! Metric-as-classifier statistics at trip granularity.
//!
//! A positive trip carries a deadline (its first CU moment, or the crash index
//! as a fallback) and counts as a true positive only if the metric alarmed at
//! least `lead_time` before that deadline. A negative trip is a false positive
//! if the metric alarms anywhere.

use alloc::vec::Vec;

use crate::math;
use crate::metrics::{MetricKind, MetricSpec, Polarity};

pub fn alarms(values: &[f64], polarity: Polarity, threshold: f64) -> Vec<bool> {
    values
        .iter()
        .map(|&v| polarity.alarms(v, threshold))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    TruePositive,
    FalseNegative,
    FalsePositive,
    TrueNegative,
}

/// Steps corresponding to a lead time, rounded to the nearest step.
pub fn lead_steps(lead_time: f64, dt: f64) -> usize {
    math::round(lead_time / dt) as usize
}

pub fn classify_trip(alarms: &[bool], deadline_index: Option<usize>, lead_steps: usize) -> Outcome {
    match deadline_index {
        Some(d) => {
            let hit = d
                .checked_sub(lead_steps)
                .is_some_and(|last| alarms.iter().take(last + 1).any(|&a| a));
            if hit {
                Outcome::TruePositive
            } else {
                Outcome::FalseNegative
            }
        }
        None => {
            if alarms.iter().any(|&a| a) {
                Outcome::FalsePositive
            } else {
                Outcome::TrueNegative
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, o: Outcome) {
        match o {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositive => self.fp += 1,
            Outcome::TrueNegative => self.tn += 1,
            Outcome::FalseNegative => self.fn_ += 1,
        }
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// 0 when there are no positive trips.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// 0 when there are no negative trips.
    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    /// 1 when nothing was flagged; see [`ConfusionMatrix::precision_defined`].
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            ratio(self.tp, self.tp + self.fp)
        }
    }

    pub fn precision_defined(&self) -> bool {
        self.tp + self.fp > 0
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub fpr: f64,
    pub recall: f64,
    pub precision: f64,
    pub precision_defined: bool,
    pub counts: ConfusionMatrix,
}

impl CurvePoint {
    fn from_counts(threshold: f64, counts: ConfusionMatrix) -> Self {
        Self {
            threshold,
            fpr: counts.fpr(),
            recall: counts.recall(),
            precision: counts.precision(),
            precision_defined: counts.precision_defined(),
            counts,
        }
    }
}

/// What evaluation needs from one trip: its deadline and one metric series.
#[derive(Debug, Clone, Copy)]
pub struct TripEval<'a> {
    pub deadline_index: Option<usize>,
    pub values: &'a [f64],
}

pub fn confusion_at(
    trips: &[TripEval<'_>],
    polarity: Polarity,
    threshold: f64,
    lead_steps: usize,
) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for trip in trips {
        let al = alarms(trip.values, polarity, threshold);
        cm.record(classify_trip(&al, trip.deadline_index, lead_steps));
    }
    cm
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub metric: MetricKind,
    pub lead_time: f64,
    /// One point per sweep threshold, in sweep order.
    pub points: Vec<CurvePoint>,
    pub auc: f64,
}

impl MetricCurve {
    /// ROC vertices `(fpr, recall)` with the (0,0) and (1,1) anchors, sorted.
    pub fn roc_points(&self) -> Vec<(f64, f64)> {
        roc_with_anchors(&self.points)
    }

    pub fn at_threshold(&self, threshold: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.threshold == threshold)
    }
}

pub fn roc_with_anchors(points: &[CurvePoint]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 2);
    v.push((0.0, 0.0));
    v.extend(points.iter().map(|p| (p.fpr, p.recall)));
    v.push((1.0, 1.0));
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

/// Trapezoidal area under a sorted ROC polyline.
pub fn auc(roc: &[(f64, f64)]) -> f64 {
    roc.windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}

pub fn sweep(
    trips: &[TripEval<'_>],
    spec: &MetricSpec,
    lead_times: &[f64],
    dt: f64,
) -> Vec<MetricCurve> {
    lead_times
        .iter()
        .map(|&lead| {
            let steps = lead_steps(lead, dt);
            let points: Vec<CurvePoint> = spec
                .sweep
                .iter()
                .map(|&thr| {
                    CurvePoint::from_counts(thr, confusion_at(trips, spec.polarity, thr, steps))
                })
                .collect();
            let auc = auc(&roc_with_anchors(&points));
            MetricCurve {
                metric: spec.kind,
                lead_time: lead,
                points,
                auc,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alarm_polarity() {
        let inf = f64::INFINITY;
        assert_eq!(
            alarms(&[inf, 2.0, 0.9], Polarity::AlarmWhenLeq, 1.0),
            [false, false, true]
        );
        assert_eq!(
            alarms(&[0.0, 8.0], Polarity::AlarmWhenGeq, 8.0),
            [false, true]
        );
        assert_eq!(
            alarms(&[5.0, 6.0], Polarity::AlarmWhenLeq, 1.0),
            [false, false]
        );
    }

    #[test]
    fn classification() {
        let mut a = alloc::vec![false; 40];
        a[24] = true;
        assert_eq!(
            classify_trip(&a, Some(30), lead_steps(0.5, 0.1)),
            Outcome::TruePositive
        );
        let mut b = alloc::vec![false; 40];
        b[27] = true;
        assert_eq!(classify_trip(&b, Some(30), 5), Outcome::FalseNegative);
        assert_eq!(classify_trip(&b, None, 5), Outcome::FalsePositive);
        assert_eq!(classify_trip(&[false; 3], None, 0), Outcome::TrueNegative);
        // deadline earlier than the lead time can never be met
        assert_eq!(
            classify_trip(&[true; 10], Some(3), 5),
            Outcome::FalseNegative
        );
    }

    #[test]
    fn rates() {
        let cm = ConfusionMatrix {
            tp: 2,
            fp: 1,
            tn: 7,
            fn_: 0,
        };
        assert_eq!(cm.recall(), 1.0);
        assert!((cm.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cm.fpr(), 0.125);
        assert_eq!(ConfusionMatrix::default().precision(), 1.0);
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&roc_with_anchors(&[])), 0.5);
        let perfect = CurvePoint::from_counts(
            1.0,
            ConfusionMatrix {
                tp: 5,
                fp: 0,
                tn: 5,
                fn_: 0,
            },
        );
        assert_eq!(auc(&roc_with_anchors(&[perfect])), 1.0);
    }
}
