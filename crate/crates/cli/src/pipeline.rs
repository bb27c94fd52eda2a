//! The stages behind each subcommand. Trips are processed in parallel, but
//! results are collected in trip order and written by one owner per file.

use std::path::Path;

use cueval_core::evaluation::{
    alarms, confusion_at, lead_steps, sweep, ConfusionMatrix, MetricCurve, TripEval,
};
use cueval_core::metrics::{MetricKind, MetricSeries, MetricSuite};
use cueval_core::oracle::{LabelSeries, Oracle};
use cueval_core::Trip;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{write_file, CliError, Result};
use crate::svg::{Series, Timeline, UnitPlot};
use crate::tables::{csv_writer, finish_csv, format_value, LabelRecord, MetricRecord};

fn check_dt(data: &Dataset, cfg: &RunConfig) -> Result<()> {
    if data.manifest.dt != cfg.oracle.dt {
        return Err(CliError::Config(format!(
            "dataset dt {} differs from oracle dt {}",
            data.manifest.dt, cfg.oracle.dt
        )));
    }
    Ok(())
}

pub fn label_all(data: &Dataset, cfg: &RunConfig) -> Result<Vec<LabelSeries>> {
    check_dt(data, cfg)?;
    let oracle = Oracle::new(cfg.oracle.clone())?;
    data.trips
        .par_iter()
        .map(|t| oracle.label_trip(t).map_err(CliError::from))
        .collect()
}

/// Series for every trip and each requested metric, trip-major.
pub fn metrics_all(
    data: &Dataset,
    cfg: &RunConfig,
    kinds: &[MetricKind],
) -> Result<Vec<MetricSeries>> {
    let suite = MetricSuite::new(&cfg.metric)?;
    let per_trip: Vec<Vec<MetricSeries>> = data
        .trips
        .par_iter()
        .map(|t| kinds.iter().map(|k| suite.evaluate(t, *k)).collect())
        .collect();
    Ok(per_trip.into_iter().flatten().collect())
}

/// Labels must cover exactly the dataset's trips with matching lengths.
pub fn check_labels(data: &Dataset, labels: &[LabelRecord]) -> Result<()> {
    if labels.len() != data.trips.len() {
        return Err(CliError::Config(format!(
            "labels cover {} trips, dataset has {}",
            labels.len(),
            data.trips.len()
        )));
    }
    for (trip, l) in data.trips.iter().zip(labels) {
        if trip.trip_id != l.trip_id || trip.len() != l.cu_flags.len() {
            return Err(CliError::Config(format!(
                "labels for {} do not match dataset trip {}",
                l.trip_id, trip.trip_id
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub trips: usize,
    pub positives: usize,
    pub negatives: usize,
    pub lead_times: Vec<f64>,
    pub metrics: Vec<MetricKind>,
    /// Crash trips whose deadline is the crash step because no CU moment was found.
    pub fallback_trips: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summary: ReportSummary,
    pub curves: Vec<MetricCurve>,
    /// Default-threshold confusion matrix per curve.
    pub operating: Vec<ConfusionMatrix>,
}

pub fn evaluate(
    data: &Dataset,
    labels: &[LabelRecord],
    metrics: &[MetricRecord],
    lead_times: &[f64],
) -> Result<Report> {
    check_labels(data, labels)?;
    let dt = data.manifest.dt;
    let mut kinds: Vec<MetricKind> = metrics.iter().map(|m| m.metric).collect();
    kinds.sort();
    kinds.dedup();
    let mut curves = Vec::new();
    let mut operating = Vec::new();
    for kind in &kinds {
        let mut evals = Vec::with_capacity(data.trips.len());
        for (trip, l) in data.trips.iter().zip(labels) {
            let m = metrics
                .iter()
                .find(|m| m.metric == *kind && m.trip_id == trip.trip_id)
                .ok_or_else(|| {
                    CliError::Config(format!("no {kind} values for trip {}", trip.trip_id))
                })?;
            if m.values.len() != trip.len() {
                return Err(CliError::Config(format!(
                    "{kind} series for {} has {} values, trip has {} steps",
                    trip.trip_id,
                    m.values.len(),
                    trip.len()
                )));
            }
            evals.push(TripEval {
                deadline_index: l.deadline_index,
                values: &m.values,
            });
        }
        let spec = kind.spec();
        for c in sweep(&evals, &spec, lead_times, dt) {
            operating.push(confusion_at(
                &evals,
                spec.polarity,
                spec.default_threshold,
                lead_steps(c.lead_time, dt),
            ));
            curves.push(c);
        }
    }
    let positives = labels.iter().filter(|l| l.deadline_index.is_some()).count();
    Ok(Report {
        summary: ReportSummary {
            trips: labels.len(),
            positives,
            negatives: labels.len() - positives,
            lead_times: lead_times.to_vec(),
            metrics: kinds,
            fallback_trips: labels
                .iter()
                .filter(|l| l.fallback_used)
                .map(|l| l.trip_id.clone())
                .collect(),
        },
        curves,
        operating,
    })
}

fn lead_dir(lead: f64) -> String {
    format!("lead_{lead}")
}

fn curve_csv(points: &[cueval_core::evaluation::CurvePoint]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["threshold", "fpr", "recall", "precision"])
        .expect("in-memory write");
    for p in points {
        w.write_record([
            format_value(p.threshold),
            format_value(p.fpr),
            format_value(p.recall),
            format_value(p.precision),
        ])
        .expect("in-memory write");
    }
    finish_csv(w)
}

/// Every `stride`-th threshold, ending on the last, so about eight labels show.
fn annotation_indices(n: usize) -> impl Iterator<Item = usize> {
    let stride = n.div_ceil(8).max(1);
    (0..n).filter(move |i| (i + 1) % stride == 0)
}

impl Report {
    /// `roc.csv` / `pr.csv` per (metric, lead time), `auc.csv`,
    /// `operating_points.csv`, `summary.json`, and ROC / PR plots per lead time.
    pub fn write(&self, out: &Path) -> Result<()> {
        for c in &self.curves {
            let dir = out.join(c.metric.name()).join(lead_dir(c.lead_time));
            let mut roc = c.points.clone();
            roc.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.recall.total_cmp(&b.recall)));
            write_file(&dir.join("roc.csv"), &curve_csv(&roc))?;
            let mut pr = c.points.clone();
            pr.sort_by(|a, b| {
                a.recall
                    .total_cmp(&b.recall)
                    .then(b.precision.total_cmp(&a.precision))
            });
            write_file(&dir.join("pr.csv"), &curve_csv(&pr))?;
        }

        let mut w = csv_writer();
        w.write_record(["metric", "lead_time", "auc"])
            .expect("in-memory write");
        for c in &self.curves {
            w.write_record([
                c.metric.name(),
                &format_value(c.lead_time),
                &format_value(c.auc),
            ])
            .expect("in-memory write");
        }
        write_file(&out.join("auc.csv"), &finish_csv(w))?;

        let mut w = csv_writer();
        w.write_record([
            "metric",
            "lead_time",
            "threshold",
            "tp",
            "fp",
            "tn",
            "fn",
            "fpr",
            "recall",
            "precision",
        ])
        .expect("in-memory write");
        for (c, cm) in self.curves.iter().zip(&self.operating) {
            w.write_record([
                c.metric.name().to_string(),
                format_value(c.lead_time),
                format_value(c.metric.spec().default_threshold),
                cm.tp.to_string(),
                cm.fp.to_string(),
                cm.tn.to_string(),
                cm.fn_.to_string(),
                format_value(cm.fpr()),
                format_value(cm.recall()),
                format_value(cm.precision()),
            ])
            .expect("in-memory write");
        }
        write_file(&out.join("operating_points.csv"), &finish_csv(w))?;

        let mut json = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        json.push('\n');
        write_file(&out.join("summary.json"), json.as_bytes())?;

        for lead in &self.summary.lead_times {
            let curves: Vec<&MetricCurve> = self
                .curves
                .iter()
                .filter(|c| c.lead_time == *lead)
                .collect();
            let roc = UnitPlot {
                title: format!("ROC, alarm {lead} s before the deadline"),
                x_label: "false positive rate".into(),
                y_label: "recall".into(),
                diagonal: true,
                series: curves
                    .iter()
                    .map(|c| Series {
                        label: format!("{} (AUC {:.3})", c.metric, c.auc),
                        points: c.roc_points(),
                        annotations: Vec::new(),
                    })
                    .collect(),
            };
            write_file(
                &out.join(format!("roc_{}.svg", lead_dir(*lead))),
                roc.render().as_bytes(),
            )?;

            let pr = UnitPlot {
                title: format!("Precision-recall, alarm {lead} s before the deadline"),
                x_label: "recall".into(),
                y_label: "precision".into(),
                diagonal: false,
                series: curves
                    .iter()
                    .map(|c| Series {
                        label: c.metric.to_string(),
                        points: c.points.iter().map(|p| (p.recall, p.precision)).collect(),
                        annotations: annotation_indices(c.points.len())
                            .map(|i| (i, format!("{}", c.points[i].threshold)))
                            .collect(),
                    })
                    .collect(),
            };
            write_file(
                &out.join(format!("pr_{}.svg", lead_dir(*lead))),
                pr.render().as_bytes(),
            )?;
        }
        Ok(())
    }
}

/// Strip chart of one trip: the CU row, then one alarm row per metric at its
/// default threshold.
pub fn timeline(trip: &Trip, cfg: &RunConfig) -> Result<Timeline> {
    let oracle = Oracle::new(cfg.oracle.clone())?;
    let suite = MetricSuite::new(&cfg.metric)?;
    let labels = oracle.label_trip(trip)?;
    let mut rows = vec![("CU".to_string(), labels.cu_flags)];
    for kind in MetricKind::ALL {
        let spec = kind.spec();
        let series = suite.evaluate(trip, kind);
        let label = match kind {
            MetricKind::Ttc => "TTC",
            MetricKind::Pcm => "PCM",
            MetricKind::Mprism => "MPrISM",
        };
        rows.push((
            label.to_string(),
            alarms(&series.values, spec.polarity, spec.default_threshold),
        ));
    }
    Ok(Timeline {
        title: format!("{} (red: CU / alarm)", trip.trip_id),
        dt: trip.dt,
        rows,
    })
}
