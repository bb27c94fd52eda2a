//! CSV plumbing and the label / metric tables exchanged between pipeline stages.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cueval_core::metrics::{MetricKind, MetricSeries};
use cueval_core::oracle::LabelSeries;

use crate::error::{read_to_string, CliError, Result};

pub const LABEL_HEADER: [&str; 3] = ["trip_id", "time_idx", "cu_flag"];
pub const SUMMARY_HEADER: [&str; 4] = [
    "trip_id",
    "first_cu_index",
    "deadline_index",
    "fallback_used",
];
pub const METRIC_HEADER: [&str; 4] = ["trip_id", "time_idx", "metric", "value"];

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory flush")
}

pub(crate) fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().from_reader(bytes)
}

pub(crate) fn check_header(
    r: &mut csv::Reader<&[u8]>,
    path: &Path,
    expected: &[&str],
) -> Result<()> {
    let h = r
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?;
    if !h.iter().eq(expected.iter().copied()) {
        return Err(CliError::format(
            path,
            format!(
                "header `{}`, expected `{}`",
                h.iter().collect::<Vec<_>>().join(","),
                expected.join(",")
            ),
        ));
    }
    Ok(())
}

pub(crate) fn parse_field<T: FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    path: &Path,
    line: usize,
) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse().map_err(|_| {
        CliError::format(
            path,
            format!("line {line}: cannot parse `{s}` in column {}", i + 1),
        )
    })
}

fn parse_opt_index(s: &str, path: &Path, line: usize) -> Result<Option<usize>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| CliError::format(path, format!("line {line}: bad index `{s}`")))
}

fn parse_flag(s: &str, path: &Path, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(CliError::format(
            path,
            format!("line {line}: flag `{s}` is not 0 or 1"),
        )),
    }
}

/// Metric values as text: `inf` for infinity, otherwise the shortest decimal
/// that parses back to the same `f64`.
pub fn format_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Inverse of [`format_value`]; only the exact `inf` / `-inf` tokens are
/// accepted for infinities.
pub fn parse_value(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ if s
            .bytes()
            .any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E') =>
        {
            None
        }
        _ => s.parse().ok().filter(|x: &f64| x.is_finite()),
    }
}

/// `labels.csv` -> `labels_summary.csv` next to it.
pub fn summary_path(labels: &Path) -> PathBuf {
    let stem = labels
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("labels");
    labels.with_file_name(format!("{stem}_summary.csv"))
}

fn opt(i: Option<usize>) -> String {
    i.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-moment flags and per-trip summary, as two CSV documents.
pub fn labels_to_csv(labels: &[LabelSeries]) -> (Vec<u8>, Vec<u8>) {
    let mut flags = csv_writer();
    flags.write_record(LABEL_HEADER).expect("in-memory write");
    let mut summary = csv_writer();
    summary
        .write_record(SUMMARY_HEADER)
        .expect("in-memory write");
    for l in labels {
        for (t, f) in l.cu_flags.iter().enumerate() {
            flags
                .write_record([
                    l.trip_id.as_str(),
                    &t.to_string(),
                    if *f { "1" } else { "0" },
                ])
                .expect("in-memory write");
        }
        summary
            .write_record([
                l.trip_id.clone(),
                opt(l.first_cu_index),
                opt(l.deadline_index),
                u8::from(l.fallback_used).to_string(),
            ])
            .expect("in-memory write");
    }
    (finish_csv(flags), finish_csv(summary))
}

/// Labels as read back from disk (witnesses are not stored).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub trip_id: String,
    pub cu_flags: Vec<bool>,
    pub first_cu_index: Option<usize>,
    pub deadline_index: Option<usize>,
    pub fallback_used: bool,
}

impl From<&LabelSeries> for LabelRecord {
    fn from(l: &LabelSeries) -> Self {
        Self {
            trip_id: l.trip_id.clone(),
            cu_flags: l.cu_flags.clone(),
            first_cu_index: l.first_cu_index,
            deadline_index: l.deadline_index,
            fallback_used: l.fallback_used,
        }
    }
}

pub fn write_labels(path: &Path, labels: &[LabelSeries]) -> Result<()> {
    let (flags, summary) = labels_to_csv(labels);
    crate::error::write_file(path, &flags)?;
    crate::error::write_file(&summary_path(path), &summary)
}

/// Read `labels.csv` and its summary; trips keep the summary's order.
pub fn read_labels(path: &Path) -> Result<Vec<LabelRecord>> {
    let flags_text = read_to_string(path)?;
    let mut r = csv_reader(flags_text.as_bytes());
    check_header(&mut r, path, &LABEL_HEADER)?;
    let mut flags: Vec<(String, Vec<bool>)> = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let line = row + 2;
        let id = &rec[0];
        let t: usize = parse_field(&rec, 1, path, line)?;
        let f = parse_flag(&rec[2], path, line)?;
        if flags.last().is_none_or(|(last, _)| last != id) {
            if flags.iter().any(|(other, _)| other == id) {
                return Err(CliError::format(
                    path,
                    format!("line {line}: rows of {id} are not contiguous"),
                ));
            }
            flags.push((id.to_string(), Vec::new()));
        }
        let series = &mut flags.last_mut().expect("pushed above").1;
        if t != series.len() {
            return Err(CliError::format(
                path,
                format!("line {line}: time_idx {t}, expected {}", series.len()),
            ));
        }
        series.push(f);
    }

    let spath = summary_path(path);
    let summary_text = read_to_string(&spath)?;
    let mut r = csv_reader(summary_text.as_bytes());
    check_header(&mut r, &spath, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(&spath, e.to_string()))?;
        let line = row + 2;
        let id = rec[0].to_string();
        let cu_flags = flags
            .iter()
            .find(|(other, _)| *other == id)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| CliError::format(path, format!("no flags for trip {id}")))?;
        out.push(LabelRecord {
            trip_id: id,
            cu_flags,
            first_cu_index: parse_opt_index(&rec[1], &spath, line)?,
            deadline_index: parse_opt_index(&rec[2], &spath, line)?,
            fallback_used: parse_flag(&rec[3], &spath, line)?,
        });
    }
    if out.len() != flags.len() {
        return Err(CliError::format(
            &spath,
            "summary and flag file list different trips",
        ));
    }
    Ok(out)
}

/// Rows grouped by trip, then metric, then time.
pub fn metrics_to_csv(series: &[MetricSeries]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(METRIC_HEADER).expect("in-memory write");
    for s in series {
        for (t, v) in s.values.iter().enumerate() {
            w.write_record([
                s.trip_id.as_str(),
                &t.to_string(),
                s.metric.name(),
                &format_value(*v),
            ])
            .expect("in-memory write");
        }
    }
    finish_csv(w)
}

/// One metric series per (trip, metric) as read from disk, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub trip_id: String,
    pub metric: MetricKind,
    pub values: Vec<f64>,
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRecord>> {
    let text = read_to_string(path)?;
    let mut r = csv_reader(text.as_bytes());
    check_header(&mut r, path, &METRIC_HEADER)?;
    let mut out: Vec<MetricRecord> = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let line = row + 2;
        let id = &rec[0];
        let t: usize = parse_field(&rec, 1, path, line)?;
        let metric: MetricKind = rec[2].parse().map_err(|_| {
            CliError::format(path, format!("line {line}: unknown metric `{}`", &rec[2]))
        })?;
        let value = parse_value(&rec[3]).ok_or_else(|| {
            CliError::format(path, format!("line {line}: bad value `{}`", &rec[3]))
        })?;
        let same = out
            .last()
            .is_some_and(|m| m.trip_id == id && m.metric == metric);
        if !same {
            if out.iter().any(|m| m.trip_id == id && m.metric == metric) {
                return Err(CliError::format(
                    path,
                    format!("line {line}: rows of {id}/{metric} are not contiguous"),
                ));
            }
            out.push(MetricRecord {
                trip_id: id.to_string(),
                metric,
                values: Vec::new(),
            });
        }
        let m = out.last_mut().expect("pushed above");
        if t != m.values.len() {
            return Err(CliError::format(
                path,
                format!("line {line}: time_idx {t}, expected {}", m.values.len()),
            ));
        }
        m.values.push(value);
    }
    Ok(out)
}
