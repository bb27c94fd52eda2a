//! Real-time safety metrics evaluated per timestep of a logged trip.

pub mod mprism;
pub mod pcm;
pub mod ttc;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Trip;
use crate::{Error, Result};

pub use mprism::{Mprism, MprismConfig};
pub use pcm::{Pcm, PcmConfig, PcmOutput};
pub use ttc::TtcConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Ttc,
    Pcm,
    Mprism,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Ttc, MetricKind::Pcm, MetricKind::Mprism];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Ttc => "ttc",
            MetricKind::Pcm => "pcm",
            MetricKind::Mprism => "mprism",
        }
    }

    pub fn spec(self) -> MetricSpec {
        match self {
            MetricKind::Ttc | MetricKind::Mprism => MetricSpec {
                kind: self,
                polarity: Polarity::AlarmWhenLeq,
                default_threshold: 1.0,
                sweep: (1..=40).map(|i| i as f64 / 10.0).collect(),
            },
            MetricKind::Pcm => MetricSpec {
                kind: self,
                polarity: Polarity::AlarmWhenGeq,
                default_threshold: 8.0,
                sweep: (1..=10).map(|i| 8.0 * i as f64 / 10.0).collect(),
            },
        }
    }

    /// Value that never raises an alarm.
    pub fn sentinel(self) -> f64 {
        match self.spec().polarity {
            Polarity::AlarmWhenLeq => f64::INFINITY,
            Polarity::AlarmWhenGeq => 0.0,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ttc" => Ok(MetricKind::Ttc),
            "pcm" => Ok(MetricKind::Pcm),
            "mprism" => Ok(MetricKind::Mprism),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown metric `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    AlarmWhenLeq,
    AlarmWhenGeq,
}

impl Polarity {
    pub fn alarms(self, value: f64, threshold: f64) -> bool {
        match self {
            Polarity::AlarmWhenLeq => value <= threshold,
            Polarity::AlarmWhenGeq => value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub polarity: Polarity,
    pub default_threshold: f64,
    /// Ascending.
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub trip_id: String,
    pub metric: MetricKind,
    pub values: Vec<f64>,
    /// Steps where the metric could not be computed (stored as the sentinel).
    pub unavailable: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub ttc: TtcConfig,
    pub pcm: PcmConfig,
    pub mprism: MprismConfig,
}

/// Prepared evaluators for all three metrics.
#[derive(Debug, Clone)]
pub struct MetricSuite {
    pub ttc: TtcConfig,
    pub pcm: Pcm,
    pub mprism: Mprism,
}

impl MetricSuite {
    pub fn new(cfg: &MetricsConfig) -> Result<Self> {
        Ok(Self {
            ttc: cfg.ttc,
            pcm: Pcm::new(cfg.pcm)?,
            mprism: Mprism::new(cfg.mprism)?,
        })
    }

    /// One value per SV timestep; steps after the crash hold the sentinel.
    pub fn evaluate(&self, trip: &Trip, kind: MetricKind) -> MetricSeries {
        let n = trip.len();
        let last = trip.last_evaluated_index();
        let mut values = alloc::vec![kind.sentinel(); n];
        let mut unavailable = Vec::new();
        for (t, slot) in values.iter_mut().enumerate().take(last + 1) {
            *slot = match kind {
                MetricKind::Ttc => ttc::ttc(trip, t, &self.ttc),
                MetricKind::Mprism => self.mprism.mprttc(trip, t),
                MetricKind::Pcm => match self.pcm.evaluate(trip, t) {
                    Some(out) => out.max_accel,
                    None => {
                        unavailable.push(t);
                        kind.sentinel()
                    }
                },
            };
        }
        MetricSeries {
            trip_id: trip.trip_id.clone(),
            metric: kind,
            values,
            unavailable,
        }
    }
}

pub fn evaluate_metric(trip: &Trip, kind: MetricKind, cfg: &MetricsConfig) -> Result<MetricSeries> {
    Ok(MetricSuite::new(cfg)?.evaluate(trip, kind))
}
