//! Seeded synthetic highway trips and the golden failure-scenario fixtures.
//!
//! Every trip draws from its own ChaCha8 stream (seed, stream = trip index),
//! so trips can be generated in any order or in parallel with identical
//! results. Stored values are rounded to 9 significant digits before crash
//! detection, which makes the in-memory trip identical to its CSV image.

pub mod fixtures;
pub mod motion;
pub mod templates;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{rectangles_overlap, BodyModel, RoadSpec, Trip, VehicleState, VehicleTrack};
use crate::{math, Error, Result};

pub use fixtures::golden_fixtures;
pub use motion::{LaneChange, MotionPlan, Wobble};
pub use templates::ScenarioKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrashType {
    RearEnd,
    Sideswipe,
    Angle,
}

impl CrashType {
    pub fn name(self) -> &'static str {
        match self {
            CrashType::RearEnd => "rear_end",
            CrashType::Sideswipe => "sideswipe",
            CrashType::Angle => "angle",
        }
    }
}

/// Thresholds that sort crashes into types. These are plain defaults, not
/// calibrated against crash statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrashTypeRules {
    /// Relative heading at or above this is an angle crash (deg).
    pub angle_deg: f64,
    /// Below-threshold headings with lateral centre offset under this are
    /// rear-end, otherwise sideswipe (m).
    pub rear_end_max_offset: f64,
}

impl Default for CrashTypeRules {
    fn default() -> Self {
        Self {
            angle_deg: 15.0,
            rear_end_max_offset: 1.0,
        }
    }
}

pub fn classify_crash(sv: &VehicleState, bv: &VehicleState, rules: &CrashTypeRules) -> CrashType {
    let rel = math::abs(sv.phi - bv.phi).to_degrees();
    if rel >= rules.angle_deg {
        CrashType::Angle
    } else if math::abs(sv.q - bv.q) < rules.rear_end_max_offset {
        CrashType::RearEnd
    } else {
        CrashType::Sideswipe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemplateCounts {
    pub car_following: usize,
    pub cut_in: usize,
    pub dual_merge: usize,
    pub overtake: usize,
    pub adjacent_lane_change: usize,
}

impl Default for TemplateCounts {
    fn default() -> Self {
        Self {
            car_following: 40,
            cut_in: 50,
            dual_merge: 50,
            overtake: 30,
            adjacent_lane_change: 30,
        }
    }
}

impl TemplateCounts {
    pub fn total(&self) -> usize {
        self.car_following
            + self.cut_in
            + self.dual_merge
            + self.overtake
            + self.adjacent_lane_change
    }

    /// Template of the `i`-th trip: templates fill consecutive index blocks.
    pub fn kind_of(&self, i: usize) -> Option<ScenarioKind> {
        let blocks = [
            (ScenarioKind::CarFollowing, self.car_following),
            (ScenarioKind::CutIn, self.cut_in),
            (ScenarioKind::DualMerge, self.dual_merge),
            (ScenarioKind::Overtake, self.overtake),
            (ScenarioKind::AdjacentLaneChange, self.adjacent_lane_change),
        ];
        let mut acc = 0;
        for (kind, n) in blocks {
            acc += n;
            if i < acc {
                return Some(kind);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub seed: u64,
    pub counts: TemplateCounts,
    pub dt: f64,
    /// Trip length before any crash truncation (s).
    pub duration: f64,
    pub road: RoadSpec,
    pub body: BodyModel,
    pub crash_types: CrashTypeRules,
    /// Plans are simulated this long past the end of the trip; a trip whose
    /// only collision falls in that tail is redrawn (s).
    pub end_margin: f64,
    /// Redraws per trip before giving up.
    pub max_attempts: u32,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            counts: TemplateCounts::default(),
            dt: 0.1,
            duration: 8.0,
            road: RoadSpec::default(),
            body: BodyModel::default(),
            crash_types: CrashTypeRules::default(),
            end_margin: 2.0,
            max_attempts: 200,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(
                "generation.dt must be positive".into(),
            ));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::InvalidConfig(
                "generation.duration must be at least one step".into(),
            ));
        }
        if self.road.lane_count < 3 || self.road.lane_width.is_nan() || self.road.lane_width <= 0.0
        {
            return Err(Error::InvalidConfig(
                "generation.road needs >= 3 lanes of positive width".into(),
            ));
        }
        if !(self.end_margin >= 0.0 && self.end_margin.is_finite()) {
            return Err(Error::InvalidConfig(
                "generation.end_margin must be >= 0".into(),
            ));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig(
                "generation.max_attempts must be >= 1".into(),
            ));
        }
        self.body.validate()
    }

    pub fn steps(&self) -> usize {
        math::round(self.duration / self.dt) as usize
    }
}

/// Generated trip plus bookkeeping for the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTrip {
    pub trip: Trip,
    pub kind: Option<ScenarioKind>,
    pub crash_type: Option<CrashType>,
    /// The plans collide only after the recorded window ends.
    pub crash_after_end: bool,
}

/// Digits after the decimal point that keep 9 significant digits.
pub fn decimals_for(x: f64) -> usize {
    if x == 0.0 || !x.is_finite() {
        return 0;
    }
    let mag = libm::floor(libm::log10(math::abs(x))) as i64;
    (8 - mag).max(0) as usize
}

/// Plain-decimal text with 9 significant digits; `-0` prints as `0`.
pub fn format_decimal(x: f64) -> String {
    let x = quantize_small(x);
    let s = format!("{:.*}", decimals_for(x), x);
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        String::from(&s[1..])
    } else {
        s
    }
}

fn quantize_small(x: f64) -> f64 {
    if math::abs(x) < 1e-12 {
        0.0
    } else {
        x
    }
}

/// The value a state component takes after a write/read cycle.
pub fn quantize(x: f64) -> f64 {
    format_decimal(x).parse().expect("formatted decimal parses")
}

pub fn quantize_state(s: &VehicleState) -> VehicleState {
    VehicleState::new(quantize(s.p), quantize(s.q), quantize(s.v), quantize(s.phi))
}

/// Simulate plans into a trip. Track 0 is the SV; BVs get ids `1..`. All tracks
/// end at the first rectangle overlap of the SV with any BV.
pub fn build_trip(
    trip_id: String,
    sv: &MotionPlan,
    bvs: &[MotionPlan],
    cfg: &GenerationConfig,
) -> GeneratedTrip {
    let steps = cfg.steps();
    let total = steps + math::round(cfg.end_margin / cfg.dt) as usize;
    let q = |plan: &MotionPlan| -> Vec<VehicleState> {
        plan.simulate(total, cfg.dt)
            .iter()
            .map(quantize_state)
            .collect()
    };
    let mut sv_states = q(sv);
    let mut bv_states: Vec<Vec<VehicleState>> = bvs.iter().map(q).collect();

    let mut crash = None;
    'time: for t in 0..=total {
        for (i, b) in bv_states.iter().enumerate() {
            if rectangles_overlap((&sv_states[t], &cfg.body), (&b[t], &cfg.body)) {
                crash = Some((t, i));
                break 'time;
            }
        }
    }
    let crash_after_end = crash.is_some_and(|(t, _)| t > steps);
    if crash_after_end {
        crash = None;
    }
    let crash_type =
        crash.map(|(t, i)| classify_crash(&sv_states[t], &bv_states[i][t], &cfg.crash_types));
    let end = crash.map_or(steps, |(t, _)| t);
    sv_states.truncate(end + 1);
    for b in &mut bv_states {
        b.truncate(end + 1);
    }
    let trip = Trip {
        trip_id,
        dt: cfg.dt,
        sv: VehicleTrack::new(0, true, cfg.body, sv_states),
        bvs: bv_states
            .into_iter()
            .enumerate()
            .map(|(i, s)| VehicleTrack::new(i as u32 + 1, false, cfg.body, s))
            .collect(),
        crash: crash.is_some(),
        crash_index: crash.map(|c| c.0),
        road: cfg.road,
    };
    GeneratedTrip {
        trip,
        kind: None,
        crash_type,
        crash_after_end,
    }
}

pub fn trip_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn trip_id(index: usize) -> String {
    format!("trip_{index:04}")
}

/// Trip `index` of the dataset described by `cfg`.
pub fn generate_indexed(cfg: &GenerationConfig, index: usize) -> Result<GeneratedTrip> {
    let kind = cfg.counts.kind_of(index).ok_or_else(|| {
        Error::InvalidConfig(format!("trip index {index} beyond manifest counts"))
    })?;
    let mut rng = trip_rng(cfg.seed, index);
    let mut g = templates::generate_trip(kind, &mut rng, cfg, trip_id(index))?;
    g.kind = Some(kind);
    Ok(g)
}

/// All trips of the manifest, in index order.
pub fn generate_dataset(cfg: &GenerationConfig) -> Result<Vec<GeneratedTrip>> {
    cfg.validate()?;
    (0..cfg.counts.total())
        .map(|i| generate_indexed(cfg, i))
        .collect()
}
