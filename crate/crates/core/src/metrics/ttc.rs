//! Time-to-collision against the same-lane leader under constant speeds.

use serde::{Deserialize, Serialize};

use crate::geometry::Trip;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TtcConfig {
    /// A BV counts as "in lane" when its lateral offset is below this (m).
    pub lateral_threshold: f64,
    /// Bumper-to-bumper correction `d` (m).
    pub vehicle_length: f64,
}

impl Default for TtcConfig {
    fn default() -> Self {
        Self {
            lateral_threshold: 2.0,
            vehicle_length: 5.0,
        }
    }
}

/// Nearest BV ahead of the SV within the lateral threshold; equal gaps go to
/// the lower id.
pub fn find_leading_vehicle(trip: &Trip, t: usize, cfg: &TtcConfig) -> Option<u32> {
    let sv = trip.sv.states.get(t)?;
    let mut best: Option<(f64, u32)> = None;
    for bv in &trip.bvs {
        let s = bv.state_at(t, trip.dt);
        if math::abs(s.q - sv.q) >= cfg.lateral_threshold || s.p <= sv.p {
            continue;
        }
        let gap = s.p - sv.p;
        let better = match best {
            None => true,
            Some((g, id)) => gap < g || (gap == g && bv.id < id),
        };
        if better {
            best = Some((gap, bv.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Seconds until the SV closes the bumper gap, `+inf` without a slower leader.
pub fn ttc(trip: &Trip, t: usize, cfg: &TtcConfig) -> f64 {
    let Some(id) = find_leading_vehicle(trip, t, cfg) else {
        return f64::INFINITY;
    };
    let sv = trip.sv.states[t];
    let lead = trip
        .bvs
        .iter()
        .find(|b| b.id == id)
        .expect("leader id comes from this trip")
        .state_at(t, trip.dt);
    ttc_pair(lead.p, lead.v, sv.p, sv.v, cfg.vehicle_length)
}

pub fn ttc_pair(lead_p: f64, lead_v: f64, p: f64, v: f64, d: f64) -> f64 {
    if v > lead_v {
        (lead_p - p - d) / (v - lead_v)
    } else {
        f64::INFINITY
    }
}
