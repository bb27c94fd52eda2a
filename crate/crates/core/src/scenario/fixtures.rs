//! Five hand-built trips, each isolating one way the metrics can fail.
//!
//! | id | scene | crash | expected alarms |
//! |----|-------|-------|-----------------|
//! | S1 | SV passes a weaving BV in the next lane | no | MPrISM only (false positive) |
//! | S2 | slowing BV swerves sharply into the SV's lane | yes | MPrISM in time; TTC, PCM late |
//! | S3 | SV and a BV just behind it merge into the same lane | yes | none in time |
//! | S4 | BV changes into the lane next to the SV | no | MPrISM only (false positive) |
//! | S5 | SV alone on the road | no | none |

use alloc::string::String;
use alloc::vec::Vec;

use super::motion::{LaneChange, MotionPlan, Wobble};
use super::{build_trip, GenerationConfig};
use crate::geometry::Trip;

pub const S1_ID: &str = "S1_overtake";
pub const S2_ID: &str = "S2_cut_in";
pub const S3_ID: &str = "S3_dual_merge";
pub const S4_ID: &str = "S4_adjacent_lane_change";
pub const S5_ID: &str = "S5_empty_road";

/// Step of S1 where the BV, just ahead of the SV, is drifting toward it.
pub const S1_ANALOG_INDEX: usize = 13;

fn fixture_config() -> GenerationConfig {
    GenerationConfig {
        duration: 6.0,
        ..GenerationConfig::default()
    }
}

fn build(id: &str, sv: MotionPlan, bvs: &[MotionPlan]) -> Trip {
    build_trip(String::from(id), &sv, bvs, &fixture_config()).trip
}

pub fn s1_overtake() -> Trip {
    let sv = MotionPlan::cruise(0.0, 2.0, 25.0);
    let bv = MotionPlan::cruise(20.0, 6.3, 15.0).with_wobble(Wobble {
        start: 0.5,
        amp: -0.6,
        period: 4.0,
    });
    build(S1_ID, sv, &[bv])
}

pub fn s2_cut_in() -> Trip {
    let sv = MotionPlan::cruise(0.0, 6.0, 25.0);
    let bv = MotionPlan::cruise(11.0, 9.5, 21.0)
        .with_lane_change(LaneChange {
            start: 1.4,
            offset: -3.5,
            accel: 7.0,
        })
        .with_accel(10, -4.0);
    build(S2_ID, sv, &[bv])
}

pub fn s3_dual_merge() -> Trip {
    let sv = MotionPlan::cruise(0.0, 2.0, 25.0).with_lane_change(LaneChange {
        start: 1.0,
        offset: 4.0,
        accel: 2.0,
    });
    let bv = MotionPlan::cruise(-4.5, 10.0, 25.0).with_lane_change(LaneChange {
        start: 1.0,
        offset: -4.0,
        accel: 2.0,
    });
    build(S3_ID, sv, &[bv])
}

pub fn s4_adjacent_lane_change() -> Trip {
    let sv = MotionPlan::cruise(0.0, 2.0, 25.0);
    let bv = MotionPlan::cruise(2.0, 10.0, 25.0).with_lane_change(LaneChange {
        start: 1.0,
        offset: -4.0,
        accel: 4.0,
    });
    build(S4_ID, sv, &[bv])
}

pub fn s5_empty_road() -> Trip {
    build(S5_ID, MotionPlan::cruise(0.0, 6.0, 25.0), &[])
}

/// S1..S5 in order.
pub fn golden_fixtures() -> Vec<Trip> {
    alloc::vec![
        s1_overtake(),
        s2_cut_in(),
        s3_dual_merge(),
        s4_adjacent_lane_change(),
        s5_empty_road(),
    ]
}
