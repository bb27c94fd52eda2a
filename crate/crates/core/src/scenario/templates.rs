//! Randomized highway scenario templates. BVs follow open-loop plans and
//! never react to the SV; the SV itself sometimes brakes after a delay.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::motion::{LaneChange, MotionPlan, Wobble};
use super::{build_trip, GeneratedTrip, GenerationConfig};
use crate::{math, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    CarFollowing,
    CutIn,
    DualMerge,
    Overtake,
    AdjacentLaneChange,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CarFollowing => "car_following",
            ScenarioKind::CutIn => "cut_in",
            ScenarioKind::DualMerge => "dual_merge",
            ScenarioKind::Overtake => "overtake",
            ScenarioKind::AdjacentLaneChange => "adjacent_lane_change",
        }
    }
}

/// Earliest crash step accepted; trips that crash sooner are redrawn so every
/// trip has some pre-crash history.
const MIN_CRASH_STEP: usize = 15;

struct Ctx<'a> {
    cfg: &'a GenerationConfig,
}

impl Ctx<'_> {
    fn lane_q(&self, lane: u32) -> f64 {
        self.cfg.road.lane_center(lane)
    }

    fn step_of(&self, t: f64) -> usize {
        math::round(t / self.cfg.dt) as usize
    }

    fn lane_change(&self, from: u32, to: u32, start: f64, accel: f64) -> LaneChange {
        LaneChange {
            start,
            offset: self.lane_q(to) - self.lane_q(from),
            accel,
        }
    }
}

/// Optional delayed SV braking in response to something at `trigger` (s).
fn sv_reaction<R: Rng>(
    rng: &mut R,
    ctx: &Ctx<'_>,
    plan: MotionPlan,
    trigger: f64,
    p_react: f64,
) -> MotionPlan {
    if rng.random_bool(p_react) {
        let delay = rng.random_range(0.4..2.0);
        let decel = rng.random_range(-8.0..-3.0);
        plan.with_accel(ctx.step_of(trigger + delay), decel)
    } else {
        plan
    }
}

/// 0-2 far-away vehicles that only add clutter.
fn background<R: Rng>(rng: &mut R, ctx: &Ctx<'_>, v_ref: f64) -> Vec<MotionPlan> {
    let n = rng.random_range(0..=2);
    (0..n)
        .map(|_| {
            let lane = rng.random_range(0..ctx.cfg.road.lane_count);
            let ahead = rng.random_bool(0.5);
            let gap = rng.random_range(50.0..90.0);
            let v = (v_ref + rng.random_range(-2.0..2.0)).max(0.0);
            MotionPlan::cruise(if ahead { gap } else { -gap }, ctx.lane_q(lane), v)
        })
        .collect()
}

fn car_following<R: Rng>(rng: &mut R, ctx: &Ctx<'_>) -> (MotionPlan, Vec<MotionPlan>) {
    let lane = rng.random_range(0..ctx.cfg.road.lane_count);
    let q = ctx.lane_q(lane);
    let v_sv = rng.random_range(18.0..30.0);
    let mut sv = MotionPlan::cruise(0.0, q, v_sv);
    let mut bvs = Vec::new();
    if rng.random_bool(0.2) {
        // Fast vehicle closing from behind while the SV slows down.
        let gap = rng.random_range(12.0..30.0);
        let v_bv = v_sv + rng.random_range(3.0..10.0);
        bvs.push(MotionPlan::cruise(-gap, q, v_bv));
        let t_brake = rng.random_range(0.5..3.0);
        sv = sv.with_accel(ctx.step_of(t_brake), rng.random_range(-6.0..-2.0));
    } else {
        let gap = rng.random_range(10.0..35.0);
        let v_lead = v_sv + rng.random_range(-6.0..1.0);
        let t_brake = rng.random_range(0.5..3.0);
        let decel = rng.random_range(-8.0..-3.0);
        let mut lead = MotionPlan::cruise(gap, q, v_lead).with_accel(ctx.step_of(t_brake), decel);
        if rng.random_bool(0.5) {
            let release = t_brake + rng.random_range(1.0..3.0);
            lead = lead.with_accel(ctx.step_of(release), 0.0);
        }
        bvs.push(lead);
        sv = sv_reaction(rng, ctx, sv, t_brake, 0.7);
    }
    bvs.extend(background(rng, ctx, v_sv));
    (sv, bvs)
}

fn adjacent_lane<R: Rng>(rng: &mut R, lane: u32, lanes: u32) -> u32 {
    if lane == 0 {
        1
    } else if lane + 1 == lanes || rng.random_bool(0.5) {
        lane - 1
    } else {
        lane + 1
    }
}

fn cut_in<R: Rng>(rng: &mut R, ctx: &Ctx<'_>) -> (MotionPlan, Vec<MotionPlan>) {
    let lanes = ctx.cfg.road.lane_count;
    let lane = rng.random_range(0..lanes);
    let from = adjacent_lane(rng, lane, lanes);
    let v_sv = rng.random_range(18.0..30.0);
    let sv = MotionPlan::cruise(0.0, ctx.lane_q(lane), v_sv);
    let dp = rng.random_range(-2.0..25.0);
    let v_bv = v_sv + rng.random_range(-8.0..2.0);
    let t_lc = rng.random_range(0.5..3.0);
    let accel = rng.random_range(1.5..4.5);
    let mut bv = MotionPlan::cruise(dp, ctx.lane_q(from), v_bv)
        .with_lane_change(ctx.lane_change(from, lane, t_lc, accel));
    if rng.random_bool(0.3) {
        bv = bv.with_accel(
            ctx.step_of(t_lc + rng.random_range(0.5..1.5)),
            rng.random_range(-6.0..-2.0),
        );
    }
    let sv = sv_reaction(rng, ctx, sv, t_lc + 0.5, 0.6);
    let mut bvs = alloc::vec![bv];
    bvs.extend(background(rng, ctx, v_sv));
    (sv, bvs)
}

fn dual_merge<R: Rng>(rng: &mut R, ctx: &Ctx<'_>) -> (MotionPlan, Vec<MotionPlan>) {
    let lanes = ctx.cfg.road.lane_count;
    let (sv_lane, bv_lane) = if rng.random_bool(0.5) { (0, 2) } else { (2, 0) };
    let target = 1.min(lanes - 1);
    let v_sv = rng.random_range(18.0..30.0);
    let t_sv = rng.random_range(0.5..3.0);
    let sv = MotionPlan::cruise(0.0, ctx.lane_q(sv_lane), v_sv).with_lane_change(ctx.lane_change(
        sv_lane,
        target,
        t_sv,
        rng.random_range(1.5..4.0),
    ));
    let dp = rng.random_range(-8.0..10.0);
    let v_bv = v_sv + rng.random_range(-3.0..3.0);
    let t_bv = t_sv + rng.random_range(-1.0..1.0);
    let bv = MotionPlan::cruise(dp, ctx.lane_q(bv_lane), v_bv).with_lane_change(ctx.lane_change(
        bv_lane,
        target,
        t_bv.max(0.2),
        rng.random_range(1.5..4.0),
    ));
    let mut bvs = alloc::vec![bv];
    bvs.extend(background(rng, ctx, v_sv));
    (sv, bvs)
}

fn overtake<R: Rng>(rng: &mut R, ctx: &Ctx<'_>) -> (MotionPlan, Vec<MotionPlan>) {
    let lanes = ctx.cfg.road.lane_count;
    let lane = rng.random_range(0..lanes);
    let bv_lane = adjacent_lane(rng, lane, lanes);
    let v_sv = rng.random_range(22.0..32.0);
    let sv = MotionPlan::cruise(0.0, ctx.lane_q(lane), v_sv);
    let v_bv = v_sv - rng.random_range(4.0..12.0);
    let dp = rng.random_range(8.0..30.0);
    let wobble = Wobble {
        start: rng.random_range(0.0..2.0),
        amp: rng.random_range(0.2..0.6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
        period: rng.random_range(3.0..5.0),
    };
    let bv = MotionPlan::cruise(dp, ctx.lane_q(bv_lane), v_bv).with_wobble(wobble);
    let mut bvs = alloc::vec![bv];
    bvs.extend(background(rng, ctx, v_sv));
    (sv, bvs)
}

fn adjacent_lane_change<R: Rng>(rng: &mut R, ctx: &Ctx<'_>) -> (MotionPlan, Vec<MotionPlan>) {
    let (sv_lane, bv_lane) = if rng.random_bool(0.5) { (0, 2) } else { (2, 0) };
    let v_sv = rng.random_range(18.0..30.0);
    let sv = MotionPlan::cruise(0.0, ctx.lane_q(sv_lane), v_sv);
    let dp = rng.random_range(-10.0..15.0);
    let v_bv = v_sv + rng.random_range(-4.0..4.0);
    let bv = MotionPlan::cruise(dp, ctx.lane_q(bv_lane), v_bv).with_lane_change(ctx.lane_change(
        bv_lane,
        1,
        rng.random_range(0.5..3.0),
        rng.random_range(1.5..4.5),
    ));
    let mut bvs = alloc::vec![bv];
    bvs.extend(background(rng, ctx, v_sv));
    (sv, bvs)
}

pub fn generate_trip<R: Rng>(
    kind: ScenarioKind,
    rng: &mut R,
    cfg: &GenerationConfig,
    trip_id: String,
) -> Result<GeneratedTrip> {
    let ctx = Ctx { cfg };
    let (lo, hi) = cfg.road.bounds();
    for _ in 0..cfg.max_attempts {
        let (sv, bvs) = match kind {
            ScenarioKind::CarFollowing => car_following(rng, &ctx),
            ScenarioKind::CutIn => cut_in(rng, &ctx),
            ScenarioKind::DualMerge => dual_merge(rng, &ctx),
            ScenarioKind::Overtake => overtake(rng, &ctx),
            ScenarioKind::AdjacentLaneChange => adjacent_lane_change(rng, &ctx),
        };
        let g = build_trip(trip_id.clone(), &sv, &bvs, cfg);
        if g.crash_after_end {
            continue;
        }
        if let Some(c) = g.trip.crash_index {
            if c < MIN_CRASH_STEP {
                continue;
            }
        }
        let half = 0.5 * cfg.body.width;
        let on_road = core::iter::once(&g.trip.sv)
            .chain(g.trip.bvs.iter())
            .all(|tr| {
                tr.states
                    .iter()
                    .all(|s| s.q - half >= lo && s.q + half <= hi)
            });
        if !on_road {
            continue;
        }
        return Ok(g);
    }
    Err(Error::GenerationExhausted {
        template: kind.name(),
        attempts: cfg.max_attempts,
    })
}
