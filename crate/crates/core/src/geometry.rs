//! Vehicle states, logged trips and the body models used for collision checks.
//!
//! Coordinates are road-aligned: `p` runs along the road, `q` across it, and
//! the heading `phi` is measured from the road direction. Two collision
//! notions coexist:
//!
//! - the three-circle model, an over-approximation of the footprint used by the
//!   ground-truth oracle ([`circles_collide`]);
//! - the oriented length x width rectangle, the "real" geometry used to flag
//!   crashes in generated data ([`rectangles_overlap`]).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Kinematic state of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Longitudinal position (m).
    pub p: f64,
    /// Lateral position (m).
    pub q: f64,
    /// Speed (m/s), never negative.
    pub v: f64,
    /// Heading relative to the road direction (rad).
    pub phi: f64,
}

impl VehicleState {
    pub const fn new(p: f64, q: f64, v: f64, phi: f64) -> Self {
        Self { p, q, v, phi }
    }

    pub fn is_valid(&self) -> bool {
        self.p.is_finite()
            && self.q.is_finite()
            && self.v.is_finite()
            && self.phi.is_finite()
            && self.v >= 0.0
    }

    pub fn position(&self) -> Point {
        Point::new(self.p, self.q)
    }

    /// One step of constant-speed, constant-heading motion.
    pub fn coast(&self, dt: f64) -> VehicleState {
        VehicleState {
            p: self.p + self.v * dt * math::cos(self.phi),
            q: self.q + self.v * dt * math::sin(self.phi),
            v: self.v,
            phi: self.phi,
        }
    }
}

/// Longitudinal and lateral acceleration command (m/s^2).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub ax: f64,
    pub ay: f64,
}

impl Action {
    pub const ZERO: Action = Action { ax: 0.0, ay: 0.0 };

    pub const fn new(ax: f64, ay: f64) -> Self {
        Self { ax, ay }
    }

    pub fn norm(&self) -> f64 {
        math::hypot(self.ax, self.ay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        math::sqrt(self.dist_sq(other))
    }
}

/// Footprint of a vehicle: a `length` x `width` rectangle, over-approximated by
/// three circles of radius `radius` placed `center_spacing` apart along the
/// heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BodyModel {
    pub length: f64,
    pub width: f64,
    pub radius: f64,
    pub center_spacing: f64,
}

impl Default for BodyModel {
    /// 5 m x 2 m passenger car, radius 1.3 m, circle centres 1.75 m apart.
    fn default() -> Self {
        Self {
            length: 5.0,
            width: 2.0,
            radius: 1.3,
            center_spacing: 1.75,
        }
    }
}

impl BodyModel {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.length, self.width, self.radius, self.center_spacing]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidBody("non-finite dimension"));
        }
        if self.radius <= 0.0 {
            return Err(Error::InvalidBody("radius must be positive"));
        }
        if self.center_spacing <= 0.0 {
            return Err(Error::InvalidBody("center spacing must be positive"));
        }
        if self.length <= 0.0 || self.width <= 0.0 {
            return Err(Error::InvalidBody("length and width must be positive"));
        }
        if !self.covers_corners() {
            return Err(Error::InvalidBody(
                "circles do not reach the rectangle corners",
            ));
        }
        Ok(())
    }

    /// Distance from a rectangle corner to the nearest (end) circle centre.
    pub fn corner_distance(&self) -> f64 {
        math::hypot(
            math::abs(0.5 * self.length - self.center_spacing),
            0.5 * self.width,
        )
    }

    /// Largest distance from any point of the rectangle to its nearest circle
    /// centre. Besides the corners, the long-edge points halfway between two
    /// centres are candidates; for the default body those are the worst
    /// (about 1.329 m, slightly beyond the 1.3 m radius).
    pub fn coverage_radius(&self) -> f64 {
        let mid = math::hypot(0.5 * self.center_spacing, 0.5 * self.width);
        let corner = self.corner_distance();
        if corner > mid {
            corner
        } else {
            mid
        }
    }

    pub fn covers_corners(&self) -> bool {
        self.corner_distance() <= self.radius
    }

    pub fn covers_rectangle(&self) -> bool {
        self.coverage_radius() <= self.radius
    }
}

/// Rear, centre and front circle centres for a vehicle pose.
///
/// Placement uses the exact heading rather than the small-angle
/// linearization of the dynamics.
pub fn circle_centers(state: &VehicleState, body: &BodyModel) -> [Point; 3] {
    let dx = body.center_spacing * math::cos(state.phi);
    let dy = body.center_spacing * math::sin(state.phi);
    [
        Point::new(state.p - dx, state.q - dy),
        Point::new(state.p, state.q),
        Point::new(state.p + dx, state.q + dy),
    ]
}

/// Smallest distance between any pair of circle centres of two vehicles.
pub fn min_center_distance(a: (&VehicleState, &BodyModel), b: (&VehicleState, &BodyModel)) -> f64 {
    let ca = circle_centers(a.0, a.1);
    let cb = circle_centers(b.0, b.1);
    let mut best = f64::INFINITY;
    for pa in &ca {
        for pb in &cb {
            let d = pa.dist_sq(pb);
            if d < best {
                best = d;
            }
        }
    }
    math::sqrt(best)
}

/// Three-circle collision: true iff some pair of centres is closer than the
/// sum of radii. Exactly touching circles do not collide.
pub fn circles_collide(a: (&VehicleState, &BodyModel), b: (&VehicleState, &BodyModel)) -> bool {
    let threshold = a.1.radius + b.1.radius;
    centers_collide(
        &circle_centers(a.0, a.1),
        &circle_centers(b.0, b.1),
        threshold * threshold,
    )
}

#[inline]
pub(crate) fn centers_collide(a: &[Point; 3], b: &[Point; 3], threshold_sq: f64) -> bool {
    a.iter()
        .any(|pa| b.iter().any(|pb| pa.dist_sq(pb) < threshold_sq))
}

/// Separating-axis test on the two oriented rectangles. Overlap is open:
/// rectangles sharing only an edge or a corner do not overlap.
pub fn rectangles_overlap(a: (&VehicleState, &BodyModel), b: (&VehicleState, &BodyModel)) -> bool {
    let (sa, ba) = a;
    let (sb, bb) = b;
    let (ca, sa_) = (math::cos(sa.phi), math::sin(sa.phi));
    let (cb, sb_) = (math::cos(sb.phi), math::sin(sb.phi));
    let axes = [(ca, sa_), (-sa_, ca), (cb, sb_), (-sb_, cb)];
    let dp = sb.p - sa.p;
    let dq = sb.q - sa.q;
    for (ux, uy) in axes {
        let center_gap = math::abs(dp * ux + dq * uy);
        let ra = 0.5 * ba.length * math::abs(ca * ux + sa_ * uy)
            + 0.5 * ba.width * math::abs(-sa_ * ux + ca * uy);
        let rb = 0.5 * bb.length * math::abs(cb * ux + sb_ * uy)
            + 0.5 * bb.width * math::abs(-sb_ * ux + cb * uy);
        if center_gap >= ra + rb {
            return false;
        }
    }
    true
}

/// Straight multi-lane road in the road-aligned frame; lanes are stacked from
/// `q = 0` upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoadSpec {
    pub lane_count: u32,
    pub lane_width: f64,
}

impl Default for RoadSpec {
    fn default() -> Self {
        Self {
            lane_count: 3,
            lane_width: 4.0,
        }
    }
}

impl RoadSpec {
    /// Lateral bounds `(right, left)` of the paved road.
    pub fn bounds(&self) -> (f64, f64) {
        (0.0, self.lane_count as f64 * self.lane_width)
    }

    pub fn lane_center(&self, lane: u32) -> f64 {
        (lane as f64 + 0.5) * self.lane_width
    }
}

/// One vehicle's logged trajectory at a uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrack {
    pub id: u32,
    pub is_sv: bool,
    pub body: BodyModel,
    pub states: Vec<VehicleState>,
}

impl VehicleTrack {
    pub fn new(id: u32, is_sv: bool, body: BodyModel, states: Vec<VehicleState>) -> Self {
        Self {
            id,
            is_sv,
            body,
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State at step `t`; past the end of the log the vehicle keeps its last
    /// speed and heading (same advance as `kinematics::extend_track`).
    pub fn state_at(&self, t: usize, dt: f64) -> VehicleState {
        let last = self.states.len() - 1;
        if t <= last {
            return self.states[t];
        }
        let mut s = self.states[last];
        for _ in last..t {
            s = s.coast(dt);
        }
        s
    }
}

/// A logged trip: one subject vehicle (SV) and any number of background
/// vehicles (BVs) sharing a time origin and step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trip {
    pub trip_id: String,
    pub dt: f64,
    pub sv: VehicleTrack,
    pub bvs: Vec<VehicleTrack>,
    pub crash: bool,
    /// First step at which the SV rectangle overlaps a BV rectangle.
    pub crash_index: Option<usize>,
    pub road: RoadSpec,
}

impl Trip {
    /// Number of SV timesteps.
    pub fn len(&self) -> usize {
        self.sv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sv.is_empty()
    }

    /// Last step that labels and metrics are evaluated at.
    pub fn last_evaluated_index(&self) -> usize {
        let end = self.len().saturating_sub(1);
        match self.crash_index {
            Some(c) if c < end => c,
            _ => end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| Error::InvalidTrip {
            trip_id: self.trip_id.clone(),
            reason: reason.into(),
        };
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(fail("dt must be positive"));
        }
        if self.sv.is_empty() {
            return Err(fail("subject vehicle has no states"));
        }
        if !self.sv.is_sv || self.bvs.iter().any(|b| b.is_sv) {
            return Err(fail("exactly one track must be the subject vehicle"));
        }
        for track in core::iter::once(&self.sv).chain(self.bvs.iter()) {
            if track.is_empty() {
                return Err(fail("vehicle track has no states"));
            }
            if track.states.iter().any(|s| !s.is_valid()) {
                return Err(fail("non-finite state or negative speed"));
            }
            track.body.validate()?;
        }
        if self.crash != self.crash_index.is_some() {
            return Err(fail("crash flag and crash index disagree"));
        }
        if let Some(c) = self.crash_index {
            if c >= self.len() {
                return Err(fail("crash index beyond the subject vehicle log"));
            }
        }
        Ok(())
    }

    /// First step at which the SV rectangle overlaps any BV rectangle.
    pub fn first_rectangle_overlap(&self) -> Option<usize> {
        (0..self.len()).find(|&t| {
            let sv = &self.sv.states[t];
            self.bvs.iter().any(|bv| {
                let s = bv.state_at(t, self.dt);
                rectangles_overlap((sv, &self.sv.body), (&s, &bv.body))
            })
        })
    }
}
