//! Linearized point-mass dynamics and the Kamm acceleration polytope.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{Action, VehicleState, VehicleTrack};
use crate::math;
use crate::{Error, Result};

/// Lower bound on the linearization speed; `B` divides by it.
pub const V_FLOOR: f64 = 0.1;

/// `s(t+1) = A s(t) + B u(t)` with state `[p, q, v, phi]` and action `[ax, ay]`,
/// linearized around speed `v_tilde` and small heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsModel {
    pub dt: f64,
    pub v_tilde: f64,
    pub a: [[f64; 4]; 4],
    pub b: [[f64; 2]; 4],
}

impl DynamicsModel {
    pub fn new(v_tilde: f64, dt: f64) -> Self {
        let vt = if v_tilde > V_FLOOR { v_tilde } else { V_FLOOR };
        let h = 0.5 * dt * dt;
        Self {
            dt,
            v_tilde: vt,
            a: [
                [1.0, 0.0, dt, 0.0],
                [0.0, 1.0, 0.0, vt * dt],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ],
            b: [[h, 0.0], [0.0, h], [dt, 0.0], [0.0, dt / vt]],
        }
    }

    pub fn step(&self, s: &VehicleState, u: &Action) -> VehicleState {
        let x = [s.p, s.q, s.v, s.phi];
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i];
            *o = row[0] * x[0]
                + row[1] * x[1]
                + row[2] * x[2]
                + row[3] * x[3]
                + self.b[i][0] * u.ax
                + self.b[i][1] * u.ay;
        }
        VehicleState::new(out[0], out[1], out[2], out[3])
    }
}

pub fn make_dynamics(v_tilde: f64, dt: f64) -> DynamicsModel {
    DynamicsModel::new(v_tilde, dt)
}

/// States `s0, s1, .., sK` for `K = actions.len()`.
pub fn rollout(s0: &VehicleState, actions: &[Action], model: &DynamicsModel) -> Vec<VehicleState> {
    let mut out = Vec::with_capacity(actions.len() + 1);
    out.push(*s0);
    let mut s = *s0;
    for u in actions {
        s = model.step(&s, u);
        out.push(s);
    }
    out
}

/// Braking that would push the speed below zero is cut back to exactly stop
/// the vehicle. Lateral acceleration is kept. The clipped action stays
/// admissible because `(0, ay)` lies in the polytope whenever `(ax, ay)` does.
pub fn clip_to_stop(s: &VehicleState, u: &Action, dt: f64) -> Action {
    if u.ax < 0.0 && s.v + u.ax * dt < 0.0 {
        let v = if s.v > 0.0 { s.v } else { 0.0 };
        let floor = -v / dt;
        Action::new(if floor > u.ax { floor } else { u.ax }, u.ay)
    } else {
        *u
    }
}

/// Rollout with [`clip_to_stop`] applied at every step. Returns the states and
/// the actions actually applied, so `rollout(s0, &applied, model)` reproduces
/// the states exactly.
pub fn rollout_stopping(
    s0: &VehicleState,
    actions: &[Action],
    model: &DynamicsModel,
) -> (Vec<VehicleState>, Vec<Action>) {
    let mut states = Vec::with_capacity(actions.len() + 1);
    let mut applied = Vec::with_capacity(actions.len());
    states.push(*s0);
    let mut s = *s0;
    for u in actions {
        let a = clip_to_stop(&s, u, model.dt);
        s = model.step(&s, &a);
        applied.push(a);
        states.push(s);
    }
    (states, applied)
}

/// Append `extra_steps` constant-speed, constant-heading states.
pub fn extend_track(track: &VehicleTrack, extra_steps: usize, dt: f64) -> VehicleTrack {
    let mut out = track.clone();
    out.states.reserve(extra_steps);
    let mut s = *track.states.last().expect("track has at least one state");
    for _ in 0..extra_steps {
        s = s.coast(dt);
        out.states.push(s);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccelLimits {
    pub ax_min: f64,
    pub ax_max: f64,
    pub ay_max: f64,
}

impl Default for AccelLimits {
    fn default() -> Self {
        Self {
            ax_min: -8.0,
            ax_max: 4.0,
            ay_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KammVariant {
    /// Regular 12-gon inscribed in the quadrant-scaled ellipse.
    #[default]
    Regular12gon,
    /// Cosine in both columns, literally as the constraint matrix is
    /// usually printed. Kept for comparison only.
    AsPrinted,
}

/// `G u <= h` with 12 rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPolytope {
    pub limits: AccelLimits,
    pub variant: KammVariant,
    pub g: [[f64; 2]; 12],
    pub h: [f64; 12],
}

const CHORD_ANGLES: [f64; 3] = [7.0 * PI / 12.0, 9.0 * PI / 12.0, 11.0 * PI / 12.0];

pub fn make_kamm(limits: AccelLimits, variant: KammVariant) -> Result<ActionPolytope> {
    let AccelLimits {
        ax_min,
        ax_max,
        ay_max,
    } = limits;
    if !(ax_min.is_finite() && ax_max.is_finite() && ay_max.is_finite()) {
        return Err(Error::InvalidLimits("non-finite acceleration limit"));
    }
    if !(ax_min < 0.0 && ax_max > 0.0 && ay_max > 0.0) {
        return Err(Error::InvalidLimits(
            "need ax_min < 0 < ax_max and ay_max > 0",
        ));
    }
    let offset = math::sin(5.0 * PI / 12.0);
    let mut g = [[0.0; 2]; 12];
    // Row blocks in the order (+,+), (+,-), (-,+), (-,-) for (sx, sy); the
    // sx = +1 blocks face the braking side because cos(theta) < 0.
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    for (blk, &(sx, sy)) in signs.iter().enumerate() {
        let ax_scale = if sx > 0.0 { -ax_min } else { ax_max };
        for (j, &theta) in CHORD_ANGLES.iter().enumerate() {
            let c = math::cos(theta);
            let lateral = match variant {
                KammVariant::Regular12gon => math::sin(theta),
                KammVariant::AsPrinted => c,
            };
            g[3 * blk + j] = [sx * c / ax_scale, sy * lateral / ay_max];
        }
    }
    Ok(ActionPolytope {
        limits,
        variant,
        g,
        h: [offset; 12],
    })
}

impl ActionPolytope {
    pub fn standard() -> Self {
        make_kamm(AccelLimits::default(), KammVariant::default()).expect("default limits are valid")
    }

    /// `h - G u` per row.
    pub fn slacks(&self, u: &Action) -> [f64; 12] {
        let mut s = [0.0; 12];
        for (i, out) in s.iter_mut().enumerate() {
            *out = self.h[i] - (self.g[i][0] * u.ax + self.g[i][1] * u.ay);
        }
        s
    }

    pub fn contains(&self, u: &Action) -> bool {
        self.contains_tol(u, 0.0)
    }

    pub fn contains_tol(&self, u: &Action, tol: f64) -> bool {
        self.slacks(u).iter().all(|&s| s >= -tol)
    }

    /// Largest ratio `(G u)_i / h_i`; at most 1 inside the polytope.
    pub fn gauge(&self, u: &Action) -> f64 {
        let mut best = 0.0f64;
        for i in 0..12 {
            let r = (self.g[i][0] * u.ax + self.g[i][1] * u.ay) / self.h[i];
            if r > best {
                best = r;
            }
        }
        best
    }

    /// Point of the quadrant-scaled ellipse at angle `theta`.
    pub fn ellipse_point(&self, theta: f64) -> Action {
        let c = math::cos(theta);
        let s = math::sin(theta);
        let ax_scale = if c >= 0.0 {
            self.limits.ax_max
        } else {
            -self.limits.ax_min
        };
        Action::new(ax_scale * c, self.limits.ay_max * s)
    }

    /// Ellipse point at `theta` pulled radially onto the polytope boundary and
    /// nudged inward until `G u <= h` holds in floating point.
    pub fn boundary_action(&self, theta: f64) -> Action {
        let e = self.ellipse_point(theta);
        let k = self.gauge(&e);
        let mut u = if k > 1.0 {
            Action::new(e.ax / k, e.ay / k)
        } else {
            e
        };
        while !self.contains(&u) {
            u = Action::new(u.ax * (1.0 - 1e-12), u.ay * (1.0 - 1e-12));
        }
        u
    }

    /// The zero action followed by `directions` boundary actions at angles
    /// `2 pi i / directions`. With 12 directions these are the polygon
    /// vertices of the regular variant.
    pub fn boundary_grid(&self, directions: usize) -> Vec<Action> {
        let mut out = Vec::with_capacity(directions + 1);
        out.push(Action::ZERO);
        for i in 0..directions {
            out.push(self.boundary_action(TAU * i as f64 / directions as f64));
        }
        out
    }
}

/// Zero action plus the 12 vertices at ellipse angles `k pi / 6`.
pub fn action_vertices(polytope: &ActionPolytope) -> Vec<Action> {
    polytope.boundary_grid(12)
}
