//! Open-loop vehicle motion: piecewise-constant longitudinal acceleration on
//! the step grid plus closed-form sinusoidal lane changes.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::geometry::VehicleState;
use crate::math;

/// Lateral move of `offset` metres whose lateral acceleration is one full sine
/// period of amplitude `accel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChange {
    pub start: f64,
    pub offset: f64,
    pub accel: f64,
}

impl LaneChange {
    /// Duration `T` with `|offset| = accel T^2 / (2 pi)`.
    pub fn duration(&self) -> f64 {
        math::sqrt(TAU * math::abs(self.offset) / self.accel)
    }

    /// Lateral displacement and velocity at absolute time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let s = t - self.start;
        if s <= 0.0 {
            return (0.0, 0.0);
        }
        let period = self.duration();
        if s >= period {
            return (self.offset, 0.0);
        }
        let w = TAU / period;
        let sign = if self.offset < 0.0 { -1.0 } else { 1.0 };
        let y = sign * self.accel / w * (s - math::sin(w * s) / w);
        let vy = sign * self.accel / w * (1.0 - math::cos(w * s));
        (y, vy)
    }
}

/// Lateral sine wobble `amp sin(2 pi (t - start) / period)` for `t >= start`,
/// eased in over [`WOBBLE_EASE`] so the lateral velocity starts from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wobble {
    pub start: f64,
    pub amp: f64,
    pub period: f64,
}

/// Time constant of the wobble's exponential ease-in (s).
pub const WOBBLE_EASE: f64 = 0.5;

impl Wobble {
    fn eval(&self, t: f64) -> (f64, f64) {
        let s = t - self.start;
        if s <= 0.0 {
            return (0.0, 0.0);
        }
        let w = TAU / self.period;
        let decay = libm::exp(-s / WOBBLE_EASE);
        let (sin, cos) = (math::sin(w * s), math::cos(w * s));
        let y = self.amp * sin * (1.0 - decay);
        let vy = self.amp * (w * cos * (1.0 - decay) + sin * decay / WOBBLE_EASE);
        (y, vy)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionPlan {
    pub p0: f64,
    pub q0: f64,
    pub v0: f64,
    /// `(start step, ax)`, sorted by step; acceleration before the first entry is 0.
    pub accel: Vec<(usize, f64)>,
    pub lane_changes: Vec<LaneChange>,
    pub wobble: Option<Wobble>,
}

impl MotionPlan {
    pub fn cruise(p0: f64, q0: f64, v0: f64) -> Self {
        Self {
            p0,
            q0,
            v0,
            ..Self::default()
        }
    }

    pub fn with_accel(mut self, start_step: usize, ax: f64) -> Self {
        self.accel.push((start_step, ax));
        self.accel.sort_by_key(|a| a.0);
        self
    }

    pub fn with_lane_change(mut self, lc: LaneChange) -> Self {
        self.lane_changes.push(lc);
        self
    }

    pub fn with_wobble(mut self, w: Wobble) -> Self {
        self.wobble = Some(w);
        self
    }

    fn accel_at(&self, step: usize) -> f64 {
        let mut a = 0.0;
        for &(s, ax) in &self.accel {
            if s <= step {
                a = ax;
            }
        }
        a
    }

    fn lateral(&self, t: f64) -> (f64, f64) {
        let mut y = self.q0;
        let mut vy = 0.0;
        for lc in &self.lane_changes {
            let (d, v) = lc.eval(t);
            y += d;
            vy += v;
        }
        if let Some(w) = &self.wobble {
            let (d, v) = w.eval(t);
            y += d;
            vy += v;
        }
        (y, vy)
    }

    /// `steps + 1` states on the `dt` grid. Longitudinal speed never drops
    /// below zero; a braking step that would reverse stops the vehicle.
    pub fn simulate(&self, steps: usize, dt: f64) -> Vec<VehicleState> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut p = self.p0;
        let mut vx = self.v0;
        for i in 0..=steps {
            let t = i as f64 * dt;
            let (q, vy) = self.lateral(t);
            let v = math::hypot(vx, vy);
            let phi = if v > 0.0 { math::atan2(vy, vx) } else { 0.0 };
            out.push(VehicleState::new(p, q, v, phi));
            let a = self.accel_at(i);
            let v_next = vx + a * dt;
            if v_next < 0.0 {
                p += vx * vx / (2.0 * -a);
                vx = 0.0;
            } else {
                p += vx * dt + 0.5 * a * dt * dt;
                vx = v_next;
            }
        }
        out
    }
}
