//! PCM: plan the least critical SV trajectory inside a predicted corridor and
//! report the largest acceleration the plan needs.
//!
//! Decision variables are the normalized accelerations `u / cap` at each step,
//! optional hinge variables for the longitudinal margin, and free slacks that
//! soften the corridor. Positions are affine in the accelerations:
//! `p(tau) = p0 + tau dt v0 + sum_{j<tau} dt^2 (tau - j - 1/2) ax_j`
//! (same form laterally with `v_tilde phi0`).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Trip, VehicleState};
use crate::kinematics::{make_kamm, AccelLimits, ActionPolytope, KammVariant, V_FLOOR};
use crate::qp::{solve_qp, QpProblem, QpStatus};
use crate::{math, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PcmConfig {
    pub w_x: f64,
    pub w_y: f64,
    pub w_ax: f64,
    pub w_ay: f64,
    pub horizon: usize,
    pub dt: f64,
    /// `mu_max * g`: acceleration normalizer and output cap (m/s^2).
    pub accel_cap: f64,
    /// Longitudinal margin below which the hinge cost starts (m).
    pub d_soft: f64,
    /// Quadratic penalty on corridor slack.
    pub rho: f64,
    /// Corridor slack above this means no clean plan exists (m).
    pub slack_tol: f64,
    pub limits: AccelLimits,
    pub kamm_variant: KammVariant,
    pub qp_tol: f64,
    pub qp_max_iter: usize,
}

impl Default for PcmConfig {
    fn default() -> Self {
        Self {
            w_x: 1.0,
            w_y: 1.0,
            w_ax: 0.1,
            w_ay: 1.0,
            horizon: 20,
            dt: 0.1,
            accel_cap: 8.0,
            d_soft: 5.0,
            rho: 1e4,
            slack_tol: 1e-3,
            limits: AccelLimits::default(),
            kamm_variant: KammVariant::default(),
            qp_tol: 1e-6,
            qp_max_iter: 2000,
        }
    }
}

impl PcmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pcm.w_x", self.w_x),
            ("pcm.w_y", self.w_y),
            ("pcm.w_ax", self.w_ax),
            ("pcm.w_ay", self.w_ay),
            ("pcm.dt", self.dt),
            ("pcm.accel_cap", self.accel_cap),
            ("pcm.d_soft", self.d_soft),
            ("pcm.rho", self.rho),
            ("pcm.slack_tol", self.slack_tol),
            ("pcm.qp_tol", self.qp_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{name} must be positive"
                )));
            }
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("pcm.horizon must be >= 1".into()));
        }
        make_kamm(self.limits, self.kamm_variant)?;
        Ok(())
    }
}

/// Corridor bounds for `tau = 1..=k` (index `tau - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub front: Vec<f64>,
}

pub fn pcm_corridor(trip: &Trip, t: usize, cfg: &PcmConfig) -> Corridor {
    let k = cfg.horizon;
    let sv = trip.sv.states[t];
    let body = &trip.sv.body;
    let (lo, hi) = trip.road.bounds();
    let mut c = Corridor {
        left: vec![hi - 0.5 * body.width; k],
        right: vec![lo + 0.5 * body.width; k],
        front: vec![f64::INFINITY; k],
    };
    for bv in &trip.bvs {
        let mut s = bv.state_at(t, trip.dt);
        if s.p <= sv.p {
            continue;
        }
        let band = 0.5 * (bv.body.width + body.width);
        let reach = 0.5 * (bv.body.length + body.length);
        for tau in 1..=k {
            s = s.coast(trip.dt);
            let i = tau - 1;
            let dq = s.q - sv.q;
            if math::abs(dq) < band {
                let f = s.p - reach;
                if f < c.front[i] {
                    c.front[i] = f;
                }
                continue;
            }
            let sv_p = sv.p + sv.v * tau as f64 * trip.dt;
            if math::abs(s.p - sv_p) >= reach {
                continue;
            }
            if dq > 0.0 {
                let l = s.q - band;
                if l < c.left[i] {
                    c.left[i] = l;
                }
            } else {
                let r = s.q + band;
                if r > c.right[i] {
                    c.right[i] = r;
                }
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmOutput {
    /// Largest planned acceleration magnitude, capped (m/s^2).
    pub max_accel: f64,
    /// Objective value of the plan.
    pub criticality: f64,
    /// Largest corridor slack used (m).
    pub max_slack: f64,
}

/// Solver setup shared across timesteps.
#[derive(Debug, Clone)]
pub struct Pcm {
    pub config: PcmConfig,
    polytope: ActionPolytope,
}

impl Pcm {
    pub fn new(config: PcmConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            polytope: make_kamm(config.limits, config.kamm_variant)?,
            config,
        })
    }

    /// `None` when the QP did not converge.
    pub fn evaluate(&self, trip: &Trip, t: usize) -> Option<PcmOutput> {
        let corridor = pcm_corridor(trip, t, &self.config);
        self.plan(&trip.sv.states[t], &corridor)
    }

    pub fn plan(&self, sv: &VehicleState, corridor: &Corridor) -> Option<PcmOutput> {
        let cfg = &self.config;
        let k = cfg.horizon;
        let dt = cfg.dt;
        let cap = cfg.accel_cap;
        let v_tilde = if sv.v > V_FLOOR { sv.v } else { V_FLOOR };
        let coef = |tau: usize, j: usize| dt * dt * (tau as f64 - j as f64 - 0.5);

        let p_free = |tau: usize| sv.p + tau as f64 * dt * sv.v;
        let q_free = |tau: usize| sv.q + tau as f64 * dt * v_tilde * sv.phi;
        let reach_x = |tau: usize| (0..tau).map(|j| coef(tau, j)).sum::<f64>() * cfg.limits.ax_max;
        let reach_y = |tau: usize| (0..tau).map(|j| coef(tau, j)).sum::<f64>() * cfg.limits.ay_max;

        // Only keep slack / hinge variables whose constraint can bind.
        let mut hinge = Vec::new();
        let mut front = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for tau in 1..=k {
            let i = tau - 1;
            let p_max = p_free(tau) + reach_x(tau);
            if corridor.front[i].is_finite() {
                if p_max > corridor.front[i] - cfg.d_soft {
                    hinge.push(tau);
                }
                if p_max > corridor.front[i] {
                    front.push(tau);
                }
            }
            if q_free(tau) + reach_y(tau) > corridor.left[i] {
                left.push(tau);
            }
            if q_free(tau) - reach_y(tau) < corridor.right[i] {
                right.push(tau);
            }
        }

        let nu = 2 * k;
        let h0 = nu;
        let f0 = h0 + hinge.len();
        let l0 = f0 + front.len();
        let r0 = l0 + left.len();
        let n = r0 + right.len();
        let slack_scale = 1.0 / math::sqrt(cfg.rho);

        let mut p = vec![0.0; n * n];
        let mut q = vec![0.0; n];
        let mut a: Vec<f64> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let push_row = |row: Vec<f64>, rhs: f64, a: &mut Vec<f64>, b: &mut Vec<f64>| {
            debug_assert_eq!(row.len(), n);
            a.extend_from_slice(&row);
            b.push(rhs);
        };

        for j in 0..k {
            p[(2 * j) * n + 2 * j] += 2.0 * cfg.w_ax;
            p[(2 * j + 1) * n + 2 * j + 1] += 2.0 * cfg.w_ay;
        }
        // w_y (g + c' xb)^2 with g the free lateral drift.
        let mut const_cost = 0.0;
        for tau in 1..=k {
            let g = q_free(tau) - sv.q;
            const_cost += cfg.w_y * g * g;
            for j1 in 0..tau {
                let c1 = coef(tau, j1) * cap;
                q[2 * j1 + 1] += 2.0 * cfg.w_y * g * c1;
                for j2 in 0..tau {
                    let c2 = coef(tau, j2) * cap;
                    p[(2 * j1 + 1) * n + 2 * j2 + 1] += 2.0 * cfg.w_y * c1 * c2;
                }
            }
        }
        for (m, &tau) in hinge.iter().enumerate() {
            let v = h0 + m;
            q[v] += cfg.w_x;
            p[v * n + v] += 2e-4;
            let mut row = vec![0.0; n];
            row[v] = -1.0;
            push_row(row, 0.0, &mut a, &mut b);
            let mut row = vec![0.0; n];
            for j in 0..tau {
                row[2 * j] = coef(tau, j) * cap / cfg.d_soft;
            }
            row[v] = -1.0;
            let rhs = (corridor.front[tau - 1] - cfg.d_soft - p_free(tau)) / cfg.d_soft;
            push_row(row, rhs, &mut a, &mut b);
        }
        for (m, &tau) in front.iter().enumerate() {
            let v = f0 + m;
            p[v * n + v] += 2.0;
            let mut row = vec![0.0; n];
            for j in 0..tau {
                row[2 * j] = coef(tau, j) * cap;
            }
            row[v] = -slack_scale;
            push_row(row, corridor.front[tau - 1] - p_free(tau), &mut a, &mut b);
        }
        for (m, &tau) in left.iter().enumerate() {
            let v = l0 + m;
            p[v * n + v] += 2.0;
            let mut row = vec![0.0; n];
            for j in 0..tau {
                row[2 * j + 1] = coef(tau, j) * cap;
            }
            row[v] = -slack_scale;
            push_row(row, corridor.left[tau - 1] - q_free(tau), &mut a, &mut b);
        }
        for (m, &tau) in right.iter().enumerate() {
            let v = r0 + m;
            p[v * n + v] += 2.0;
            let mut row = vec![0.0; n];
            for j in 0..tau {
                row[2 * j + 1] = -coef(tau, j) * cap;
            }
            row[v] = -slack_scale;
            push_row(row, q_free(tau) - corridor.right[tau - 1], &mut a, &mut b);
        }
        for j in 0..k {
            for i in 0..12 {
                let mut row = vec![0.0; n];
                row[2 * j] = self.polytope.g[i][0] * cap;
                row[2 * j + 1] = self.polytope.g[i][1] * cap;
                push_row(row, self.polytope.h[i], &mut a, &mut b);
            }
        }
        // v(tau) >= 0
        for tau in 1..=k {
            let mut row = vec![0.0; n];
            for j in 0..tau {
                row[2 * j] = -dt * cap;
            }
            push_row(row, sv.v, &mut a, &mut b);
        }

        let problem = QpProblem::new(n, p, q, a, b).ok()?;
        let sol = solve_qp(&problem, cfg.qp_tol, cfg.qp_max_iter);
        if sol.status != QpStatus::Optimal {
            return None;
        }
        let x = &sol.x;
        let mut max_slack = 0.0f64;
        for &v in x[f0..n].iter() {
            max_slack = max_slack.max(v * slack_scale);
        }
        let mut max_accel = 0.0f64;
        for j in 0..k {
            let m = cap * math::hypot(x[2 * j], x[2 * j + 1]);
            max_accel = max_accel.max(m);
        }
        if max_accel >= cap - 1e-6 || max_slack > cfg.slack_tol {
            max_accel = cap;
        }
        Some(PcmOutput {
            max_accel,
            criticality: problem.objective(x) + const_cost,
            max_slack,
        })
    }
}

pub fn pcm(trip: &Trip, t: usize, cfg: &PcmConfig) -> Result<Option<PcmOutput>> {
    Ok(Pcm::new(*cfg)?.evaluate(trip, t))
}
