//! Ground-truth labelling: is there an admissible SV action sequence that stays
//! clear of every BV's logged future over the look-ahead horizon?
//!
//! The exact question is a nonconvex feasibility problem. We answer it by
//! enumerating a fixed family of evasive maneuvers built from the Kamm
//! polygon. A "feasible" verdict comes with the collision-free action
//! sequence as a witness; "collision unavoidable" only means no member of the
//! family escapes.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    centers_collide, circle_centers, circles_collide, Action, BodyModel, Point, Trip,
};
use crate::kinematics::{
    extend_track, make_kamm, rollout, rollout_stopping, AccelLimits, ActionPolytope, DynamicsModel,
    KammVariant,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverFamily {
    /// 12 boundary directions.
    #[default]
    Standard,
    /// 24 boundary directions; a superset of the standard family.
    Fine,
}

impl ManeuverFamily {
    pub fn directions(self) -> usize {
        match self {
            ManeuverFamily::Standard => 12,
            ManeuverFamily::Fine => 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub lookahead_steps: usize,
    pub dt: f64,
    pub body: BodyModel,
    pub limits: AccelLimits,
    pub kamm_variant: KammVariant,
    pub maneuver_family: ManeuverFamily,
    /// Full-brake durations before switching to a constant boundary action.
    pub switch_steps: Vec<usize>,
    /// Also require the SV centre to stay on the paved road.
    pub road_bounds: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            lookahead_steps: 20,
            dt: 0.1,
            body: BodyModel::default(),
            limits: AccelLimits::default(),
            kamm_variant: KammVariant::default(),
            maneuver_family: ManeuverFamily::default(),
            switch_steps: alloc::vec![0, 5, 10, 15],
            road_bounds: false,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookahead_steps == 0 {
            return Err(Error::InvalidConfig(
                "oracle.lookahead_steps must be >= 1".into(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig("oracle.dt must be positive".into()));
        }
        self.body.validate()?;
        make_kamm(self.limits, self.kamm_variant)?;
        Ok(())
    }

    pub fn polytope(&self) -> Result<ActionPolytope> {
        make_kamm(self.limits, self.kamm_variant)
    }
}

/// The maneuver family in canonical order: every constant grid action (zero
/// first), then for each nonzero switch step `j` in the configured order, full
/// braking for `j` steps followed by each nonzero boundary action.
pub fn candidate_maneuvers(config: &OracleConfig) -> Result<Vec<Vec<Action>>> {
    let poly = config.polytope()?;
    let k = config.lookahead_steps;
    let grid = poly.boundary_grid(config.maneuver_family.directions());
    let brake = poly.boundary_action(PI);
    let mut out = Vec::new();
    for u in &grid {
        out.push(alloc::vec![*u; k]);
    }
    for &j in &config.switch_steps {
        // j = 0 repeats the constant family; j >= k is constant braking.
        if j == 0 || j >= k {
            continue;
        }
        for u in grid.iter().skip(1) {
            let mut seq = alloc::vec![brake; j];
            seq.resize(k, *u);
            out.push(seq);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Actions actually applied by the escaping maneuver (braking clipped at
    /// standstill), `None` when collision is unavoidable.
    pub witness: Option<Vec<Action>>,
}

/// Labeller with the candidate family built once.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub config: OracleConfig,
    candidates: Vec<Vec<Action>>,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Result<Self> {
        config.validate()?;
        let candidates = candidate_maneuvers(&config)?;
        Ok(Self { config, candidates })
    }

    pub fn candidates(&self) -> &[Vec<Action>] {
        &self.candidates
    }

    pub fn is_feasible(&self, trip: &Trip, t: usize) -> Result<Feasibility> {
        if t >= trip.len() {
            return Err(Error::TimestepOutOfRange { t, len: trip.len() });
        }
        let cfg = &self.config;
        let k = cfg.lookahead_steps;
        let sv0 = trip.sv.states[t];
        let sv_body = &trip.sv.body;

        // BV circle centres for s = 0..=k, with their collision thresholds.
        let mut bv_centers: Vec<(f64, Vec<[Point; 3]>)> = Vec::with_capacity(trip.bvs.len());
        for bv in &trip.bvs {
            let thr = sv_body.radius + bv.body.radius;
            let mut s = bv.state_at(t, trip.dt);
            let mut cs = Vec::with_capacity(k + 1);
            cs.push(circle_centers(&s, &bv.body));
            for step in 1..=k {
                s = if t + step < bv.len() {
                    bv.states[t + step]
                } else {
                    s.coast(trip.dt)
                };
                cs.push(circle_centers(&s, &bv.body));
            }
            bv_centers.push((thr * thr, cs));
        }

        let sv_now = circle_centers(&sv0, sv_body);
        if bv_centers
            .iter()
            .any(|(thr, cs)| centers_collide(&sv_now, &cs[0], *thr))
        {
            return Ok(Feasibility {
                feasible: false,
                witness: None,
            });
        }

        let model = DynamicsModel::new(sv0.v, cfg.dt);
        let (lo, hi) = trip.road.bounds();
        'cand: for seq in &self.candidates {
            let (states, applied) = rollout_stopping(&sv0, seq, &model);
            for (step, s) in states.iter().enumerate().skip(1) {
                if cfg.road_bounds {
                    let half = 0.5 * sv_body.width;
                    if s.q < lo + half || s.q > hi - half {
                        continue 'cand;
                    }
                }
                let c = circle_centers(s, sv_body);
                if bv_centers
                    .iter()
                    .any(|(thr, cs)| centers_collide(&c, &cs[step], *thr))
                {
                    continue 'cand;
                }
            }
            return Ok(Feasibility {
                feasible: true,
                witness: Some(applied),
            });
        }
        Ok(Feasibility {
            feasible: false,
            witness: None,
        })
    }

    pub fn label_trip(&self, trip: &Trip) -> Result<LabelSeries> {
        let n = trip.len();
        let last = trip.last_evaluated_index();
        let mut cu_flags = alloc::vec![false; n];
        let mut witnesses = alloc::vec![None; n];
        for t in 0..=last.min(n.saturating_sub(1)) {
            let f = self.is_feasible(trip, t)?;
            cu_flags[t] = !f.feasible;
            witnesses[t] = f.witness;
        }
        let first_cu_index = cu_flags.iter().position(|&f| f);
        let (deadline_index, fallback_used) = match (first_cu_index, trip.crash_index) {
            (Some(i), _) if trip.crash => (Some(i), false),
            (None, Some(c)) => (Some(c), true),
            _ => (None, false),
        };
        Ok(LabelSeries {
            trip_id: trip.trip_id.clone(),
            evaluated_len: last + 1,
            cu_flags,
            first_cu_index,
            witnesses,
            deadline_index,
            fallback_used,
        })
    }
}

pub fn is_feasible(trip: &Trip, t: usize, config: &OracleConfig) -> Result<Feasibility> {
    Oracle::new(config.clone())?.is_feasible(trip, t)
}

pub fn label_trip(trip: &Trip, config: &OracleConfig) -> Result<LabelSeries> {
    Oracle::new(config.clone())?.label_trip(trip)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSeries {
    pub trip_id: String,
    /// Steps `0..evaluated_len` were labelled; later flags stay false.
    pub evaluated_len: usize,
    pub cu_flags: Vec<bool>,
    pub first_cu_index: Option<usize>,
    pub witnesses: Vec<Option<Vec<Action>>>,
    /// Positive trips only: first CU moment, else the crash index.
    pub deadline_index: Option<usize>,
    /// Crash trip where no CU moment was found; the deadline is the crash index.
    pub fallback_used: bool,
}

impl LabelSeries {
    pub fn is_positive(&self) -> bool {
        self.deadline_index.is_some()
    }
}

/// Re-check a witness from scratch: admissible actions, plain linear rollout,
/// three-circle clearance against every BV extended at constant velocity.
pub fn verify_witness(trip: &Trip, t: usize, config: &OracleConfig, witness: &[Action]) -> bool {
    let poly = match config.polytope() {
        Ok(p) => p,
        Err(_) => return false,
    };
    if witness.len() != config.lookahead_steps || !witness.iter().all(|u| poly.contains(u)) {
        return false;
    }
    let sv0 = trip.sv.states[t];
    let model = DynamicsModel::new(sv0.v, config.dt);
    let states = rollout(&sv0, witness, &model);
    let horizon = t + config.lookahead_steps + 1;
    for bv in &trip.bvs {
        let ext = if bv.len() < horizon {
            extend_track(bv, horizon - bv.len(), trip.dt)
        } else {
            bv.clone()
        };
        for (step, s) in states.iter().enumerate().skip(1) {
            if circles_collide((s, &trip.sv.body), (&ext.states[t + step], &ext.body)) {
                return false;
            }
        }
    }
    true
}
