//! MPrISM: worst-case pairwise reachability game between the SV and one BV.
//!
//! The game is discretized over constant actions from the Kamm grid. For each
//! horizon `N` the value is
//! `min over POV actions  max over SV actions  |x_sv(N) - x_pov(N)|`,
//! i.e. the POV picks the action that makes the SV's best escape as short as
//! possible. Both vehicles are single points at their centres.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Action, Trip, VehicleState};
use crate::kinematics::{make_kamm, rollout_stopping, AccelLimits, DynamicsModel, KammVariant};
use crate::oracle::ManeuverFamily;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MprismConfig {
    pub dt: f64,
    /// Largest horizon `T` in steps.
    pub horizon: usize,
    /// Collision threshold `C` on centre distance (m).
    pub collision_threshold: f64,
    pub limits: AccelLimits,
    pub kamm_variant: KammVariant,
    pub sv_grid: ManeuverFamily,
    pub pov_grid: ManeuverFamily,
}

impl Default for MprismConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 10,
            collision_threshold: 4.0,
            limits: AccelLimits::default(),
            kamm_variant: KammVariant::default(),
            sv_grid: ManeuverFamily::Standard,
            pov_grid: ManeuverFamily::Standard,
        }
    }
}

impl MprismConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("mprism.horizon must be >= 1".into()));
        }
        if !(self.collision_threshold > 0.0 && self.collision_threshold.is_finite()) {
            return Err(Error::InvalidConfig(
                "mprism.collision_threshold must be positive".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("mprism.dt must be positive".into()));
        }
        make_kamm(self.limits, self.kamm_variant)?;
        Ok(())
    }
}

/// Action grids for both players, built once per configuration.
#[derive(Debug, Clone)]
pub struct Mprism {
    pub config: MprismConfig,
    sv_actions: Vec<Action>,
    pov_actions: Vec<Action>,
}

impl Mprism {
    pub fn new(config: MprismConfig) -> Result<Self> {
        config.validate()?;
        let poly = make_kamm(config.limits, config.kamm_variant)?;
        Ok(Self {
            sv_actions: poly.boundary_grid(config.sv_grid.directions()),
            pov_actions: poly.boundary_grid(config.pov_grid.directions()),
            config,
        })
    }

    /// Centre positions after `1..=horizon` steps for each constant action.
    fn reach(&self, s: &VehicleState, actions: &[Action]) -> Vec<Vec<(f64, f64)>> {
        let model = DynamicsModel::new(s.v, self.config.dt);
        actions
            .iter()
            .map(|u| {
                let seq = alloc::vec![*u; self.config.horizon];
                let (states, _) = rollout_stopping(s, &seq, &model);
                states[1..].iter().map(|x| (x.p, x.q)).collect()
            })
            .collect()
    }

    /// Game values for `N = 1..=horizon`.
    pub fn pair_values(&self, sv: &VehicleState, pov: &VehicleState) -> Vec<f64> {
        let sv_reach = self.reach(sv, &self.sv_actions);
        let pov_reach = self.reach(pov, &self.pov_actions);
        (0..self.config.horizon)
            .map(|n| {
                let mut best = f64::INFINITY;
                for pr in &pov_reach {
                    let (px, py) = pr[n];
                    let mut worst = 0.0f64;
                    for sr in &sv_reach {
                        let (sx, sy) = sr[n];
                        let d2 = (sx - px) * (sx - px) + (sy - py) * (sy - py);
                        if d2 > worst {
                            worst = d2;
                        }
                    }
                    if worst < best {
                        best = worst;
                    }
                }
                crate::math::sqrt(best)
            })
            .collect()
    }

    pub fn pair_value(&self, sv: &VehicleState, pov: &VehicleState, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.config.horizon, "N must lie in 1..=T");
        self.pair_values(sv, pov)[n - 1]
    }

    /// Smallest `N * dt` whose game value falls below `C`, over all BVs.
    pub fn mprttc(&self, trip: &Trip, t: usize) -> f64 {
        let sv = trip.sv.states[t];
        let mut best = f64::INFINITY;
        for bv in &trip.bvs {
            let pov = bv.state_at(t, trip.dt);
            let values = self.pair_values(&sv, &pov);
            if let Some(n) = values
                .iter()
                .position(|&v| v < self.config.collision_threshold)
            {
                let ttc = (n + 1) as f64 * self.config.dt;
                if ttc < best {
                    best = ttc;
                }
            }
        }
        best
    }
}

pub fn mprism_pair_value(
    sv: &VehicleState,
    pov: &VehicleState,
    n: usize,
    cfg: &MprismConfig,
) -> Result<f64> {
    Ok(Mprism::new(*cfg)?.pair_value(sv, pov, n))
}

pub fn mprttc(trip: &Trip, t: usize, cfg: &MprismConfig) -> Result<f64> {
    Ok(Mprism::new(*cfg)?.mprttc(trip, t))
}
