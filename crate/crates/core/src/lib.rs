//! Ground-truth "collision unavoidable" labelling and real-time safety metric
//! evaluation over logged multi-vehicle trajectories.
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be embedded
//! anywhere; file formats, the command-line pipeline and report rendering live
//! in the `cueval` companion crate.
//!
//! Module map:
//!
//! - [`geometry`]: vehicle states, trips and the three-circle / rectangle body models.
//! - [`kinematics`]: linearized point-mass dynamics, the Kamm action polytope, rollouts.
//! - [`qp`]: a small dense convex QP solver (dual active set).
//! - [`oracle`]: per-moment evasive-trajectory feasibility and trip labelling.
//! - [`metrics`]: TTC, PCM and MPrISM behind one interface.
//! - [`evaluation`]: alarms, trip-level confusion matrices, ROC / PR curves, AUC.
//! - [`scenario`]: seeded synthetic highway trips and the golden failure fixtures.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod kinematics;
pub mod metrics;
pub mod oracle;
pub mod qp;
pub mod scenario;

mod math;

pub use error::Error;
pub use geometry::{Action, BodyModel, Point, RoadSpec, Trip, VehicleState, VehicleTrack};
pub use kinematics::{AccelLimits, ActionPolytope, DynamicsModel, KammVariant};

/// Crate-wide result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;
